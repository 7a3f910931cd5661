#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rfaug/io.hpp"
#include "rfaug/pipeline.hpp"
#include "test_util.hpp"

using namespace rfaug;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const std::filesystem::path& capture) {
  const char* bin = std::getenv("RFAUG_BIN");
  REQUIRE(bin != nullptr);
  const std::string cmd =
      std::string(bin) + " " + args + " > " + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::ostringstream ss;
  ss << in.rdbuf();
  result.output = ss.str();
  return result;
}

void write_minimal_tensor(const std::filesystem::path& path) {
  CsiTensor t;
  t.t_count = 2;
  t.f_count = 1;
  t.l_count = 1;
  t.sample_rate_hz = 1000.0;
  t.data = {{1.0, 0.0}, {0.0, 1.0}};
  write_csi(t, path);
}

void write_scene(const std::filesystem::path& path, int f_count, int l_count) {
  std::ofstream out(path);
  out << R"({
    "duration_s": 1.5, "sample_rate_hz": 500, "f_count": )"
      << f_count << R"(, "l_count": )" << l_count << R"(, "noise_sigma": 0.05,
    "paths": [
      {"amplitude": [1, 0], "delay_s": 3e-8},
      {"amplitude": 0.6, "delay_s": 5e-8, "doppler_hz": 30.0, "active": [0.4, 1.1]}
    ]
  })";
}

}  // namespace

TEST_CASE("inspect prints the documented header line") {
  test::TempDir dir("cli");
  write_minimal_tensor(dir.path / "min.rfb");
  const CliResult r = run_cli("inspect " + (dir.path / "min.rfb").string(), dir.path / "cap");
  CHECK(r.exit_code == 0);
  CHECK(r.output.starts_with("T=2 F=1 L=1 rate=1000\n"));
}

TEST_CASE("exit codes map error classes") {
  test::TempDir dir("cli");
  // Missing file: I/O error.
  CHECK(run_cli("inspect " + (dir.path / "nope.rfb").string(), dir.path / "cap").exit_code == 3);

  // Corrupt payload: data error.
  write_minimal_tensor(dir.path / "trunc.rfb");
  std::filesystem::resize_file(dir.path / "trunc.rfb", 30);
  CHECK(run_cli("inspect " + (dir.path / "trunc.rfb").string(), dir.path / "cap").exit_code == 2);

  // Unknown subcommand: usage error.
  CHECK(run_cli("frobnicate", dir.path / "cap").exit_code == 1);

  // Missing required --seed: usage error.
  write_scene(dir.path / "scene.json", 2, 1);
  CHECK(run_cli("synth " + (dir.path / "scene.json").string() + " -o " +
                    (dir.path / "t.rfb").string(),
                dir.path / "cap")
            .exit_code == 1);
}

TEST_CASE("vote prints the majority label") {
  test::TempDir dir("cli");
  {
    std::ofstream out(dir.path / "preds.txt");
    out << "A\nA\nB\n";
  }
  const CliResult r = run_cli("vote " + (dir.path / "preds.txt").string(), dir.path / "cap");
  CHECK(r.exit_code == 0);
  CHECK(r.output == "A\n");

  {
    std::ofstream out(dir.path / "by-sample.txt");
    out << "s1,A,0.9\ns1,B,0.8\ns2,B,0.7\n";
  }
  const CliResult r2 = run_cli("vote " + (dir.path / "by-sample.txt").string(), dir.path / "cap");
  CHECK(r2.exit_code == 0);
  CHECK(r2.output == "s1,A\ns2,B\n");
}

TEST_CASE("ms and select are line-oriented and deterministic") {
  test::TempDir dir("cli");
  write_scene(dir.path / "scene.json", 6, 1);
  REQUIRE(run_cli("synth " + (dir.path / "scene.json").string() + " --seed 4 -o " +
                      (dir.path / "s.rfb").string(),
                  dir.path / "cap")
              .exit_code == 0);

  const CliResult ms = run_cli("ms " + (dir.path / "s.rfb").string(), dir.path / "cap");
  CHECK(ms.exit_code == 0);
  std::istringstream lines(ms.output);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 6);

  const std::string select_cmd =
      "select " + (dir.path / "s.rfb").string() + " --method iss --k 3";
  const CliResult a = run_cli(select_cmd, dir.path / "cap");
  const CliResult b = run_cli(select_cmd, dir.path / "cap2");
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  // k > F is a usage error.
  CHECK(run_cli("select " + (dir.path / "s.rfb").string() + " --method iss --k 9",
                dir.path / "cap")
            .exit_code == 1);
}

TEST_CASE("synth, export, validate round trip; deleting a tensor fails validation") {
  test::TempDir dir("cli");
  write_scene(dir.path / "scene.json", 6, 1);
  const std::filesystem::path data = dir.path / "data";
  std::filesystem::create_directories(data);
  for (int i = 0; i < 2; ++i) {
    REQUIRE(run_cli("synth " + (dir.path / "scene.json").string() + " --seed " +
                        std::to_string(10 + i) + " -o " +
                        (data / ("g" + std::to_string(i) + ".rfb")).string(),
                    dir.path / "cap")
                .exit_code == 0);
  }
  // Ground-truth sidecars are not CSI inputs; keep only .rfb in the data dir.
  for (const auto& entry : std::filesystem::directory_iterator(data))
    if (entry.path().extension() == ".json") std::filesystem::remove(entry.path());

  const std::string out = (dir.path / "out").string();
  const CliResult exported = run_cli(
      "export " + data.string() + " -o " + out +
          " --seed 9 --set plan.tda=1 --set plan.mda=2 --set plan.gsm=1 --set fda.k=2"
          " --set export.t_out=64 --set stft.window_len=64 --set stft.n_dft=128"
          " --set windows.default_len=64 --set windows.lengthened_len=128"
          " --set windows.shortened_len=32",
      dir.path / "cap");
  CHECK(exported.exit_code == 0);
  CHECK(exported.output.find("aratio=4") != std::string::npos);

  CHECK(run_cli("validate " + out, dir.path / "cap").exit_code == 0);

  // Remove one exported tensor; validate must fail naming it.
  const DatasetManifest manifest = load_manifest(dir.path / "out" / "manifest.json");
  const std::string victim = manifest.entries.back().path;
  std::filesystem::remove(dir.path / "out" / victim);
  const CliResult invalid = run_cli("validate " + out, dir.path / "cap");
  CHECK(invalid.exit_code == 2);
  CHECK(invalid.output.find(victim) != std::string::npos);
}

TEST_CASE("identical export invocations produce identical bytes") {
  test::TempDir dir("cli");
  write_scene(dir.path / "scene.json", 4, 1);
  const std::filesystem::path data = dir.path / "data";
  std::filesystem::create_directories(data);
  REQUIRE(run_cli("synth " + (dir.path / "scene.json").string() + " --seed 3 -o " +
                      (data / "g.rfb").string(),
                  dir.path / "cap")
              .exit_code == 0);

  const std::string flags =
      " --seed 5 --set plan.mda=2 --set fda.k=2 --set export.t_out=48"
      " --set stft.window_len=64 --set stft.n_dft=128 --set windows.default_len=64"
      " --set windows.shortened_len=32";
  REQUIRE(run_cli("export " + data.string() + " -o " + (dir.path / "o1").string() + flags,
                  dir.path / "cap")
              .exit_code == 0);
  REQUIRE(run_cli("export " + data.string() + " -o " + (dir.path / "o2").string() + flags,
                  dir.path / "cap")
              .exit_code == 0);

  const DatasetManifest m = load_manifest(dir.path / "o1" / "manifest.json");
  for (const ManifestEntry& e : m.entries) {
    std::ifstream a(dir.path / "o1" / e.path, std::ios::binary);
    std::ifstream b(dir.path / "o2" / e.path, std::ios::binary);
    std::ostringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
  }
}
