// Command-line front end: inspect tensors, print motion statistics, select
// subcarriers, run augmentation plans, export datasets, synthesize scenes,
// aggregate test-time votes, and validate manifests.
//
// Exit codes: 0 success, 1 usage/config error, 2 data/format error, 3 I/O.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rfaug/errors.hpp"
#include "rfaug/fda.hpp"
#include "rfaug/io.hpp"
#include "rfaug/motion.hpp"
#include "rfaug/pipeline.hpp"
#include "rfaug/synth.hpp"

namespace {

using namespace rfaug;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitIo = 3;

PipelineConfig make_config(const std::string& config_path,
                           const std::vector<std::string>& overrides) {
  nlohmann::json j = nlohmann::json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open " + config_path);
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config json unparsable: " + std::string(e.what()));
    }
  }
  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got \"" + kv + "\"");
    apply_override(j, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config_from_json(j);
}

std::unique_ptr<CacheStore> make_cache(const PipelineConfig& cfg, const std::string& flag_dir) {
  const std::string dir = !flag_dir.empty() ? flag_dir : cfg.out.cache_dir;
  if (dir.empty()) return nullptr;
  return std::make_unique<CacheStore>(dir, cfg.out.cache_cap_bytes);
}

std::vector<SampleRecord> collect_samples(const std::filesystem::path& in_dir) {
  std::vector<SampleRecord> samples;
  const std::filesystem::path index = in_dir / "index.json";
  if (std::filesystem::exists(index)) {
    std::ifstream in(index);
    if (!in) throw IoError("cannot open " + index.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("index json unparsable: " + std::string(e.what()));
    }
    for (const auto& ej : j.at("samples")) {
      SampleRecord s;
      s.id = ej.at("id").get<std::string>();
      s.label = ej.value("label", "");
      s.env_tag = ej.value("env_tag", "");
      s.csi = read_csi(in_dir / ej.at("path").get<std::string>());
      s.csi.label = s.label;
      s.csi.env_tag = s.env_tag;
      samples.push_back(std::move(s));
    }
    return samples;
  }

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(in_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".rfb")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    SampleRecord s;
    s.id = path.stem().string();
    s.csi = read_csi(path);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ArgumentError("no samples found in " + in_dir.string());
  return samples;
}

int run_inspect(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  probe.read(magic, 4);
  probe.close();

  if (std::string_view(magic, 4) == "RFS1") {
    const Spectrogram spec = read_spectrogram(path);
    std::printf("B=%zu N=%zu\n", spec.rows(), spec.cols());
    double peak = 0.0;
    for (double v : spec.values) peak = std::max(peak, v);
    std::printf("fmin=%g fmax=%g tmin=%g tmax=%g peak=%g\n", spec.bin_freqs_hz.front(),
                spec.bin_freqs_hz.back(), spec.bin_times_s.front(), spec.bin_times_s.back(), peak);
    return kExitOk;
  }

  const CsiTensor t = read_csi(path);
  std::printf("T=%u F=%u L=%u rate=%g\n", t.t_count, t.f_count, t.l_count, t.sample_rate_hz);
  double mean_abs = 0.0, max_abs = 0.0;
  for (const auto& c : t.data) {
    const double a = std::abs(c);
    mean_abs += a;
    max_abs = std::max(max_abs, a);
  }
  mean_abs /= static_cast<double>(t.data.size());
  std::printf("samples=%zu mean_abs=%g max_abs=%g\n", t.data.size(), mean_abs, max_abs);
  return kExitOk;
}

int run_ms(const std::string& path) {
  const CsiTensor t = read_csi(path);
  const std::vector<double> ms = ms_global(t);
  for (std::uint32_t f = 0; f < t.f_count; ++f)
    for (std::uint32_t l = 0; l < t.l_count; ++l)
      std::printf("%u %u %.9g\n", f, l, ms[static_cast<std::size_t>(f) * t.l_count + l]);
  return kExitOk;
}

int run_select(const std::string& path, const std::string& method_name, int k,
               std::uint64_t seed) {
  const CsiTensor t = read_csi(path);
  const SelectMethod method = parse_select_method(method_name);
  const std::vector<double> ms = ms_global(t);

  SelectionResult sel;
  if (method == SelectMethod::iss)
    sel = select_iss(ms, static_cast<int>(t.f_count), static_cast<int>(t.l_count), k);
  else if (method == SelectMethod::pca)
    throw ArgumentError("pca yields component series, not a subcarrier subset");
  else
    sel = select_baseline(t, ms, method, k, seed);

  for (const auto& [f, l] : sel.indices) std::printf("%d %d\n", f, l);
  return kExitOk;
}

int run_synth(const std::string& scene_path, std::uint64_t seed, const std::string& out_path,
              std::string truth_path) {
  const SceneSpec scene = load_scene(scene_path);
  const auto [tensor, truth] = generate(scene, seed);
  write_csi(tensor, out_path);
  if (truth_path.empty()) truth_path = out_path + ".truth.json";
  save_ground_truth(truth, truth_path);
  std::printf("wrote %s (T=%u F=%u L=%u)\n", out_path.c_str(), tensor.t_count, tensor.f_count,
              tensor.l_count);
  return kExitOk;
}

int run_export(std::vector<SampleRecord> samples, const PipelineConfig& cfg, std::uint64_t seed,
               const std::string& out_dir, const std::string& cache_dir, int jobs) {
  const auto cache = make_cache(cfg, cache_dir);
  const ExportResult result = export_dataset(samples, cfg, seed, out_dir, cache.get(), jobs);
  std::printf("exported samples=%zu entries=%zu aratio=%d stft_computed=%llu cache_hits=%llu\n",
              samples.size(), result.manifest.entries.size(), build_plan(cfg, seed).aratio(),
              static_cast<unsigned long long>(result.stats.stft_computed),
              static_cast<unsigned long long>(result.stats.cache_hits));
  return kExitOk;
}

int run_vote(const std::string& path) {
  const std::vector<Prediction> all = read_predictions(path);
  if (all.empty()) throw ArgumentError("no predictions in " + path);

  std::vector<std::string> order;
  std::map<std::string, std::vector<Prediction>> by_sample;
  for (const Prediction& p : all) {
    if (!by_sample.contains(p.sample_id)) order.push_back(p.sample_id);
    by_sample[p.sample_id].push_back(p);
  }
  for (const std::string& id : order) {
    const std::string label = tta_vote(by_sample[id]);
    if (id.empty())
      std::printf("%s\n", label.c_str());
    else
      std::printf("%s,%s\n", id.c_str(), label.c_str());
  }
  return kExitOk;
}

int run_validate(const std::string& in_path) {
  std::filesystem::path manifest_path(in_path);
  if (std::filesystem::is_directory(manifest_path)) manifest_path /= "manifest.json";
  const DatasetManifest manifest = load_manifest(manifest_path);
  validate_manifest(manifest, manifest_path.parent_path());
  std::printf("valid entries=%zu\n", manifest.entries.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rfaug: physical augmentation pipeline for WiFi CSI spectrograms"};
  app.require_subcommand(1);

  std::string in_path, out_path, config_path, cache_dir, method = "iss", truth_path, label,
              env_tag;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int k = 6, jobs = 1;

  auto* inspect = app.add_subcommand("inspect", "print tensor dimensions and stats");
  inspect->add_option("file", in_path)->required();

  auto* ms = app.add_subcommand("ms", "print per-subcarrier motion statistics");
  ms->add_option("file", in_path)->required();

  auto* select = app.add_subcommand("select", "print a subcarrier selection");
  select->add_option("file", in_path)->required();
  select->add_option("--method", method, "iss|top_ms|top_mean|top_var|random");
  select->add_option("--k", k)->required();
  select->add_option("--seed", seed);

  auto* augment = app.add_subcommand("augment", "augment one CSI file into spectrogram sets");
  augment->add_option("file", in_path)->required();
  augment->add_option("-o,--out", out_path)->required();
  augment->add_option("--seed", seed)->required();
  augment->add_option("-c,--config", config_path);
  augment->add_option("--set", overrides, "config override key=value");
  augment->add_option("--cache-dir", cache_dir);
  augment->add_option("--label", label);
  augment->add_option("--env", env_tag);

  auto* exp = app.add_subcommand("export", "augment a directory of CSI files into a dataset");
  exp->add_option("dir", in_path)->required();
  exp->add_option("-o,--out", out_path)->required();
  exp->add_option("--seed", seed)->required();
  exp->add_option("-c,--config", config_path);
  exp->add_option("--set", overrides, "config override key=value");
  exp->add_option("--cache-dir", cache_dir);
  exp->add_option("-j,--jobs", jobs);

  auto* synth = app.add_subcommand("synth", "generate CSI from a scene description");
  synth->add_option("scene", in_path)->required();
  synth->add_option("-o,--out", out_path)->required();
  synth->add_option("--seed", seed)->required();
  synth->add_option("--truth", truth_path);

  auto* vote = app.add_subcommand("vote", "majority-vote prediction lines");
  vote->add_option("file", in_path)->required();

  auto* validate = app.add_subcommand("validate", "check an exported dataset manifest");
  validate->add_option("path", in_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (inspect->parsed()) return run_inspect(in_path);
    if (ms->parsed()) return run_ms(in_path);
    if (select->parsed()) return run_select(in_path, method, k, seed);
    if (synth->parsed()) return run_synth(in_path, seed, out_path, truth_path);
    if (augment->parsed()) {
      const PipelineConfig cfg = make_config(config_path, overrides);
      SampleRecord s;
      s.id = std::filesystem::path(in_path).stem().string();
      s.label = label;
      s.env_tag = env_tag;
      s.csi = read_csi(in_path);
      s.csi.label = label;
      s.csi.env_tag = env_tag;
      std::vector<SampleRecord> one;
      one.push_back(std::move(s));
      return run_export(std::move(one), cfg, seed, out_path, cache_dir, 1);
    }
    if (exp->parsed()) {
      const PipelineConfig cfg = make_config(config_path, overrides);
      return run_export(collect_samples(in_path), cfg, seed, out_path, cache_dir, jobs);
    }
    if (vote->parsed()) return run_vote(in_path);
    if (validate->parsed()) return run_validate(in_path);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
