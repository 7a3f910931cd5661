#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "rfaug/errors.hpp"
#include "rfaug/io.hpp"
#include "rfaug/pipeline.hpp"
#include "rfaug/synth.hpp"
#include "test_util.hpp"

using namespace rfaug;

namespace {

SampleRecord synth_sample(const std::string& id, std::uint64_t seed, double doppler_hz = 35.0,
                          int f_count = 8, int l_count = 1, const std::string& env = "") {
  SceneSpec scene;
  scene.duration_s = 2.0;
  scene.sample_rate_hz = 500.0;
  scene.f_count = f_count;
  scene.l_count = l_count;
  scene.noise_sigma = 0.05;
  scene.sensitivity.resize(static_cast<std::size_t>(f_count));
  for (int f = 0; f < f_count; ++f)
    scene.sensitivity[static_cast<std::size_t>(f)] = 0.5 + 0.2 * f;

  ScenePath still;
  still.delay_s = 30e-9;
  scene.paths.push_back(still);
  ScenePath mover;
  mover.amplitude = {0.7, 0.0};
  mover.delay_s = 50e-9;
  mover.doppler = {{0.0, doppler_hz}};
  mover.active_start_s = 0.5;
  mover.active_end_s = 1.5;
  scene.paths.push_back(mover);

  SampleRecord s;
  s.id = id;
  s.label = "gesture";
  s.env_tag = env;
  s.csi = generate(scene, seed).first;
  s.csi.label = s.label;
  s.csi.env_tag = env;
  return s;
}

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.stft.window_len = 64;
  cfg.stft.hop = 16;
  cfg.stft.n_dft = 128;
  cfg.stft.crop_hz = 60.0;
  cfg.windows.default_len = 64;
  cfg.windows.lengthened_len = 128;
  cfg.windows.shortened_len = 32;
  cfg.fda.k = 2;
  cfg.fda.g_count = 3;
  cfg.fda.top = 2;
  cfg.out.t_out = 64;
  return cfg;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("descriptor text round trips") {
  const std::vector<AugDescriptor> descriptors{
      FdaIssDesc{6},
      TdaDesc{256},
      FdaGsmDesc{3, 2, 123456789},
      MdaEraseDesc{0.1, 0.3, FillMode::mean, 42},
      MdaEraseDesc{0.125, 0.875, FillMode::zero, 0},
      MdaShiftDesc{7},
  };
  for (const AugDescriptor& d : descriptors) {
    const std::string text = descriptor_text(d);
    CHECK(parse_descriptor(text) == d);
  }
  CHECK(descriptor_text(FdaIssDesc{6}) == "iss(k=6)");
  CHECK(descriptor_text(TdaDesc{256}) == "tda(window=256)");
  CHECK_THROWS_AS(parse_descriptor("nope(k=1)"), FormatError);
  CHECK_THROWS_AS(parse_descriptor("tda(window=256"), FormatError);
  CHECK_THROWS_AS(parse_descriptor("mrs()"), FormatError);
}

TEST_CASE("build_plan counts variants and derives distinct seeds") {
  PipelineConfig cfg = small_config();

  SUBCASE("stock 2 tda + 6 mda + 1 gsm plan gives aratio 9") {
    cfg.plan = {2, 6, 1};
    const AugPlan plan = build_plan(cfg, 1234);
    CHECK(plan.aratio() == 9);
    CHECK(std::get<TdaDesc>(plan.descriptors[0]).window_len == 128);
    CHECK(std::get<TdaDesc>(plan.descriptors[1]).window_len == 32);
    CHECK(std::holds_alternative<FdaGsmDesc>(plan.descriptors[8]));
  }

  SUBCASE("empty config gives aratio 0") {
    cfg.plan = {0, 0, 0};
    CHECK(build_plan(cfg, 9).aratio() == 0);
  }

  SUBCASE("mda:3 alternates erase/shift with distinct seeds") {
    cfg.plan = {0, 3, 0};
    const AugPlan plan = build_plan(cfg, 7);
    REQUIRE(plan.aratio() == 3);
    const auto& e0 = std::get<MdaEraseDesc>(plan.descriptors[0]);
    const auto& s1 = std::get<MdaShiftDesc>(plan.descriptors[1]);
    const auto& e2 = std::get<MdaEraseDesc>(plan.descriptors[2]);
    CHECK(e0.seed != s1.seed);
    CHECK(e0.seed != e2.seed);
    CHECK(s1.seed != e2.seed);
    // Same master seed, same plan.
    const AugPlan again = build_plan(cfg, 7);
    CHECK(again.descriptors == plan.descriptors);
  }

  SUBCASE("invalid counts rejected") {
    cfg.plan = {3, 0, 0};
    CHECK_THROWS_AS(build_plan(cfg, 0), ConfigError);
    cfg.plan = {-1, 0, 0};
    CHECK_THROWS_AS(build_plan(cfg, 0), ConfigError);
  }
}

TEST_CASE("run_plan emits base plus one set per descriptor with provenance") {
  const SampleRecord sample = synth_sample("s0", 1, 30.0, 8, 2);
  PipelineConfig cfg = small_config();
  cfg.plan = {2, 6, 1};
  const AugPlan plan = build_plan(cfg, 99);

  const SampleResult result = run_plan(sample, plan, cfg);
  CHECK(result.base.descriptor == "iss(k=2)");
  CHECK(result.base.specs.size() == 4);  // k=2 over 2 links
  REQUIRE(result.variants.size() == 9);

  std::set<std::string> descriptors;
  for (const VariantSet& v : result.variants) {
    CHECK(!v.specs.empty());
    descriptors.insert(v.descriptor);
    for (const Spectrogram& s : v.specs) {
      CHECK(s.cols() == cfg.out.t_out);
      CHECK(s.origin.source_id == "s0");
    }
  }
  CHECK(descriptors.size() == 9);  // distinct per-descriptor provenance

  // GSM set = base channels + top mixed groups.
  const VariantSet& gsm = result.variants.back();
  CHECK(gsm.specs.size() == result.base.specs.size() + 2);
  CHECK(gsm.specs.back().origin.channel.starts_with("grp"));

  // TDA sets regenerate the same subcarriers with the alternate windows.
  CHECK(result.variants[0].specs.size() == 4);
  CHECK(result.variants[0].specs[0].origin.window_len == 128);
  CHECK(result.variants[1].specs[0].origin.window_len == 32);

  // aratio 0 plan: base only.
  const SampleResult bare = run_plan(sample, AugPlan{}, cfg);
  CHECK(bare.variants.empty());
  CHECK(bare.base.specs.size() == 4);
}

TEST_CASE("cache makes reruns reload instead of recompute, bit-identically") {
  test::TempDir dir("cache");
  const SampleRecord sample = synth_sample("sc", 3);
  PipelineConfig cfg = small_config();
  cfg.plan = {1, 2, 1};
  const AugPlan plan = build_plan(cfg, 5);

  CacheStore cache(dir.path / "cache");
  const SampleResult cold = run_plan(sample, plan, cfg, &cache);
  CHECK(cold.stats.stft_computed > 0);
  // The gsm pass re-requests the base subcarriers, so even a cold run hits.
  CHECK(cold.stats.cache_hits == 2);

  const SampleResult warm = run_plan(sample, plan, cfg, &cache);
  CHECK(warm.stats.stft_computed == 0);
  CHECK(warm.stats.cache_hits == cold.stats.stft_computed + cold.stats.cache_hits);

  const SampleResult uncached = run_plan(sample, plan, cfg);
  REQUIRE(warm.variants.size() == uncached.variants.size());
  CHECK(warm.base.specs[0].values == uncached.base.specs[0].values);
  for (std::size_t v = 0; v < warm.variants.size(); ++v) {
    REQUIRE(warm.variants[v].specs.size() == uncached.variants[v].specs.size());
    for (std::size_t i = 0; i < warm.variants[v].specs.size(); ++i) {
      CHECK(warm.variants[v].specs[i].values == uncached.variants[v].specs[i].values);
      CHECK(warm.variants[v].specs[i].bin_freqs_hz == uncached.variants[v].specs[i].bin_freqs_hz);
    }
  }
}

TEST_CASE("corrupt cache entries are invalidated and reported") {
  test::TempDir dir("cache-bad");
  const SampleRecord sample = synth_sample("sx", 4);
  PipelineConfig cfg = small_config();
  const AugPlan plan = build_plan(cfg, 5);

  CacheStore cache(dir.path / "cache");
  run_plan(sample, plan, cfg, &cache);

  // Truncate one cache file.
  std::filesystem::path victim;
  for (const auto& entry : std::filesystem::directory_iterator(dir.path / "cache")) {
    victim = entry.path();
    break;
  }
  std::filesystem::resize_file(victim, 10);

  CacheStore reopened(dir.path / "cache");
  CHECK_THROWS_AS(run_plan(sample, plan, cfg, &reopened), CacheError);
  CHECK(!std::filesystem::exists(victim));
  // Invalidation removed the bad entry; the next run recomputes it cleanly.
  const SampleResult again = run_plan(sample, plan, cfg, &reopened);
  CHECK(again.base.specs.size() == 2);
}

TEST_CASE("cache capacity is enforced by eviction") {
  test::TempDir dir("cache-cap");
  CacheStore cache(dir.path / "cache", 1);  // absurdly small cap
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i)
    cache.put("key" + std::to_string(i), test::random_spectrogram(rng, 4, 4));
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir.path / "cache"))
    files += entry.is_regular_file() ? 1 : 0;
  CHECK(files == 1);  // everything but the newest entry evicted
}

TEST_CASE("export writes a valid manifest with exact aratio accounting") {
  test::TempDir dir("export");
  std::vector<SampleRecord> samples;
  for (int i = 0; i < 3; ++i)
    samples.push_back(synth_sample("s" + std::to_string(i), 10 + static_cast<std::uint64_t>(i)));

  PipelineConfig cfg = small_config();
  cfg.plan = {2, 3, 1};
  const ExportResult result = export_dataset(samples, cfg, 77, dir.path / "out");

  CHECK(std::filesystem::exists(dir.path / "out" / "manifest.json"));
  CHECK(!std::filesystem::exists(dir.path / "out" / ".partial"));

  const DatasetManifest manifest = load_manifest(dir.path / "out" / "manifest.json");
  validate_manifest(manifest, dir.path / "out");

  std::map<std::string, std::set<std::string>> aug_descriptors;
  std::size_t base_count = 0;
  for (const ManifestEntry& e : manifest.entries) {
    if (e.kind == "base") {
      ++base_count;
      CHECK(parse_descriptor(e.descriptor) == AugDescriptor{FdaIssDesc{2}});
      REQUIRE(e.shape.size() == 3);
      CHECK(e.shape[0] == 2);  // k=2, one link
    } else {
      aug_descriptors[e.source_id].insert(e.descriptor);
      CHECK_NOTHROW(parse_descriptor(e.descriptor));
    }
  }
  CHECK(base_count == 3);
  for (const auto& [source, descs] : aug_descriptors) CHECK(descs.size() == 6);  // aratio

  SUBCASE("validation catches a removed tensor, naming its path") {
    std::filesystem::path victim;
    for (const ManifestEntry& e : manifest.entries)
      if (e.kind == "aug") victim = dir.path / "out" / e.path;
    std::filesystem::remove(victim);
    try {
      validate_manifest(manifest, dir.path / "out");
      FAIL("expected ValueError");
    } catch (const ValueError& e) {
      CHECK(std::string(e.what()).find(victim.filename().string()) != std::string::npos);
    }
  }
}

TEST_CASE("per_sample layout writes one file per spectrogram") {
  test::TempDir dir("export-ps");
  PipelineConfig cfg = small_config();
  cfg.fda.k = 3;
  cfg.plan = {0, 0, 0};
  cfg.out.layout = Layout::per_sample;

  const std::vector<SampleRecord> samples{synth_sample("solo", 2)};
  const ExportResult result = export_dataset(samples, cfg, 1, dir.path / "out");
  REQUIRE(result.manifest.entries.size() == 3);  // ISS-3 on one link, base only
  for (const ManifestEntry& e : result.manifest.entries) {
    CHECK(e.kind == "base");
    CHECK(e.shape.size() == 2);
    const Spectrogram spec = read_spectrogram(dir.path / "out" / e.path);
    CHECK(spec.cols() == cfg.out.t_out);
  }
}

TEST_CASE("channel_stack stacks k selected plus top mixed as the leading dim") {
  test::TempDir dir("export-cs");
  PipelineConfig cfg = small_config();
  cfg.fda.k = 6;
  cfg.fda.g_count = 3;
  cfg.fda.top = 3;
  cfg.plan = {0, 0, 1};

  const std::vector<SampleRecord> samples{synth_sample("stack", 6, 30.0, 12, 1)};
  const ExportResult result = export_dataset(samples, cfg, 3, dir.path / "out");

  bool saw_gsm = false;
  for (const ManifestEntry& e : result.manifest.entries) {
    if (e.kind != "aug") continue;
    saw_gsm = true;
    REQUIRE(e.shape.size() == 3);
    CHECK(e.shape[0] == 9);  // 6 selected + top-3 mixed
    const Spectrogram stacked = read_spectrogram(dir.path / "out" / e.path);
    CHECK(stacked.rows() == e.shape[0] * e.shape[1]);
  }
  CHECK(saw_gsm);
}

TEST_CASE("exports are deterministic and cache-transparent end to end") {
  test::TempDir dir("export-det");
  std::vector<SampleRecord> samples;
  for (int i = 0; i < 2; ++i)
    samples.push_back(synth_sample("d" + std::to_string(i), 20 + static_cast<std::uint64_t>(i),
                                   25.0, 6, 1, "room1"));

  PipelineConfig cfg = small_config();
  cfg.plan = {1, 2, 1};

  CacheStore cache(dir.path / "cache");
  const ExportResult cold = export_dataset(samples, cfg, 5, dir.path / "a", &cache);
  const ExportResult warm = export_dataset(samples, cfg, 5, dir.path / "b", &cache);
  const ExportResult none = export_dataset(samples, cfg, 5, dir.path / "c");

  CHECK(cold.stats.stft_computed > 0);
  CHECK(warm.stats.stft_computed == 0);

  for (const ManifestEntry& e : cold.manifest.entries) {
    CHECK(read_bytes(dir.path / "a" / e.path) == read_bytes(dir.path / "b" / e.path));
    CHECK(read_bytes(dir.path / "a" / e.path) == read_bytes(dir.path / "c" / e.path));
  }
  CHECK(read_bytes(dir.path / "a" / "manifest.json") ==
        read_bytes(dir.path / "b" / "manifest.json"));
  CHECK(read_bytes(dir.path / "a" / "manifest.json") ==
        read_bytes(dir.path / "c" / "manifest.json"));
}

TEST_CASE("parallel export equals single-threaded export") {
  test::TempDir dir("export-par");
  std::vector<SampleRecord> samples;
  for (int i = 0; i < 4; ++i)
    samples.push_back(synth_sample("p" + std::to_string(i), 40 + static_cast<std::uint64_t>(i)));

  PipelineConfig cfg = small_config();
  cfg.plan = {1, 2, 0};

  export_dataset(samples, cfg, 11, dir.path / "one", nullptr, 1);
  export_dataset(samples, cfg, 11, dir.path / "four", nullptr, 4);

  const DatasetManifest m1 = load_manifest(dir.path / "one" / "manifest.json");
  for (const ManifestEntry& e : m1.entries)
    CHECK(read_bytes(dir.path / "one" / e.path) == read_bytes(dir.path / "four" / e.path));
  CHECK(read_bytes(dir.path / "one" / "manifest.json") ==
        read_bytes(dir.path / "four" / "manifest.json"));
}

TEST_CASE("duplicate sample ids are rejected before any work") {
  test::TempDir dir("export-dup");
  std::vector<SampleRecord> samples{synth_sample("same", 1), synth_sample("same", 2)};
  CHECK_THROWS_AS(export_dataset(samples, small_config(), 0, dir.path / "out"), ArgumentError);
}

TEST_CASE("per-link grouping mixes each link separately") {
  const SampleRecord sample = synth_sample("pl", 8, 30.0, 6, 2);
  PipelineConfig cfg = small_config();
  cfg.fda.g_count = 2;
  cfg.fda.top = 2;
  cfg.fda.per_link_grouping = true;
  cfg.plan = {0, 0, 1};

  const SampleResult result = run_plan(sample, build_plan(cfg, 1), cfg);
  REQUIRE(result.variants.size() == 1);
  // base (k=2 x 2 links) + top-2 mixed per link.
  CHECK(result.variants[0].specs.size() == 4 + 2 * 2);
  CHECK(result.variants[0].specs.back().origin.channel.find("-l1") != std::string::npos);

  cfg.fda.per_link_grouping = false;
  const SampleResult joint = run_plan(sample, build_plan(cfg, 1), cfg);
  CHECK(joint.variants[0].specs.size() == 4 + 2);
}

TEST_CASE("a plan may carry an iss descriptor, reproducing the base set") {
  const SampleRecord sample = synth_sample("iss", 9);
  const PipelineConfig cfg = small_config();
  AugPlan plan;
  plan.descriptors.push_back(FdaIssDesc{cfg.fda.k});
  const SampleResult result = run_plan(sample, plan, cfg);
  REQUIRE(result.variants.size() == 1);
  REQUIRE(result.variants[0].specs.size() == result.base.specs.size());
  for (std::size_t i = 0; i < result.base.specs.size(); ++i)
    CHECK(result.variants[0].specs[i].values == result.base.specs[i].values);
}

TEST_CASE("a failed export leaves the partial marker and no manifest") {
  test::TempDir dir("export-fail");
  SampleRecord bad = synth_sample("bad", 1);
  bad.csi.data[0] = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  std::vector<SampleRecord> samples{synth_sample("good", 2), std::move(bad)};

  PipelineConfig cfg = small_config();
  CHECK_THROWS_AS(export_dataset(samples, cfg, 0, dir.path / "out", nullptr, 2), ArgumentError);
  CHECK(std::filesystem::exists(dir.path / "out" / ".partial"));
  CHECK(!std::filesystem::exists(dir.path / "out" / "manifest.json"));
}

TEST_CASE("config json round trips and overrides take effect") {
  PipelineConfig cfg = small_config();
  cfg.plan = {2, 6, 1};
  cfg.mda.fill = FillMode::zero;
  const nlohmann::ordered_json j = config_to_json(cfg);
  const PipelineConfig back = config_from_json(j);
  CHECK(config_to_json(back).dump() == j.dump());

  nlohmann::json raw = nlohmann::json::object();
  apply_override(raw, "stft.window_len", "64");
  apply_override(raw, "stft.n_dft", "128");
  apply_override(raw, "mda.fill", "zero");
  apply_override(raw, "plan.gsm", "2");
  const PipelineConfig overridden = config_from_json(raw);
  CHECK(overridden.stft.window_len == 64);
  CHECK(overridden.mda.fill == FillMode::zero);
  CHECK(overridden.plan.gsm == 2);

  nlohmann::json unknown = {{"stft", {{"window_size", 32}}}};
  CHECK_THROWS_AS(config_from_json(unknown), ConfigError);
  nlohmann::json bad_value = {{"mda", {{"erase_min_frac", 0.9}, {"erase_max_frac", 0.1}}}};
  CHECK_THROWS_AS(config_from_json(bad_value), ConfigError);
}

TEST_CASE("tta_vote follows majority, then summed confidence, then appearance") {
  CHECK(tta_vote({{"", "A", {}}, {"", "A", {}}, {"", "B", {}}}) == "A");
  CHECK(tta_vote({{"", "A", {0.9, 0.1}}, {"", "B", {0.2, 0.8}}}) == "A");
  CHECK(tta_vote({{"", "B", {0.2, 0.8}}, {"", "A", {0.9, 0.1}}}) == "A");
  CHECK(tta_vote({{"", "C", {}}, {"", "C", {}}, {"", "C", {}}}) == "C");
  // All-equal confidence falls back to first appearance.
  CHECK(tta_vote({{"", "B", {}}, {"", "A", {}}}) == "B");
  CHECK_THROWS_AS(tta_vote({}), ArgumentError);
  CHECK_THROWS_AS(tta_vote({{"", "A", {0.9}}, {"", "B", {0.2, 0.8}}}), ArgumentError);
}

TEST_CASE("prediction files parse bare labels and full rows") {
  test::TempDir dir("vote");
  {
    std::ofstream out(dir.path / "preds.txt");
    out << "A\nA\nB\n";
  }
  const auto bare = read_predictions(dir.path / "preds.txt");
  REQUIRE(bare.size() == 3);
  CHECK(bare[0].label == "A");
  CHECK(bare[0].sample_id.empty());
  CHECK(tta_vote(bare) == "A");

  {
    std::ofstream out(dir.path / "full.txt");
    out << "s1,A,0.9,0.1\ns1,B,0.2,0.8\ns2,C,1.0,0.0\n";
  }
  const auto full = read_predictions(dir.path / "full.txt");
  REQUIRE(full.size() == 3);
  CHECK(full[0].sample_id == "s1");
  CHECK(full[2].scores == std::vector<double>{1.0, 0.0});

  {
    std::ofstream out(dir.path / "bad.txt");
    out << "s1,A,not-a-number\n";
  }
  CHECK_THROWS_AS(read_predictions(dir.path / "bad.txt"), FormatError);
}
