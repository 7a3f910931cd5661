#include "rfaug/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "rfaug/errors.hpp"
#include "rfaug/fda.hpp"
#include "rfaug/io.hpp"
#include "rfaug/mda.hpp"
#include "rfaug/rng.hpp"
#include "rfaug/stft.hpp"

namespace rfaug {
namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw FormatError("unparsable number \"" + std::string(text) + "\"");
  return v;
}

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw FormatError("unparsable integer \"" + std::string(text) + "\"");
  return v;
}

std::map<std::string, std::string, std::less<>> parse_kv(std::string_view body,
                                                         std::string_view whole) {
  std::map<std::string, std::string, std::less<>> kv;
  while (!body.empty()) {
    const std::size_t comma = body.find(',');
    const std::string_view item = body.substr(0, comma);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos)
      throw FormatError("malformed descriptor \"" + std::string(whole) + "\"");
    kv.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return kv;
}

std::string content_hash_hex(const CsiTensor& csi) {
  const std::string bytes = csi_to_bytes(csi);
  std::uint64_t h1 = 0xcbf29ce484222325ULL;
  std::uint64_t h2 = 0x84222325cbf29ce4ULL;
  for (unsigned char c : bytes) {
    h1 = (h1 ^ c) * 0x100000001b3ULL;
    h2 = (h2 ^ c) * 0x100000001b3ULL;
  }
  char buf[34];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(h1),
                static_cast<unsigned long long>(h2));
  return buf;
}

std::string stft_params_text(const StftConfig& cfg, double rate, std::size_t t_out, int f, int l) {
  std::ostringstream ss;
  ss << "w=" << cfg.window_len << ";hop=" << cfg.hop << ";ndft=" << cfg.n_dft
     << ";fn=" << to_string(cfg.window_fn) << ";mode=" << to_string(cfg.input_mode)
     << ";crop=" << format_double(cfg.crop_hz) << ";fold=" << (cfg.fold_longer_windows ? 1 : 0)
     << ";rate=" << format_double(rate) << ";tout=" << t_out << ";f=" << f << ";l=" << l;
  return ss.str();
}

std::vector<std::complex<double>> subcarrier_series(const CsiTensor& csi, std::size_t f,
                                                    std::size_t l) {
  std::vector<std::complex<double>> out(csi.t_count);
  for (std::size_t t = 0; t < csi.t_count; ++t) out[t] = csi.at(t, f, l);
  return out;
}

// Motion intervals live on the pre-align hop grid; rescale them onto the
// aligned column grid (identity when padding).
std::vector<Interval> map_intervals(const std::vector<Interval>& intervals, std::size_t n_pre,
                                    std::size_t t_out) {
  if (n_pre <= t_out) return intervals;
  std::vector<Interval> out;
  for (const Interval& iv : intervals) {
    std::size_t b = iv.begin * t_out / n_pre;
    std::size_t e = (iv.end * t_out + n_pre - 1) / n_pre;
    e = std::min(e, t_out);
    if (b >= e) continue;
    if (!out.empty() && b <= out.back().end)
      out.back().end = std::max(out.back().end, e);
    else
      out.push_back({b, e});
  }
  return out;
}

// Clamped-to-[0,1] sliding motion statistics of one subcarrier-link, padded
// or resampled onto the aligned time axis.
std::vector<double> aligned_weights(const MsMatrix& sliding, std::size_t row, std::size_t t_out) {
  std::vector<double> w = sliding.row(row);
  for (double& v : w) v = std::clamp(v, 0.0, 1.0);
  if (w.size() == t_out) return w;
  if (w.size() < t_out) {
    w.resize(t_out, 0.0);
    return w;
  }
  return resample_linear(w, t_out);
}

struct SampleContext {
  const SampleRecord& sample;
  const PipelineConfig& cfg;
  CacheStore* cache;
  std::string source_hash;
  PipelineStats stats;

  Spectrogram spectrogram_for(int f, int l, int window_len) {
    StftConfig stft_cfg = cfg.stft;
    stft_cfg.window_len = window_len;
    const double rate = sample.csi.sample_rate_hz;
    const std::string params = stft_params_text(stft_cfg, rate, cfg.out.t_out, f, l);
    const std::string key = cache_key(source_hash, "stft", params);

    Spectrogram spec;
    bool computed = false;
    if (cache != nullptr) {
      if (auto hit = cache->get(key)) {
        spec = std::move(*hit);
        ++stats.cache_hits;
      }
    }
    if (spec.values.empty()) {
      const auto series =
          subcarrier_series(sample.csi, static_cast<std::size_t>(f), static_cast<std::size_t>(l));
      spec = align(stft_spectrogram(series, stft_cfg, rate), cfg.out.t_out);
      ++stats.stft_computed;
      computed = true;
    }
    if (cache != nullptr && computed) cache->put(key, spec);

    spec.origin.source_id = sample.id;
    spec.origin.channel = "sc" + std::to_string(f) + "-l" + std::to_string(l);
    spec.origin.link = l;
    spec.origin.window_len = window_len;
    return spec;
  }
};

VariantSet gsm_variant(SampleContext& ctx, const FdaGsmDesc& desc, const MotionProfile& motion,
                       const VariantSet& base) {
  const CsiTensor& csi = ctx.sample.csi;
  const PipelineConfig& cfg = ctx.cfg;
  const std::size_t t_out = cfg.out.t_out;

  VariantSet out;
  out.descriptor = descriptor_text(AugDescriptor{desc});
  out.specs = base.specs;

  std::vector<Spectrogram> all;
  all.reserve(static_cast<std::size_t>(csi.f_count) * csi.l_count);
  for (std::size_t f = 0; f < csi.f_count; ++f)
    for (std::size_t l = 0; l < csi.l_count; ++l)
      all.push_back(ctx.spectrogram_for(static_cast<int>(f), static_cast<int>(l),
                                        cfg.windows.default_len));

  auto mix_groups = [&](const std::vector<std::size_t>& subset, std::uint64_t seed,
                        const std::string& channel_suffix) {
    std::vector<Spectrogram> specs;
    std::vector<double> ms;
    specs.reserve(subset.size());
    for (std::size_t idx : subset) {
      specs.push_back(all[idx]);
      ms.push_back(motion.ms_global[idx]);
    }
    const GroupingResult grouping = kmeans_group(specs, ms, desc.g_count, seed);
    const auto groups = grouping.members();
    for (int gid : top_g_groups(grouping, desc.top)) {
      std::vector<const Spectrogram*> group;
      std::vector<std::vector<double>> weights;
      for (int member : groups[static_cast<std::size_t>(gid)]) {
        const std::size_t idx = subset[static_cast<std::size_t>(member)];
        group.push_back(&all[idx]);
        weights.push_back(aligned_weights(motion.ms_sliding, idx, t_out));
      }
      Spectrogram mixed = mrc_combine(group, weights, cfg.fda.normalized_mrc);
      mixed.origin.source_id = ctx.sample.id;
      mixed.origin.channel = "grp" + std::to_string(gid) + channel_suffix;
      mixed.origin.window_len = cfg.windows.default_len;
      out.specs.push_back(std::move(mixed));
    }
  };

  if (cfg.fda.per_link_grouping) {
    for (std::size_t l = 0; l < csi.l_count; ++l) {
      std::vector<std::size_t> subset;
      for (std::size_t f = 0; f < csi.f_count; ++f) subset.push_back(f * csi.l_count + l);
      mix_groups(subset, mix_seed(desc.seed, l), "-l" + std::to_string(l));
    }
  } else {
    std::vector<std::size_t> subset(all.size());
    std::iota(subset.begin(), subset.end(), 0);
    mix_groups(subset, desc.seed, "");
  }
  return out;
}

}  // namespace

std::string descriptor_text(const AugDescriptor& desc) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, FdaIssDesc>) {
          return "iss(k=" + std::to_string(d.k) + ")";
        } else if constexpr (std::is_same_v<T, TdaDesc>) {
          return "tda(window=" + std::to_string(d.window_len) + ")";
        } else if constexpr (std::is_same_v<T, FdaGsmDesc>) {
          return "gsm(g=" + std::to_string(d.g_count) + ",top=" + std::to_string(d.top) +
                 ",seed=" + std::to_string(d.seed) + ")";
        } else if constexpr (std::is_same_v<T, MdaEraseDesc>) {
          return "mre(min=" + format_double(d.erase_min_frac) +
                 ",max=" + format_double(d.erase_max_frac) +
                 ",fill=" + std::string(to_string(d.fill)) + ",seed=" + std::to_string(d.seed) +
                 ")";
        } else {
          return "mrs(seed=" + std::to_string(d.seed) + ")";
        }
      },
      desc);
}

AugDescriptor parse_descriptor(std::string_view text) {
  const std::size_t open = text.find('(');
  if (open == std::string_view::npos || text.empty() || text.back() != ')')
    throw FormatError("malformed descriptor \"" + std::string(text) + "\"");
  const std::string_view name = text.substr(0, open);
  const auto kv = parse_kv(text.substr(open + 1, text.size() - open - 2), text);
  const auto need = [&](std::string_view key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end())
      throw FormatError("descriptor \"" + std::string(text) + "\" lacks key \"" +
                        std::string(key) + "\"");
    return it->second;
  };

  if (name == "iss") return FdaIssDesc{static_cast<int>(parse_u64(need("k")))};
  if (name == "tda") return TdaDesc{static_cast<int>(parse_u64(need("window")))};
  if (name == "gsm")
    return FdaGsmDesc{static_cast<int>(parse_u64(need("g"))),
                      static_cast<int>(parse_u64(need("top"))), parse_u64(need("seed"))};
  if (name == "mre")
    return MdaEraseDesc{parse_double(need("min")), parse_double(need("max")),
                        parse_fill_mode(need("fill")), parse_u64(need("seed"))};
  if (name == "mrs") return MdaShiftDesc{parse_u64(need("seed"))};
  throw FormatError("unknown descriptor \"" + std::string(text) + "\"");
}

AugPlan build_plan(const PipelineConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  AugPlan plan;
  std::uint64_t state = seed;

  for (int i = 0; i < cfg.plan.tda; ++i)
    plan.descriptors.push_back(
        TdaDesc{i == 0 ? cfg.windows.lengthened_len : cfg.windows.shortened_len});
  for (int i = 0; i < cfg.plan.mda; ++i) {
    const std::uint64_t s = splitmix64(state);
    if (i % 2 == 0)
      plan.descriptors.push_back(
          MdaEraseDesc{cfg.mda.erase_min_frac, cfg.mda.erase_max_frac, cfg.mda.fill, s});
    else
      plan.descriptors.push_back(MdaShiftDesc{s});
  }
  for (int i = 0; i < cfg.plan.gsm; ++i)
    plan.descriptors.push_back(FdaGsmDesc{cfg.fda.g_count, cfg.fda.top, splitmix64(state)});
  return plan;
}

SampleResult run_plan(const SampleRecord& sample, const AugPlan& plan, const PipelineConfig& cfg,
                      CacheStore* cache, std::optional<double> motion_threshold) {
  cfg.validate();
  sample.csi.validate();

  const CsiTensor& csi = sample.csi;
  const double rate = csi.sample_rate_hz;
  const double hop_s = static_cast<double>(cfg.stft.hop) / rate;

  SampleResult result;
  result.motion = motion_profile(csi, cfg.ms_window_s, hop_s, motion_threshold);

  const std::size_t n_pre = result.motion.ms_sliding.cols;
  const std::vector<Interval> aligned_intervals =
      map_intervals(result.motion.intervals, n_pre, cfg.out.t_out);

  SampleContext ctx{sample, cfg, cache, content_hash_hex(csi), {}};

  const SelectionResult selection = select_iss(
      result.motion.ms_global, static_cast<int>(csi.f_count), static_cast<int>(csi.l_count),
      cfg.fda.k);

  result.base.descriptor = descriptor_text(FdaIssDesc{cfg.fda.k});
  for (const auto& [f, l] : selection.indices)
    result.base.specs.push_back(ctx.spectrogram_for(f, l, cfg.windows.default_len));

  const std::uint64_t sample_hash = fnv1a64(sample.id);
  for (const AugDescriptor& desc : plan.descriptors) {
    VariantSet set = std::visit(
        [&](const auto& d) -> VariantSet {
          using T = std::decay_t<decltype(d)>;
          VariantSet v;
          v.descriptor = descriptor_text(AugDescriptor{d});
          if constexpr (std::is_same_v<T, FdaIssDesc>) {
            v.specs = result.base.specs;
          } else if constexpr (std::is_same_v<T, TdaDesc>) {
            for (const auto& [f, l] : selection.indices)
              v.specs.push_back(ctx.spectrogram_for(f, l, d.window_len));
          } else if constexpr (std::is_same_v<T, FdaGsmDesc>) {
            v = gsm_variant(ctx, d, result.motion, result.base);
          } else if constexpr (std::is_same_v<T, MdaEraseDesc>) {
            const MdaConfig mda_cfg{d.erase_min_frac, d.erase_max_frac, d.fill, d.seed};
            for (const Spectrogram& spec : result.base.specs) {
              std::mt19937_64 rng(mix_seed(d.seed, sample_hash));
              v.specs.push_back(mre(spec, aligned_intervals, mda_cfg, rng));
            }
          } else {
            for (const Spectrogram& spec : result.base.specs) {
              std::mt19937_64 rng(mix_seed(d.seed, sample_hash));
              v.specs.push_back(mrs(spec, aligned_intervals, rng).spec);
            }
          }
          return v;
        },
        desc);
    result.variants.push_back(std::move(set));
  }

  result.stats = ctx.stats;
  return result;
}

nlohmann::ordered_json manifest_to_json(const DatasetManifest& manifest) {
  nlohmann::ordered_json j;
  j["layout"] = std::string(to_string(manifest.layout));
  j["seed"] = manifest.seed;
  j["entries"] = nlohmann::ordered_json::array();
  for (const ManifestEntry& e : manifest.entries) {
    nlohmann::ordered_json ej;
    ej["sample_id"] = e.sample_id;
    ej["source_id"] = e.source_id;
    ej["label"] = e.label;
    ej["env_tag"] = e.env_tag;
    ej["kind"] = e.kind;
    ej["descriptor"] = e.descriptor;
    ej["path"] = e.path;
    ej["shape"] = e.shape;
    j["entries"].push_back(std::move(ej));
  }
  return j;
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest manifest;
  try {
    manifest.layout = parse_layout(j.at("layout").get<std::string>());
    manifest.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& ej : j.at("entries")) {
      ManifestEntry e;
      e.sample_id = ej.at("sample_id").get<std::string>();
      e.source_id = ej.at("source_id").get<std::string>();
      e.label = ej.value("label", "");
      e.env_tag = ej.value("env_tag", "");
      e.kind = ej.at("kind").get<std::string>();
      e.descriptor = ej.at("descriptor").get<std::string>();
      e.path = ej.at("path").get<std::string>();
      e.shape = ej.at("shape").get<std::vector<std::size_t>>();
      manifest.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest json invalid: " + std::string(e.what()));
  }
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest json unparsable: " + std::string(e.what()));
  }
  return manifest_from_json(j);
}

void validate_manifest(const DatasetManifest& manifest, const std::filesystem::path& root) {
  std::set<std::string> ids;
  std::set<std::string> base_sources;
  for (const ManifestEntry& e : manifest.entries) {
    if (!ids.insert(e.sample_id).second)
      throw ValueError("duplicate sample id \"" + e.sample_id + "\"");
    if (e.kind == "base") base_sources.insert(e.source_id);
  }
  for (const ManifestEntry& e : manifest.entries) {
    if (e.kind != "base" && !base_sources.contains(e.source_id))
      throw ValueError("augmented entry \"" + e.sample_id + "\" names source \"" + e.source_id +
                       "\" with no base entry");
    const std::filesystem::path p = root / e.path;
    if (!std::filesystem::exists(p)) throw ValueError("missing tensor file: " + p.string());
  }
}

namespace {

std::string sanitize_id(std::string_view id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_');
  return out;
}

Spectrogram stack_channels(const std::vector<Spectrogram>& specs) {
  Spectrogram out;
  out.bin_times_s = specs[0].bin_times_s;
  for (const Spectrogram& s : specs) {
    out.bin_freqs_hz.insert(out.bin_freqs_hz.end(), s.bin_freqs_hz.begin(), s.bin_freqs_hz.end());
    out.values.insert(out.values.end(), s.values.begin(), s.values.end());
  }
  return out;
}

struct SampleFiles {
  std::vector<ManifestEntry> entries;
  PipelineStats stats;
};

SampleFiles write_sample(const SampleRecord& sample, std::size_t index, const AugPlan& plan,
                         const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                         CacheStore* cache, std::optional<double> threshold) {
  const SampleResult result = run_plan(sample, plan, cfg, cache, threshold);

  SampleFiles files;
  files.stats = result.stats;
  char prefix[16];
  std::snprintf(prefix, sizeof(prefix), "s%05zu", index);
  const std::string stem = std::string(prefix) + "__" + sanitize_id(sample.id);

  const auto emit_set = [&](const VariantSet& set, const std::string& tag, const std::string& kind) {
    if (cfg.out.layout == Layout::channel_stack) {
      const Spectrogram stacked = stack_channels(set.specs);
      const std::string name = stem + "__" + tag + ".rfs";
      write_spectrogram(stacked, out_dir / name);
      ManifestEntry e;
      e.sample_id = sample.id + "/" + tag;
      e.source_id = sample.id;
      e.label = sample.label;
      e.env_tag = sample.env_tag;
      e.kind = kind;
      e.descriptor = set.descriptor;
      e.path = name;
      e.shape = {set.specs.size(), set.specs[0].rows(), set.specs[0].cols()};
      files.entries.push_back(std::move(e));
    } else {
      for (std::size_t c = 0; c < set.specs.size(); ++c) {
        char ch[16];
        std::snprintf(ch, sizeof(ch), "c%03zu", c);
        const std::string name = stem + "__" + tag + "__" + ch + ".rfs";
        write_spectrogram(set.specs[c], out_dir / name);
        ManifestEntry e;
        e.sample_id = sample.id + "/" + tag + "/" + ch;
        e.source_id = sample.id;
        e.label = sample.label;
        e.env_tag = sample.env_tag;
        e.kind = kind;
        e.descriptor = set.descriptor;
        e.path = name;
        e.shape = {set.specs[c].rows(), set.specs[c].cols()};
        files.entries.push_back(std::move(e));
      }
    }
  };

  emit_set(result.base, "base", "base");
  for (std::size_t v = 0; v < result.variants.size(); ++v)
    emit_set(result.variants[v], "aug" + std::to_string(v), "aug");
  return files;
}

}  // namespace

ExportResult export_dataset(const std::vector<SampleRecord>& samples, const PipelineConfig& cfg,
                            std::uint64_t seed, const std::filesystem::path& out_dir,
                            CacheStore* cache, int jobs) {
  cfg.validate();
  if (jobs < 1) throw ArgumentError("jobs must be >= 1");
  {
    std::set<std::string> ids;
    for (const SampleRecord& s : samples)
      if (!ids.insert(s.id).second) throw ArgumentError("duplicate sample id \"" + s.id + "\"");
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());
  const std::filesystem::path marker = out_dir / ".partial";
  {
    std::ofstream m(marker);
    if (!m) throw IoError("cannot create partial marker in " + out_dir.string());
  }
  std::filesystem::remove(out_dir / "manifest.json", ec);

  const AugPlan plan = build_plan(cfg, seed);

  // Environment-pooled motion thresholds: median over the aggregate sliding
  // motion statistics of every sample sharing an env_tag.
  std::map<std::string, double> env_threshold;
  {
    std::map<std::string, std::vector<double>> pooled;
    for (const SampleRecord& s : samples) {
      if (s.env_tag.empty()) continue;
      s.csi.validate();
      const double hop_s = static_cast<double>(cfg.stft.hop) / s.csi.sample_rate_hz;
      const std::vector<double> aggregate =
          aggregate_ms(sliding_ms(s.csi, cfg.ms_window_s, hop_s));
      auto& bucket = pooled[s.env_tag];
      bucket.insert(bucket.end(), aggregate.begin(), aggregate.end());
    }
    for (const auto& [env, values] : pooled) env_threshold[env] = quartile_threshold(values);
  }

  std::vector<SampleFiles> per_sample(samples.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= samples.size()) return;
      {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (failure) return;
      }
      try {
        std::optional<double> threshold;
        if (const auto it = env_threshold.find(samples[i].env_tag); it != env_threshold.end())
          threshold = it->second;
        per_sample[i] = write_sample(samples[i], i, plan, cfg, out_dir, cache, threshold);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExportResult result;
  result.manifest.layout = cfg.out.layout;
  result.manifest.seed = seed;
  for (SampleFiles& files : per_sample) {
    result.stats += files.stats;
    for (ManifestEntry& e : files.entries) result.manifest.entries.push_back(std::move(e));
  }

  const std::filesystem::path tmp = out_dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot open " + tmp.string());
    out << manifest_to_json(result.manifest).dump(2) << "\n";
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, out_dir / "manifest.json", ec);
  if (ec) throw IoError("cannot publish manifest.json");
  std::filesystem::remove(marker, ec);
  return result;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<Prediction> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }

    Prediction p;
    if (fields.size() == 1) {
      p.label = fields[0];
    } else {
      p.sample_id = fields[0];
      p.label = fields[1];
      for (std::size_t i = 2; i < fields.size(); ++i) {
        try {
          p.scores.push_back(std::stod(fields[i]));
        } catch (const std::exception&) {
          throw FormatError("unparsable score \"" + fields[i] + "\" in " + path.string());
        }
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string tta_vote(const std::vector<Prediction>& predictions) {
  if (predictions.empty()) throw ArgumentError("vote over an empty prediction list");

  std::size_t score_len = 0;
  for (const Prediction& p : predictions) {
    if (p.scores.empty()) continue;
    if (score_len == 0)
      score_len = p.scores.size();
    else if (p.scores.size() != score_len)
      throw ArgumentError("prediction score vectors differ in length");
  }

  struct Tally {
    std::size_t votes = 0;
    double confidence = 0.0;
    std::size_t first_seen = 0;
  };
  std::map<std::string, Tally> tallies;
  std::size_t order = 0;
  for (const Prediction& p : predictions) {
    auto [it, inserted] = tallies.try_emplace(p.label);
    if (inserted) it->second.first_seen = order++;
    it->second.votes += 1;
    it->second.confidence +=
        p.scores.empty() ? 1.0 : *std::max_element(p.scores.begin(), p.scores.end());
  }

  const Tally* best = nullptr;
  const std::string* best_label = nullptr;
  for (const auto& [label, tally] : tallies) {
    if (best == nullptr || tally.votes > best->votes ||
        (tally.votes == best->votes && tally.confidence > best->confidence) ||
        (tally.votes == best->votes && tally.confidence == best->confidence &&
         tally.first_seen < best->first_seen)) {
      best = &tally;
      best_label = &label;
    }
  }
  return *best_label;
}

}  // namespace rfaug
