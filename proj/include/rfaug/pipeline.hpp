#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rfaug/cache.hpp"
#include "rfaug/config.hpp"
#include "rfaug/motion.hpp"
#include "rfaug/types.hpp"

namespace rfaug {

struct FdaIssDesc {
  int k = 6;
  bool operator==(const FdaIssDesc&) const = default;
};
struct TdaDesc {
  int window_len = 0;
  bool operator==(const TdaDesc&) const = default;
};
struct FdaGsmDesc {
  int g_count = 3;
  int top = 3;
  std::uint64_t seed = 0;
  bool operator==(const FdaGsmDesc&) const = default;
};
struct MdaEraseDesc {
  double erase_min_frac = 0.10;
  double erase_max_frac = 0.30;
  FillMode fill = FillMode::mean;
  std::uint64_t seed = 0;
  bool operator==(const MdaEraseDesc&) const = default;
};
struct MdaShiftDesc {
  std::uint64_t seed = 0;
  bool operator==(const MdaShiftDesc&) const = default;
};

using AugDescriptor = std::variant<FdaIssDesc, TdaDesc, FdaGsmDesc, MdaEraseDesc, MdaShiftDesc>;

// Canonical one-line form, e.g. "mre(min=0.1,max=0.3,fill=mean,seed=7)";
// parse(descriptor_text(d)) == d.
std::string descriptor_text(const AugDescriptor& desc);
AugDescriptor parse_descriptor(std::string_view text);

struct AugPlan {
  std::vector<AugDescriptor> descriptors;
  int aratio() const { return static_cast<int>(descriptors.size()); }
};

// Expands the configured variant counts into seeded descriptors, ordered
// TDA, MDA (alternating erase/shift), GSM.
AugPlan build_plan(const PipelineConfig& cfg, std::uint64_t seed);

struct VariantSet {
  std::string descriptor;
  std::vector<Spectrogram> specs;
};

struct PipelineStats {
  std::uint64_t stft_computed = 0;
  std::uint64_t cache_hits = 0;

  PipelineStats& operator+=(const PipelineStats& other) {
    stft_computed += other.stft_computed;
    cache_hits += other.cache_hits;
    return *this;
  }
};

struct SampleResult {
  VariantSet base;
  std::vector<VariantSet> variants;
  MotionProfile motion;
  PipelineStats stats;
};

// Base = ISS-K spectrograms on the default window; each descriptor appends
// one variant set. motion_threshold carries the environment-pooled median
// when available.
SampleResult run_plan(const SampleRecord& sample, const AugPlan& plan, const PipelineConfig& cfg,
                      CacheStore* cache = nullptr,
                      std::optional<double> motion_threshold = std::nullopt);

struct ManifestEntry {
  std::string sample_id;
  std::string source_id;
  std::string label;
  std::string env_tag;
  std::string kind;  // "base" or "aug"
  std::string descriptor;
  std::string path;  // relative to the manifest directory
  std::vector<std::size_t> shape;
};

struct DatasetManifest {
  Layout layout = Layout::channel_stack;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> entries;
};

nlohmann::ordered_json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j);
DatasetManifest load_manifest(const std::filesystem::path& path);

// Checks tensor paths exist, sample ids are unique, and every augmented
// entry names an exported base source. Throws ValueError naming the problem.
void validate_manifest(const DatasetManifest& manifest, const std::filesystem::path& root);

struct ExportResult {
  DatasetManifest manifest;
  PipelineStats stats;
};

// Writes RFS1 tensors plus manifest.json under out_dir. A ".partial" marker
// exists while the export is incomplete; the manifest is written last.
ExportResult export_dataset(const std::vector<SampleRecord>& samples, const PipelineConfig& cfg,
                            std::uint64_t seed, const std::filesystem::path& out_dir,
                            CacheStore* cache = nullptr, int jobs = 1);

struct Prediction {
  std::string sample_id;
  std::string label;
  std::vector<double> scores;
};

// Text lines "sample_id,label,score0,score1,..."; a line with a single field
// is a bare label.
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

// Majority label; ties resolved by total confidence (max score of each vote,
// 1 when scores are absent), then by first appearance.
std::string tta_vote(const std::vector<Prediction>& predictions);

}  // namespace rfaug
