#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "json.hpp"
#include "rfaug/mda.hpp"
#include "rfaug/stft.hpp"

namespace rfaug {

enum class Layout { channel_stack, per_sample };
Layout parse_layout(std::string_view name);
std::string_view to_string(Layout layout);

struct FdaConfig {
  int k = 6;
  int g_count = 3;
  int top = 3;
  bool per_link_grouping = false;
  bool normalized_mrc = false;
};

// Variant counts; mda alternates erase/shift starting with erase.
struct PlanCounts {
  int tda = 0;
  int mda = 0;
  int gsm = 0;
};

struct ExportConfig {
  std::size_t t_out = 256;
  Layout layout = Layout::channel_stack;
  std::string cache_dir;  // empty = caching disabled
  std::uint64_t cache_cap_bytes = 1ull << 30;
};

struct PipelineConfig {
  StftConfig stft;
  double ms_window_s = 0.2;  // sliding motion-statistic window; hop is tied to the stft hop
  WindowSet windows;
  FdaConfig fda;
  MdaConfig mda;
  PlanCounts plan;
  ExportConfig out;  // config file section "export"

  void validate() const;
};

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

// Sets a dotted key ("stft.window_len") to a JSON-parsed value; plain strings
// pass through unquoted.
void apply_override(nlohmann::json& j, std::string_view dotted_key, std::string_view value);

}  // namespace rfaug
