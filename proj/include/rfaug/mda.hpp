#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "rfaug/types.hpp"

namespace rfaug {

enum class FillMode { mean, zero };
FillMode parse_fill_mode(std::string_view name);
std::string_view to_string(FillMode fill);

struct MdaConfig {
  double erase_min_frac = 0.10;
  double erase_max_frac = 0.30;
  FillMode fill = FillMode::mean;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Random-window erasing restricted to detected motion: a window of width
// uniform in [erase_min_frac*N, erase_max_frac*N] is drawn, and every column
// of window-intersect-motion is set to the fill value (per-spectrogram mean
// by default). An empty intersection returns the input unchanged.
Spectrogram mre(const Spectrogram& spec, const std::vector<Interval>& intervals,
                const MdaConfig& cfg, std::mt19937_64& rng);

struct MrsResult {
  Spectrogram spec;
  std::int64_t shift = 0;  // columns, positive = rightward
};

// Circular time shift with tau drawn uniformly from [-T_start, N - T_end]
// (envelope of the given intervals), so motion columns never wrap. Without
// intervals tau falls back to [-N/4, N/4].
MrsResult mrs(const Spectrogram& spec, const std::vector<Interval>& intervals,
              std::mt19937_64& rng);

}  // namespace rfaug
