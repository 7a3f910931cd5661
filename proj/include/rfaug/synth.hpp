#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <utility>
#include <vector>

#include "rfaug/types.hpp"

namespace rfaug {

struct DopplerSegment {
  double start_s = 0.0;
  double hz = 0.0;
};

struct ScenePath {
  std::complex<double> amplitude{1.0, 0.0};
  double delay_s = 0.0;
  std::vector<DopplerSegment> doppler;  // piecewise-constant; empty = static path
  double active_start_s = 0.0;
  double active_end_s = std::numeric_limits<double>::infinity();
};

struct SceneSpec {
  double duration_s = 1.0;
  double sample_rate_hz = 1000.0;
  std::vector<ScenePath> paths;
  double noise_sigma = 0.0;
  int f_count = 1;
  int l_count = 1;
  double subcarrier_spacing_hz = 312.5e3;
  double carrier_hz = 5.8e9;
  std::vector<double> sensitivity;  // per-subcarrier gain; empty = all ones

  void validate() const;
};

struct PathTruth {
  bool moving = false;
  std::vector<DopplerSegment> doppler;
  double active_start_s = 0.0;
  double active_end_s = 0.0;
};

struct GroundTruth {
  std::vector<PathTruth> paths;
  bool has_motion = false;
  double motion_start_s = 0.0;  // envelope across moving paths, clipped to the record
  double motion_end_s = 0.0;
};

// Sum of gated multipath components with per-subcarrier delay phase and
// per-path Doppler rotation, plus circularly symmetric Gaussian noise.
std::pair<CsiTensor, GroundTruth> generate(const SceneSpec& scene, std::uint64_t seed);

SceneSpec load_scene(const std::filesystem::path& path);
void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);

}  // namespace rfaug
