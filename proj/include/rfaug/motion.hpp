#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rfaug/types.hpp"

namespace rfaug {

// Row-major (F*L) x N matrix of sliding motion statistics, row index f*L + l.
struct MsMatrix {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  std::vector<double> row(std::size_t r) const {
    return {values.begin() + static_cast<std::ptrdiff_t>(r * cols),
            values.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)};
  }
};

struct MotionProfile {
  std::vector<double> ms_global;  // length F*L
  MsMatrix ms_sliding;
  std::vector<Interval> intervals;
  double threshold = 0.0;
};

// Lag-1 autocorrelation coefficient of a series (intended input: the power
// series |H(t,f,l)|^2 of one subcarrier-link). Returns 0 for constant input.
double motion_statistic(std::span<const double> x);

std::vector<double> power_series(const CsiTensor& csi, std::size_t f, std::size_t l);

// Whole-series motion statistic per subcarrier-link.
std::vector<double> ms_global(const CsiTensor& csi);

// Window n starts at n*hop (shifted left at the tail so the window always
// fits); column count matches the spectrogram produced with the same hop.
MsMatrix sliding_ms(const CsiTensor& csi, double window_s, double hop_s);

// Maximal runs of bins with ms > threshold, as disjoint sorted intervals.
std::vector<Interval> detect_motion(std::span<const double> ms_series, double threshold);

// Interpolated median (q = 0.5) of the pooled measurements.
double quartile_threshold(std::span<const double> values);

// Column mean across subcarrier-links; the series motion detection runs on.
std::vector<double> aggregate_ms(const MsMatrix& sliding);

// threshold_override carries the environment-pooled median; without it the
// median of this sample's aggregate series is used.
MotionProfile motion_profile(const CsiTensor& csi, double window_s, double hop_s,
                             std::optional<double> threshold_override = std::nullopt);

}  // namespace rfaug
