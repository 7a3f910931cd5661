#include "rfaug/motion.hpp"

#include <algorithm>
#include <cmath>

#include "rfaug/errors.hpp"

namespace rfaug {

double motion_statistic(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw ArgumentError("motion statistic needs at least 2 samples");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);

  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double d = x[t] - mean;
    den += d * d;
    if (t + 1 < n) num += d * (x[t + 1] - mean);
  }
  return den == 0.0 ? 0.0 : num / den;
}

std::vector<double> power_series(const CsiTensor& csi, std::size_t f, std::size_t l) {
  std::vector<double> out(csi.t_count);
  for (std::size_t t = 0; t < csi.t_count; ++t) out[t] = std::norm(csi.at(t, f, l));
  return out;
}

std::vector<double> ms_global(const CsiTensor& csi) {
  std::vector<double> out(static_cast<std::size_t>(csi.f_count) * csi.l_count);
  for (std::size_t f = 0; f < csi.f_count; ++f)
    for (std::size_t l = 0; l < csi.l_count; ++l)
      out[f * csi.l_count + l] = motion_statistic(power_series(csi, f, l));
  return out;
}

MsMatrix sliding_ms(const CsiTensor& csi, double window_s, double hop_s) {
  const double rate = csi.sample_rate_hz;
  const auto window = static_cast<std::size_t>(std::llround(window_s * rate));
  const auto hop = static_cast<std::size_t>(std::llround(hop_s * rate));
  if (window < 2) throw ArgumentError("sliding ms window must cover at least 2 samples");
  if (hop < 1) throw ArgumentError("sliding ms hop must be positive");

  const std::size_t t_len = csi.t_count;
  const std::size_t w_eff = std::min(window, t_len);
  const std::size_t n_cols = frame_count(t_len, hop);

  MsMatrix out;
  out.rows = static_cast<std::size_t>(csi.f_count) * csi.l_count;
  out.cols = n_cols;
  out.values.resize(out.rows * out.cols);

  for (std::size_t f = 0; f < csi.f_count; ++f) {
    for (std::size_t l = 0; l < csi.l_count; ++l) {
      const std::vector<double> power = power_series(csi, f, l);
      const std::size_t r = f * csi.l_count + l;
      for (std::size_t n = 0; n < n_cols; ++n) {
        const std::size_t start = std::min(n * hop, t_len - w_eff);
        out.at(r, n) = motion_statistic({power.data() + start, w_eff});
      }
    }
  }
  return out;
}

std::vector<Interval> detect_motion(std::span<const double> ms_series, double threshold) {
  std::vector<Interval> out;
  std::size_t i = 0;
  while (i < ms_series.size()) {
    if (ms_series[i] > threshold) {
      std::size_t j = i + 1;
      while (j < ms_series.size() && ms_series[j] > threshold) ++j;
      out.push_back({i, j});
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

double quartile_threshold(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("quartile of an empty collection");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = 0.5 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> aggregate_ms(const MsMatrix& sliding) {
  std::vector<double> out(sliding.cols, 0.0);
  for (std::size_t r = 0; r < sliding.rows; ++r)
    for (std::size_t c = 0; c < sliding.cols; ++c) out[c] += sliding.at(r, c);
  for (double& v : out) v /= static_cast<double>(sliding.rows);
  return out;
}

MotionProfile motion_profile(const CsiTensor& csi, double window_s, double hop_s,
                             std::optional<double> threshold_override) {
  MotionProfile profile;
  profile.ms_global = ms_global(csi);
  profile.ms_sliding = sliding_ms(csi, window_s, hop_s);
  const std::vector<double> aggregate = aggregate_ms(profile.ms_sliding);
  profile.threshold =
      threshold_override ? *threshold_override : quartile_threshold(aggregate);
  profile.intervals = detect_motion(aggregate, profile.threshold);
  return profile;
}

}  // namespace rfaug
