#include "rfaug/mda.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfaug/errors.hpp"
#include "rfaug/rng.hpp"

namespace rfaug {

FillMode parse_fill_mode(std::string_view name) {
  if (name == "mean") return FillMode::mean;
  if (name == "zero") return FillMode::zero;
  throw ConfigError("unknown fill mode \"" + std::string(name) + "\"");
}

std::string_view to_string(FillMode fill) { return fill == FillMode::mean ? "mean" : "zero"; }

void MdaConfig::validate() const {
  if (!(erase_min_frac > 0.0) || erase_min_frac > erase_max_frac || erase_max_frac > 1.0)
    throw ConfigError("erase fractions must satisfy 0 < min <= max <= 1");
}

Spectrogram mre(const Spectrogram& spec, const std::vector<Interval>& intervals,
                const MdaConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const auto n = static_cast<std::int64_t>(spec.cols());

  const std::int64_t lo = std::max<std::int64_t>(
      1, std::llround(cfg.erase_min_frac * static_cast<double>(n)));
  const std::int64_t hi = std::min<std::int64_t>(
      n, std::max<std::int64_t>(lo, std::llround(cfg.erase_max_frac * static_cast<double>(n))));
  const std::int64_t width = uniform_int(rng, lo, hi);
  const std::int64_t start = uniform_int(rng, 0, n - width);

  std::vector<bool> masked(static_cast<std::size_t>(n), false);
  bool any = false;
  for (const Interval& iv : intervals) {
    const auto begin = std::max<std::int64_t>(start, static_cast<std::int64_t>(iv.begin));
    const auto end =
        std::min<std::int64_t>(start + width, std::min<std::int64_t>(n, static_cast<std::int64_t>(iv.end)));
    for (std::int64_t c = begin; c < end; ++c) {
      masked[static_cast<std::size_t>(c)] = true;
      any = true;
    }
  }
  if (!any) return spec;

  Spectrogram out = spec;
  double fill = 0.0;
  if (cfg.fill == FillMode::mean) {
    for (double v : spec.values) fill += v;
    fill /= static_cast<double>(spec.values.size());
  }
  for (std::size_t b = 0; b < out.rows(); ++b)
    for (std::size_t c = 0; c < out.cols(); ++c)
      if (masked[c]) out.at(b, c) = fill;
  return out;
}

MrsResult mrs(const Spectrogram& spec, const std::vector<Interval>& intervals,
              std::mt19937_64& rng) {
  const auto n = static_cast<std::int64_t>(spec.cols());

  std::int64_t lo = 0, hi = 0;
  if (intervals.empty()) {
    lo = -(n / 4);
    hi = n / 4;
  } else {
    lo = -static_cast<std::int64_t>(intervals.front().begin);
    hi = n - static_cast<std::int64_t>(intervals.back().end);
  }
  const std::int64_t tau = uniform_int(rng, lo, hi);

  MrsResult result;
  result.shift = tau;
  result.spec = spec;
  if (tau == 0) return result;

  for (std::size_t b = 0; b < spec.rows(); ++b) {
    for (std::int64_t c = 0; c < n; ++c) {
      const std::int64_t dest = ((c + tau) % n + n) % n;
      result.spec.at(b, static_cast<std::size_t>(dest)) = spec.at(b, static_cast<std::size_t>(c));
    }
  }
  return result;
}

}  // namespace rfaug
