#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rfaug/errors.hpp"

namespace rfaug {

// Number of frames a hopped analysis produces over len samples (frame n
// starts at n*hop; every start lies inside the series).
inline std::size_t frame_count(std::size_t len, std::size_t hop) {
  return len == 0 ? 0 : (len + hop - 1) / hop;
}

// Complex channel measurements, flat index ((t * F) + f) * L + l.
struct CsiTensor {
  std::vector<std::complex<double>> data;
  double sample_rate_hz = 0.0;
  std::uint32_t t_count = 0;
  std::uint32_t f_count = 0;
  std::uint32_t l_count = 0;
  std::string env_tag;
  std::string label;

  std::size_t flat(std::size_t t, std::size_t f, std::size_t l) const {
    return (t * f_count + f) * l_count + l;
  }
  std::complex<double>& at(std::size_t t, std::size_t f, std::size_t l) {
    return data[flat(t, f, l)];
  }
  const std::complex<double>& at(std::size_t t, std::size_t f, std::size_t l) const {
    return data[flat(t, f, l)];
  }

  void validate() const {
    if (t_count < 2 || f_count < 1 || l_count < 1)
      throw ArgumentError("csi tensor dimensions require T >= 2, F >= 1, L >= 1");
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
      throw ArgumentError("csi sample rate must be positive and finite");
    const std::size_t expected =
        static_cast<std::size_t>(t_count) * f_count * l_count;
    if (data.size() != expected)
      throw ArgumentError("csi data length does not equal T*F*L");
    for (std::size_t i = 0; i < data.size(); ++i)
      if (!std::isfinite(data[i].real()) || !std::isfinite(data[i].imag()))
        throw ArgumentError("csi value not finite at flat index " + std::to_string(i));
  }
};

struct SpectrogramOrigin {
  std::string source_id;
  std::string channel;  // "sc<f>-l<l>" for a subcarrier, "grp<g>" for a mixed group
  int link = -1;
  int window_len = 0;
};

// Non-negative time-frequency magnitudes, row-major rows() x cols().
struct Spectrogram {
  std::vector<double> values;
  std::vector<double> bin_freqs_hz;
  std::vector<double> bin_times_s;
  SpectrogramOrigin origin;

  std::size_t rows() const { return bin_freqs_hz.size(); }
  std::size_t cols() const { return bin_times_s.size(); }
  double& at(std::size_t b, std::size_t n) { return values[b * bin_times_s.size() + n]; }
  double at(std::size_t b, std::size_t n) const { return values[b * bin_times_s.size() + n]; }
};

struct SampleRecord {
  std::string id;
  CsiTensor csi;
  std::string label;
  std::string env_tag;
};

// Half-open [begin, end) range of time bins.
struct Interval {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Interval&) const = default;
};

}  // namespace rfaug
