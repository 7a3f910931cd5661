#include "rfaug/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "rfaug/errors.hpp"

namespace rfaug {
namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 DIT, forward transform, no normalization.
void fft_pow2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

// Direct evaluation for non-power-of-two sizes.
void dft_any(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  std::vector<std::complex<double>> twiddle(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle[k] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t m = 0; m < n; ++m) acc += a[m] * twiddle[(k * m) % n];
    out[k] = acc;
  }
  a = std::move(out);
}

std::vector<double> make_window(WindowFn fn, int len) {
  std::vector<double> w(static_cast<std::size_t>(len), 1.0);
  if (fn == WindowFn::hann && len > 1) {
    for (int i = 0; i < len; ++i)
      w[static_cast<std::size_t>(i)] =
          0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / static_cast<double>(len)));
  }
  return w;
}

}  // namespace

WindowFn parse_window_fn(std::string_view name) {
  if (name == "hann") return WindowFn::hann;
  if (name == "rect") return WindowFn::rect;
  throw ConfigError("unknown window function \"" + std::string(name) + "\"");
}

InputMode parse_input_mode(std::string_view name) {
  if (name == "complex_demeaned") return InputMode::complex_demeaned;
  if (name == "power") return InputMode::power;
  throw ConfigError("unknown stft input mode \"" + std::string(name) + "\"");
}

std::string_view to_string(WindowFn fn) { return fn == WindowFn::hann ? "hann" : "rect"; }

std::string_view to_string(InputMode mode) {
  return mode == InputMode::complex_demeaned ? "complex_demeaned" : "power";
}

void StftConfig::validate() const {
  if (window_len < 2) throw ConfigError("stft window_len must be >= 2");
  if (hop < 1) throw ConfigError("stft hop must be >= 1");
  if (n_dft < 2) throw ConfigError("stft n_dft must be >= 2");
  if (!(crop_hz > 0.0)) throw ConfigError("stft crop_hz must be positive");
  if (window_len > n_dft && !fold_longer_windows)
    throw ConfigError("window_len " + std::to_string(window_len) + " exceeds n_dft " +
                      std::to_string(n_dft) + " (enable fold_longer_windows to time-alias)");
}

void WindowSet::validate() const {
  if (!(shortened_len < default_len && default_len < lengthened_len))
    throw ConfigError("window set must satisfy shortened < default < lengthened");
  if (shortened_len < 2) throw ConfigError("shortened window must be >= 2 samples");
}

Spectrogram stft_spectrogram(std::span<const std::complex<double>> series, const StftConfig& cfg,
                             double sample_rate_hz) {
  cfg.validate();
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  if (cfg.crop_hz > sample_rate_hz / 2.0)
    throw ConfigError("crop_hz exceeds the Nyquist frequency");
  if (series.empty()) throw ArgumentError("stft input series is empty");

  const auto window_len = static_cast<std::size_t>(cfg.window_len);
  const auto hop = static_cast<std::size_t>(cfg.hop);
  const auto n_dft = static_cast<std::size_t>(cfg.n_dft);
  const std::size_t len = series.size();
  const std::size_t n_cols = frame_count(len, hop);
  // Frames at the tail slide left so every frame holds a full window of
  // signal; a leaked partial window would smear the tail columns' spectra.
  const std::size_t w_eff = std::min(window_len, len);

  // Rows kept after centering 0 Hz and cropping to |f| <= crop_hz.
  const std::size_t shift = n_dft / 2;
  const double bin_hz = sample_rate_hz / static_cast<double>(n_dft);
  std::size_t row_lo = n_dft, row_hi = 0;
  for (std::size_t r = 0; r < n_dft; ++r) {
    const double f = (static_cast<double>(r) - static_cast<double>(shift)) * bin_hz;
    if (std::abs(f) <= cfg.crop_hz) {
      row_lo = std::min(row_lo, r);
      row_hi = std::max(row_hi, r);
    }
  }

  Spectrogram spec;
  const std::size_t n_rows = row_hi - row_lo + 1;
  spec.bin_freqs_hz.resize(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r)
    spec.bin_freqs_hz[r] =
        (static_cast<double>(row_lo + r) - static_cast<double>(shift)) * bin_hz;
  spec.bin_times_s.resize(n_cols);
  for (std::size_t n = 0; n < n_cols; ++n)
    spec.bin_times_s[n] =
        (static_cast<double>(n * hop) + static_cast<double>(window_len) / 2.0) / sample_rate_hz;
  spec.values.resize(n_rows * n_cols);
  spec.origin.window_len = cfg.window_len;

  const std::vector<double> window = make_window(cfg.window_fn, static_cast<int>(w_eff));
  std::vector<std::complex<double>> frame(w_eff);
  std::vector<std::complex<double>> buf;

  for (std::size_t n = 0; n < n_cols; ++n) {
    const std::size_t start = std::min(n * hop, len - w_eff);

    if (cfg.input_mode == InputMode::complex_demeaned) {
      std::complex<double> mean(0.0, 0.0);
      for (std::size_t i = 0; i < w_eff; ++i) mean += series[start + i];
      mean /= static_cast<double>(w_eff);
      for (std::size_t i = 0; i < w_eff; ++i) frame[i] = (series[start + i] - mean) * window[i];
    } else {
      for (std::size_t i = 0; i < w_eff; ++i)
        frame[i] = std::complex<double>(std::norm(series[start + i]) * window[i], 0.0);
    }

    buf.assign(n_dft, std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < w_eff; ++i) buf[i % n_dft] += frame[i];

    if (is_pow2(n_dft))
      fft_pow2(buf);
    else
      dft_any(buf);

    for (std::size_t r = 0; r < n_rows; ++r) {
      const std::size_t k = (row_lo + r + n_dft - shift) % n_dft;
      spec.at(r, n) = std::abs(buf[k]);
    }
  }
  return spec;
}

std::array<Spectrogram, 3> tda_spectrograms(std::span<const std::complex<double>> series,
                                            const StftConfig& base_cfg, const WindowSet& windows,
                                            double sample_rate_hz) {
  windows.validate();
  const int lens[3] = {windows.default_len, windows.lengthened_len, windows.shortened_len};
  std::array<Spectrogram, 3> out;
  for (int i = 0; i < 3; ++i) {
    StftConfig cfg = base_cfg;
    cfg.window_len = lens[i];
    out[static_cast<std::size_t>(i)] = stft_spectrogram(series, cfg, sample_rate_hz);
  }
  return out;
}

std::vector<double> resample_linear(std::span<const double> row, std::size_t t_out) {
  const std::size_t n = row.size();
  std::vector<double> out(t_out);
  for (std::size_t j = 0; j < t_out; ++j) {
    double p = (static_cast<double>(j) + 0.5) * static_cast<double>(n) /
                   static_cast<double>(t_out) -
               0.5;
    p = std::clamp(p, 0.0, static_cast<double>(n - 1));
    const auto i0 = static_cast<std::size_t>(p);
    const double frac = p - static_cast<double>(i0);
    out[j] = frac == 0.0 ? row[i0] : row[i0] + frac * (row[i0 + 1] - row[i0]);
  }
  return out;
}

Spectrogram align(const Spectrogram& spec, std::size_t t_out) {
  if (t_out < 1) throw ArgumentError("align target must be >= 1 columns");
  const std::size_t n = spec.cols();
  if (n == t_out) return spec;

  Spectrogram out;
  out.bin_freqs_hz = spec.bin_freqs_hz;
  out.origin = spec.origin;
  out.values.resize(spec.rows() * t_out);
  out.bin_times_s.resize(t_out);

  if (n < t_out) {
    for (std::size_t b = 0; b < spec.rows(); ++b) {
      for (std::size_t c = 0; c < n; ++c) out.values[b * t_out + c] = spec.at(b, c);
      for (std::size_t c = n; c < t_out; ++c) out.values[b * t_out + c] = 0.0;
    }
    const double dt = n >= 2 ? spec.bin_times_s[n - 1] - spec.bin_times_s[n - 2] : 0.0;
    for (std::size_t c = 0; c < n; ++c) out.bin_times_s[c] = spec.bin_times_s[c];
    for (std::size_t c = n; c < t_out; ++c)
      out.bin_times_s[c] = spec.bin_times_s[n - 1] + dt * static_cast<double>(c - n + 1);
    return out;
  }

  for (std::size_t b = 0; b < spec.rows(); ++b) {
    const std::vector<double> resampled =
        resample_linear({spec.values.data() + b * n, n}, t_out);
    std::copy(resampled.begin(), resampled.end(), out.values.begin() + static_cast<std::ptrdiff_t>(b * t_out));
  }
  out.bin_times_s = resample_linear(spec.bin_times_s, t_out);
  return out;
}

}  // namespace rfaug
