#pragma once

#include <array>
#include <complex>
#include <span>
#include <string_view>

#include "rfaug/types.hpp"

namespace rfaug {

enum class WindowFn { hann, rect };
enum class InputMode { complex_demeaned, power };

WindowFn parse_window_fn(std::string_view name);
InputMode parse_input_mode(std::string_view name);
std::string_view to_string(WindowFn fn);
std::string_view to_string(InputMode mode);

struct StftConfig {
  int window_len = 128;
  int hop = 16;
  int n_dft = 256;
  WindowFn window_fn = WindowFn::hann;
  InputMode input_mode = InputMode::complex_demeaned;
  double crop_hz = 60.0;
  bool fold_longer_windows = false;  // time-alias windows longer than n_dft instead of rejecting

  void validate() const;
};

struct WindowSet {
  int default_len = 128;
  int lengthened_len = 256;
  int shortened_len = 64;

  void validate() const;
};

// Magnitude spectrogram with the 0 Hz bin centered and rows cropped to
// |f| <= crop_hz. In complex_demeaned mode each window's mean (over the
// samples actually present, before tail padding) is removed first.
Spectrogram stft_spectrogram(std::span<const std::complex<double>> series, const StftConfig& cfg,
                             double sample_rate_hz);

// Default / lengthened / shortened windows over one shared DFT size, so all
// three spectrograms carry identical frequency axes and column counts.
std::array<Spectrogram, 3> tda_spectrograms(std::span<const std::complex<double>> series,
                                            const StftConfig& base_cfg, const WindowSet& windows,
                                            double sample_rate_hz);

// Pixel-center linear resampling of one row to t_out entries.
std::vector<double> resample_linear(std::span<const double> row, std::size_t t_out);

// Exactly t_out columns: right zero-padding when short, linear resampling
// when long. Frequency axis untouched; idempotent.
Spectrogram align(const Spectrogram& spec, std::size_t t_out);

}  // namespace rfaug
