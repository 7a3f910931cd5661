#pragma once

#include <filesystem>
#include <string>

#include "rfaug/types.hpp"

namespace rfaug {

// Binary CSI container "RFB1": magic bytes, u32 T, u32 F, u32 L, f64
// sample_rate_hz, then T*F*L samples as (f32 re, f32 im), little-endian,
// t-major/f/l order. A file without the magic is parsed as the text fixture
// format: header line "T F L sample_rate_hz", then T lines of F*L
// whitespace-separated "re,im" pairs.
CsiTensor read_csi(const std::filesystem::path& path);
void write_csi(const CsiTensor& tensor, const std::filesystem::path& path);
std::string csi_to_bytes(const CsiTensor& tensor);

// Spectrogram container "RFS1": magic, u32 B, u32 N, f64 bin_freqs[B],
// f64 bin_times[N], f32 values row-major (B rows of N). Origin metadata is
// carried by the dataset manifest, not the container.
Spectrogram read_spectrogram(const std::filesystem::path& path);
void write_spectrogram(const Spectrogram& spec, const std::filesystem::path& path);
std::string spectrogram_to_bytes(const Spectrogram& spec);

// Lossless f64 payload ("RFC8") used by the spectrogram cache, whose entries
// must reload bit-identical to the values that were computed.
std::string spectrogram_to_cache_bytes(const Spectrogram& spec);
Spectrogram spectrogram_from_cache_bytes(const std::string& bytes);

}  // namespace rfaug
