#include "rfaug/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "rfaug/errors.hpp"

namespace rfaug {
namespace {

constexpr std::string_view kCsiMagic = "RFB1";
constexpr std::string_view kSpecMagic = "RFS1";
constexpr std::string_view kCacheMagic = "RFC8";
constexpr std::size_t kMaxElements = 1ull << 31;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffULL));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct ByteReader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw CorruptError("file truncated: payload shorter than declared");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    const std::uint64_t hi = u32();
    return lo | (hi << 32);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return std::move(ss).str();
}

void dump(const std::string& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void check_csi_dims(std::uint64_t t, std::uint64_t f, std::uint64_t l, double rate) {
  if (t < 2 || f < 1 || l < 1)
    throw CorruptError("invalid csi dimensions T=" + std::to_string(t) + " F=" + std::to_string(f) +
                       " L=" + std::to_string(l));
  if (!std::isfinite(rate) || rate <= 0.0) throw CorruptError("invalid csi sample rate");
  if (t * f * l > kMaxElements) throw CorruptError("implausible csi element count");
}

CsiTensor parse_csi_binary(const std::string& bytes) {
  ByteReader r{bytes, kCsiMagic.size()};
  CsiTensor tensor;
  tensor.t_count = r.u32();
  tensor.f_count = r.u32();
  tensor.l_count = r.u32();
  tensor.sample_rate_hz = r.f64();
  check_csi_dims(tensor.t_count, tensor.f_count, tensor.l_count, tensor.sample_rate_hz);

  const std::size_t count =
      static_cast<std::size_t>(tensor.t_count) * tensor.f_count * tensor.l_count;
  const std::size_t expected = r.pos + 8 * count;
  if (bytes.size() != expected)
    throw CorruptError("payload size mismatch: header declares " + std::to_string(count) +
                       " complex values (" + std::to_string(expected) + " bytes), file has " +
                       std::to_string(bytes.size()) + " bytes");

  tensor.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const float re = r.f32();
    const float im = r.f32();
    if (!std::isfinite(re) || !std::isfinite(im))
      throw ValueError("non-finite csi value at flat index " + std::to_string(i));
    tensor.data[i] = std::complex<double>(re, im);
  }
  return tensor;
}

CsiTensor parse_csi_text(const std::string& bytes) {
  std::istringstream in(bytes);
  std::uint64_t t = 0, f = 0, l = 0;
  double rate = 0.0;
  if (!(in >> t >> f >> l >> rate)) throw FormatError("not an RFB1 file and text header unparsable");
  check_csi_dims(t, f, l, rate);

  CsiTensor tensor;
  tensor.t_count = static_cast<std::uint32_t>(t);
  tensor.f_count = static_cast<std::uint32_t>(f);
  tensor.l_count = static_cast<std::uint32_t>(l);
  tensor.sample_rate_hz = rate;

  const std::size_t count = static_cast<std::size_t>(t * f * l);
  tensor.data.reserve(count);
  std::string token;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> token))
      throw CorruptError("text payload ends after " + std::to_string(i) + " of " +
                         std::to_string(count) + " values");
    const auto comma = token.find(',');
    if (comma == std::string::npos) throw FormatError("expected \"re,im\" pair, got \"" + token + "\"");
    std::size_t used_re = 0, used_im = 0;
    double re = 0.0, im = 0.0;
    try {
      re = std::stod(token.substr(0, comma), &used_re);
      im = std::stod(token.substr(comma + 1), &used_im);
    } catch (const std::exception&) {
      throw FormatError("unparsable complex value \"" + token + "\"");
    }
    if (used_re != comma || used_im != token.size() - comma - 1)
      throw FormatError("unparsable complex value \"" + token + "\"");
    if (!std::isfinite(re) || !std::isfinite(im))
      throw ValueError("non-finite csi value at flat index " + std::to_string(i));
    tensor.data.emplace_back(re, im);
  }
  if (in >> token) throw CorruptError("text payload holds more values than T*F*L");
  return tensor;
}

void check_spectrogram(const Spectrogram& spec) {
  if (spec.rows() < 1 || spec.cols() < 1)
    throw ArgumentError("spectrogram must have at least one row and one column");
  if (spec.values.size() != spec.rows() * spec.cols())
    throw ArgumentError("spectrogram value count does not equal rows*cols");
  for (double v : spec.bin_freqs_hz)
    if (!std::isfinite(v)) throw ArgumentError("non-finite frequency axis entry");
  for (double v : spec.bin_times_s)
    if (!std::isfinite(v)) throw ArgumentError("non-finite time axis entry");
  for (std::size_t i = 0; i < spec.values.size(); ++i)
    if (!std::isfinite(spec.values[i]) || spec.values[i] < 0.0)
      throw ArgumentError("spectrogram value negative or non-finite at flat index " +
                          std::to_string(i));
}

Spectrogram parse_spectrogram(const std::string& bytes, std::string_view magic, bool wide) {
  ByteReader r{bytes, magic.size()};
  const std::uint64_t b = r.u32();
  const std::uint64_t n = r.u32();
  if (b < 1 || n < 1) throw CorruptError("invalid spectrogram dimensions");
  if (b * n > kMaxElements) throw CorruptError("implausible spectrogram element count");

  const std::size_t cell = wide ? 8 : 4;
  const std::size_t expected = r.pos + 8 * (b + n) + cell * b * n;
  if (bytes.size() != expected)
    throw CorruptError("payload size mismatch: expected " + std::to_string(expected) +
                       " bytes, file has " + std::to_string(bytes.size()));

  Spectrogram spec;
  spec.bin_freqs_hz.resize(b);
  spec.bin_times_s.resize(n);
  for (auto& v : spec.bin_freqs_hz) v = r.f64();
  for (auto& v : spec.bin_times_s) v = r.f64();
  for (double v : spec.bin_freqs_hz)
    if (!std::isfinite(v)) throw ValueError("non-finite frequency axis entry");
  for (double v : spec.bin_times_s)
    if (!std::isfinite(v)) throw ValueError("non-finite time axis entry");

  spec.values.resize(b * n);
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    const double v = wide ? r.f64() : static_cast<double>(r.f32());
    if (!std::isfinite(v) || v < 0.0)
      throw ValueError("spectrogram value negative or non-finite at flat index " +
                       std::to_string(i));
    spec.values[i] = v;
  }
  return spec;
}

std::string spectrogram_bytes(const Spectrogram& spec, std::string_view magic, bool wide) {
  check_spectrogram(spec);
  std::string out;
  out.reserve(magic.size() + 8 + 8 * (spec.rows() + spec.cols()) +
              (wide ? 8 : 4) * spec.values.size());
  out.append(magic);
  put_u32(out, static_cast<std::uint32_t>(spec.rows()));
  put_u32(out, static_cast<std::uint32_t>(spec.cols()));
  for (double v : spec.bin_freqs_hz) put_f64(out, v);
  for (double v : spec.bin_times_s) put_f64(out, v);
  for (double v : spec.values) {
    if (wide)
      put_f64(out, v);
    else
      put_f32(out, static_cast<float>(v));
  }
  return out;
}

}  // namespace

CsiTensor read_csi(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() >= kCsiMagic.size() && bytes.compare(0, kCsiMagic.size(), kCsiMagic) == 0)
    return parse_csi_binary(bytes);
  if (bytes.size() >= 2 && bytes.compare(0, 2, "RF") == 0)
    throw FormatError("unrecognized magic in " + path.string());
  return parse_csi_text(bytes);
}

std::string csi_to_bytes(const CsiTensor& tensor) {
  tensor.validate();
  std::string out;
  out.reserve(kCsiMagic.size() + 20 + 8 * tensor.data.size());
  out.append(kCsiMagic);
  put_u32(out, tensor.t_count);
  put_u32(out, tensor.f_count);
  put_u32(out, tensor.l_count);
  put_f64(out, tensor.sample_rate_hz);
  for (const auto& c : tensor.data) {
    put_f32(out, static_cast<float>(c.real()));
    put_f32(out, static_cast<float>(c.imag()));
  }
  return out;
}

void write_csi(const CsiTensor& tensor, const std::filesystem::path& path) {
  dump(csi_to_bytes(tensor), path);
}

Spectrogram read_spectrogram(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() < kSpecMagic.size() || bytes.compare(0, kSpecMagic.size(), kSpecMagic) != 0)
    throw FormatError("unrecognized magic in " + path.string());
  return parse_spectrogram(bytes, kSpecMagic, /*wide=*/false);
}

std::string spectrogram_to_bytes(const Spectrogram& spec) {
  return spectrogram_bytes(spec, kSpecMagic, /*wide=*/false);
}

void write_spectrogram(const Spectrogram& spec, const std::filesystem::path& path) {
  dump(spectrogram_to_bytes(spec), path);
}

std::string spectrogram_to_cache_bytes(const Spectrogram& spec) {
  return spectrogram_bytes(spec, kCacheMagic, /*wide=*/true);
}

Spectrogram spectrogram_from_cache_bytes(const std::string& bytes) {
  if (bytes.size() < kCacheMagic.size() || bytes.compare(0, kCacheMagic.size(), kCacheMagic) != 0)
    throw FormatError("unrecognized cache payload magic");
  return parse_spectrogram(bytes, kCacheMagic, /*wide=*/true);
}

}  // namespace rfaug
