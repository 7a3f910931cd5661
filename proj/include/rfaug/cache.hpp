#pragma once

#include <cstdint>
#include <filesystem>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>

#include "rfaug/types.hpp"

namespace rfaug {

// Canonical cache key from a source content hash, an operation name, and the
// operation's parameter text.
std::string cache_key(std::string_view source_hash, std::string_view op, std::string_view params);

// Disk store of intermediate spectrograms. Entries use a lossless f64
// payload so a hit reloads bit-identical to the computed values, and are
// published with write-temp-then-rename so concurrent readers never observe
// partial files. Total size is capped with least-recently-used eviction.
// A corrupt entry is deleted (invalidated) and reported as CacheError.
class CacheStore {
 public:
  explicit CacheStore(std::filesystem::path dir, std::uint64_t cap_bytes = 1ull << 30);

  std::optional<Spectrogram> get(const std::string& key);
  void put(const std::string& key, const Spectrogram& spec);

  std::uint64_t hits() const;
  std::uint64_t misses() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::string file_name(const std::string& key) const;
  void touch_locked(const std::string& name);
  void evict_locked();

  std::filesystem::path dir_;
  std::uint64_t cap_bytes_;
  mutable std::mutex mu_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::uint64_t bytes_ = 0;
  std::uint64_t tmp_counter_ = 0;
  std::list<std::string> lru_;  // front = least recently used
  std::unordered_map<std::string, std::pair<std::list<std::string>::iterator, std::uint64_t>>
      index_;
};

}  // namespace rfaug
