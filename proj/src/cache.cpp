#include "rfaug/cache.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "rfaug/errors.hpp"
#include "rfaug/io.hpp"
#include "rfaug/rng.hpp"

namespace rfaug {

std::string cache_key(std::string_view source_hash, std::string_view op, std::string_view params) {
  std::string key;
  key.reserve(source_hash.size() + op.size() + params.size() + 2);
  key.append(source_hash);
  key.push_back('|');
  key.append(op);
  key.push_back('|');
  key.append(params);
  return key;
}

CacheStore::CacheStore(std::filesystem::path dir, std::uint64_t cap_bytes)
    : dir_(std::move(dir)), cap_bytes_(cap_bytes) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory " + dir_.string());

  // Adopt whatever a previous run left behind, oldest-name-first.
  std::vector<std::pair<std::string, std::uint64_t>> existing;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".rfc") continue;
    existing.emplace_back(entry.path().filename().string(),
                          static_cast<std::uint64_t>(entry.file_size()));
  }
  std::sort(existing.begin(), existing.end());
  for (auto& [name, size] : existing) {
    lru_.push_back(name);
    index_[name] = {std::prev(lru_.end()), size};
    bytes_ += size;
  }
}

std::string CacheStore::file_name(const std::string& key) const {
  const std::uint64_t h1 = fnv1a64(key);
  const std::uint64_t h2 = fnv1a64(std::string(key) + "#2");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx.rfc", static_cast<unsigned long long>(h1),
                static_cast<unsigned long long>(h2));
  return buf;
}

void CacheStore::touch_locked(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) return;
  lru_.splice(lru_.end(), lru_, it->second.first);
}

void CacheStore::evict_locked() {
  while (bytes_ > cap_bytes_ && lru_.size() > 1) {
    const std::string victim = lru_.front();
    lru_.pop_front();
    auto it = index_.find(victim);
    if (it != index_.end()) {
      bytes_ -= it->second.second;
      index_.erase(it);
    }
    std::error_code ec;
    std::filesystem::remove(dir_ / victim, ec);
  }
}

std::optional<Spectrogram> CacheStore::get(const std::string& key) {
  const std::string name = file_name(key);
  std::lock_guard<std::mutex> lock(mu_);

  const std::filesystem::path path = dir_ / name;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ++misses_;
    return std::nullopt;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    Spectrogram spec = spectrogram_from_cache_bytes(ss.str());
    ++hits_;
    touch_locked(name);
    return spec;
  } catch (const Error& e) {
    std::error_code ec;
    std::filesystem::remove(path, ec);
    auto it = index_.find(name);
    if (it != index_.end()) {
      bytes_ -= it->second.second;
      lru_.erase(it->second.first);
      index_.erase(it);
    }
    throw CacheError("corrupt cache entry " + path.string() + " removed: " + e.what());
  }
}

void CacheStore::put(const std::string& key, const Spectrogram& spec) {
  const std::string bytes = spectrogram_to_cache_bytes(spec);
  const std::string name = file_name(key);

  std::lock_guard<std::mutex> lock(mu_);
  const std::filesystem::path tmp =
      dir_ / ("tmp-" + std::to_string(++tmp_counter_) + "-" + name);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open cache temp file " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for cache temp file " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, dir_ / name, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot publish cache entry " + name);
  }

  auto it = index_.find(name);
  if (it != index_.end()) {
    bytes_ -= it->second.second;
    it->second.second = bytes.size();
    touch_locked(name);
  } else {
    lru_.push_back(name);
    index_[name] = {std::prev(lru_.end()), bytes.size()};
  }
  bytes_ += bytes.size();
  evict_locked();
}

std::uint64_t CacheStore::hits() const {
  std::lock_guard<std::mutex> lock(mu_);
  return hits_;
}

std::uint64_t CacheStore::misses() const {
  std::lock_guard<std::mutex> lock(mu_);
  return misses_;
}

}  // namespace rfaug
