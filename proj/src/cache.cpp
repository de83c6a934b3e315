#include "shapedos/cache.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <unistd.h>

#include "shapedos/errors.hpp"
#include "shapedos/report_io.hpp"

namespace shapedos {

namespace fs = std::filesystem;

nlohmann::json to_json(const HeatTraceEstimate& e) {
  return nlohmann::json{{"t", e.t},
                        {"value", e.value},
                        {"method", to_string(e.method)},
                        {"std_error", e.std_error},
                        {"truncation_bound", e.truncation_bound},
                        {"probes", e.probes},
                        {"degree", e.degree},
                        {"seed", e.seed},
                        {"probe_spacing", e.probe_spacing},
                        {"nodes", e.nodes}};
}

HeatTraceEstimate estimate_from_json(const nlohmann::json& j) {
  HeatTraceEstimate e;
  e.t = j.at("t").get<double>();
  e.value = j.at("value").get<double>();
  e.method = trace_method_from_string(j.at("method").get<std::string>());
  e.std_error = j.at("std_error").get<double>();
  e.truncation_bound = j.at("truncation_bound").get<double>();
  e.probes = j.at("probes").get<int>();
  e.degree = j.at("degree").get<int>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.probe_spacing = j.at("probe_spacing").get<int>();
  e.nodes = j.at("nodes").get<std::size_t>();
  return e;
}

std::string cache_key_hash(const nlohmann::json& key) {
  const std::string text = key.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

namespace {

std::optional<nlohmann::json> read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

void write_atomically(const fs::path& path, const std::string& text) {
  static std::atomic<unsigned> counter{0};
  fs::create_directories(path.parent_path());
  const fs::path temp = path.parent_path() /
                        fmt::format(".tmp-{}-{}-{}", ::getpid(), counter++, path.filename().string());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError(fmt::format("cannot write cache file '{}'", temp.string()));
    out << text;
    if (!out) throw NumericalError(fmt::format("cannot write cache file '{}'", temp.string()));
  }
  fs::rename(temp, path);
}

bool valid_entry(const nlohmann::json& j) {
  try {
    if (!j.contains("key") || !j.contains("estimate") || !j.contains("hash")) return false;
    estimate_from_json(j.at("estimate"));
    return cache_key_hash(j.at("key")) == j.at("hash").get<std::string>();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

FileCache::FileCache(fs::path root) : root_(std::move(root)) {}

fs::path FileCache::entry_path(const std::string& hash) const {
  return root_ / "entries" / hash.substr(0, 2) / (hash + ".json");
}

std::optional<HeatTraceEstimate> FileCache::load(const nlohmann::json& key) {
  const std::string hash = cache_key_hash(key);
  const auto entry = read_json(entry_path(hash));
  if (!entry || !valid_entry(*entry) || entry->at("key") != key) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return estimate_from_json(entry->at("estimate"));
}

void FileCache::store(const nlohmann::json& key, const HeatTraceEstimate& estimate) {
  const std::string hash = cache_key_hash(key);
  nlohmann::json entry{{"hash", hash},
                       {"key", key},
                       {"estimate", to_json(estimate)},
                       {"created", utc_timestamp()}};
  write_atomically(entry_path(hash), entry.dump(1) + "\n");
}

void FileCache::write_manifest() const {
  nlohmann::json entries = nlohmann::json::object();
  const fs::path dir = root_ / "entries";
  if (fs::exists(dir)) {
    for (const auto& f : fs::recursive_directory_iterator(dir)) {
      if (!f.is_regular_file() || f.path().extension() != ".json") continue;
      if (f.path().filename().string().starts_with(".tmp-")) continue;
      const auto entry = read_json(f.path());
      if (!entry || !valid_entry(*entry)) continue;
      entries[entry->at("hash").get<std::string>()] = {
          {"file", fs::relative(f.path(), root_).generic_string()},
          {"created", entry->value("created", "")},
          {"t", entry->at("key").value("t", 0.0)},
          {"hbar", entry->at("key").value("hbar", 0.0)},
          {"method", entry->at("key").value("method", "")}};
    }
  }
  nlohmann::json manifest{{"format", 1}, {"entries", entries}};
  write_atomically(root_ / "manifest.json", manifest.dump(1) + "\n");
}

FileCache::GcResult FileCache::gc(std::optional<double> max_age_days) const {
  GcResult r;
  const fs::path dir = root_ / "entries";
  if (fs::exists(dir)) {
    std::vector<fs::path> files;
    for (const auto& f : fs::recursive_directory_iterator(dir)) {
      if (f.is_regular_file()) files.push_back(f.path());
    }
    const auto now = fs::file_time_type::clock::now();
    for (const auto& path : files) {
      if (path.filename().string().starts_with(".tmp-")) {
        fs::remove(path);
        ++r.removed_temporary;
        continue;
      }
      const auto entry = read_json(path);
      if (!entry || !valid_entry(*entry) ||
          path.stem().string() != entry->at("hash").get<std::string>()) {
        fs::remove(path);
        ++r.removed_corrupt;
        continue;
      }
      if (max_age_days) {
        const auto age = std::chrono::duration<double>(now - fs::last_write_time(path)).count();
        if (age > *max_age_days * 86400.0) {
          fs::remove(path);
          ++r.removed_old;
          continue;
        }
      }
      ++r.kept;
    }
  }
  write_manifest();
  return r;
}

}  // namespace shapedos
