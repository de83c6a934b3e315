#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "shapedos/dos.hpp"
#include "shapedos/spectral.hpp"

namespace shapedos {

nlohmann::json to_json(const HeatTraceEstimate& e);
HeatTraceEstimate estimate_from_json(const nlohmann::json& j);

/// Lowercase hex SHA-256 of the compact dump of `key`. nlohmann objects keep
/// their keys sorted, so equal keys hash equally.
std::string cache_key_hash(const nlohmann::json& key);

/// Content-addressed store: one file per entry at
/// <root>/entries/<hash[0:2]>/<hash>.json, written to a temporary name and
/// renamed into place. <root>/manifest.json indexes the entries.
class FileCache : public CellStore {
 public:
  explicit FileCache(std::filesystem::path root);

  std::optional<HeatTraceEstimate> load(const nlohmann::json& key) override;
  void store(const nlohmann::json& key, const HeatTraceEstimate& estimate) override;

  /// Rewrites the manifest from the entry files.
  void write_manifest() const;

  std::size_t hits() const noexcept { return hits_; }
  std::size_t misses() const noexcept { return misses_; }
  const std::filesystem::path& root() const noexcept { return root_; }

  struct GcResult {
    std::size_t kept = 0;
    std::size_t removed_corrupt = 0;
    std::size_t removed_temporary = 0;
    std::size_t removed_old = 0;
  };
  /// Drops unreadable entries, stray temporary files and, when max_age_days
  /// is set, entries older than that; then rewrites the manifest.
  GcResult gc(std::optional<double> max_age_days = std::nullopt) const;

 private:
  std::filesystem::path entry_path(const std::string& hash) const;

  std::filesystem::path root_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace shapedos
