#pragma once

#include <iosfwd>
#include <optional>

#include "shapedos/config.hpp"

namespace shapedos {

/// Settings that come from flags rather than the config file.
struct RunOptions {
  bool use_cache = true;
  std::filesystem::path cache_directory = ".shapedos-cache";
};

/// Each command validates, computes, writes its outputs under config.output
/// and returns the process exit code. Library errors propagate as
/// exceptions.
int cmd_oracle(const ExperimentConfig& config, const RunOptions& run, std::ostream& log);
int cmd_sweep(const ExperimentConfig& config, const RunOptions& run, std::ostream& log);
int cmd_compare(const ExperimentConfig& config, const RunOptions& run, std::ostream& log);
/// Returns 0 on pass and 3 when a deviation exceeds its tolerance.
int cmd_rescale_check(const ExperimentConfig& config, const RunOptions& run, std::ostream& log);
int cmd_ids(const ExperimentConfig& config, const RunOptions& run, std::ostream& log);
int cmd_cache_gc(const std::filesystem::path& cache_directory, std::optional<double> max_age_days,
                 std::ostream& log);

inline constexpr double kRescaleEntryTolerance = 1e-15;
inline constexpr double kRescaleTraceTolerance = 1e-10;

}  // namespace shapedos
