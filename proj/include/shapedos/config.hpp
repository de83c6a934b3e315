#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapedos/dos.hpp"
#include "shapedos/geometry.hpp"
#include "shapedos/ids.hpp"
#include "shapedos/potential.hpp"

namespace shapedos {

struct RescaleOptions {
  std::vector<double> scales = {2.0, 3.0};
  /// Lattice spacing on Omega; R*Omega uses spacing * R.
  double spacing = 0.1;
  std::vector<double> ts = {0.5, 1.0};
};

struct IdsOptions {
  double lambda_min = 0.0;
  double lambda_max = 40.0;
  double lambda_step = 0.05;
  double scale = 10.0;
  double eta = 0.35;
  int resolution = 4096;
  bool empirical = true;
};

struct CompareOptions {
  std::vector<double> oracle_fit_t = {0.05, 0.1};
  bool oracle_only = false;
};

/// Parsed experiment file. See README for the schema.
struct ExperimentConfig {
  nlohmann::json domain_record;
  nlohmann::json potential_record;
  std::optional<nlohmann::json> domain_b_record;
  std::vector<double> ts = {0.25, 0.5, 1.0, 2.0};
  std::vector<double> hbars = {0.2, 0.1, 0.05};
  double eta = kDefaultEta;
  MethodPolicy policy;
  std::uint64_t seed = 0;
  std::filesystem::path output = "out";
  bool cache_enabled = true;
  std::filesystem::path cache_directory = ".shapedos-cache";
  RescaleOptions rescale;
  IdsOptions ids;
  CompareOptions compare;

  Domain domain() const;
  std::optional<Domain> domain_b() const;
  Potential potential() const;
  /// Canonical JSON of every field, used in report metadata.
  nlohmann::json to_json() const;
};

/// Throws ConfigError naming the offending field (and line/column for syntax
/// errors). Nothing is computed here beyond building the domain and potential
/// once to validate their parameters.
ExperimentConfig parse_config(const nlohmann::json& document);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

Domain make_domain(const nlohmann::json& record);
Potential make_potential(const nlohmann::json& record, int dimension);

}  // namespace shapedos
