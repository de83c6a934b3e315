#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapedos/geometry.hpp"
#include "shapedos/potential.hpp"
#include "shapedos/spectral.hpp"

namespace shapedos {

enum class MethodMode { automatic, dense, stochastic };

std::string to_string(MethodMode mode);
MethodMode method_mode_from_string(const std::string& name);

/// How heat traces are computed. `automatic` is dense up to dense_cap nodes.
struct MethodPolicy {
  MethodMode mode = MethodMode::automatic;
  std::size_t dense_cap = kDefaultDenseCap;
  int probes = 8;
  int degree = 0;
  double poly_tolerance = 1e-10;
  /// Probe coloring period in units of the heat-kernel length sqrt(t_max)*hbar,
  /// see probe_spacing_for.
  double probe_spacing_factor = 2.5;
  int threads = 1;
};

inline constexpr double kDefaultEta = 0.1;

/// Lattice period for colored probes: ceil(factor * sqrt(t_max) * hbar / h).
int probe_spacing_for(double t_max, double hbar, double spacing, double factor);

/// Seed of the stochastic cell at a given hbar; independent of the rest of
/// the hbar list.
std::uint64_t cell_seed(std::uint64_t seed, double hbar);

/// Semiclassical limit (4 pi t)^(-d/2) (1/|Omega|) int exp(-t V).
double oracle_laplace(const Potential& potential, const Domain& domain, double t,
                      double tol = 1e-10);

/// One normalized trace (hbar^d / |Omega|) Tr exp(-t H) with its error budget
/// carried through the same normalization.
struct LaplaceCell {
  double t = 0.0;
  double hbar = 0.0;
  double spacing = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  double truncation_bound = 0.0;
  HeatTraceEstimate estimate;
};

enum class LaplacePath { rescaled, direct };

/// Finite-volume Laplace transform (1/|R Omega|) Tr exp(-t(-Delta + V)) on
/// R*Omega, for every t in `ts` from a single operator.
///
/// The rescaled path assembles on Omega with hbar = 1/R and spacing eta/R; the
/// direct path assembles on R*Omega with hbar = 1 and spacing eta. Potentials
/// that are not homogeneous always take the direct path.
std::vector<LaplaceCell> finite_volume_laplace(const Domain& domain, const Potential& potential,
                                               double scale, std::span<const double> ts,
                                               double eta, const MethodPolicy& policy,
                                               std::uint64_t seed,
                                               LaplacePath path = LaplacePath::rescaled);

double finite_volume_laplace(const Domain& domain, const Potential& potential, double scale,
                             double t, double eta, const MethodPolicy& policy,
                             std::uint64_t seed);

/// Persistent store for sweep cells, keyed by a canonical JSON description of
/// everything the estimate depends on.
class CellStore {
 public:
  virtual ~CellStore() = default;
  virtual std::optional<HeatTraceEstimate> load(const nlohmann::json& key) = 0;
  virtual void store(const nlohmann::json& key, const HeatTraceEstimate& estimate) = 0;
};

struct SweepSpec {
  std::vector<double> ts;
  /// Strictly descending.
  std::vector<double> hbars;
  double eta = kDefaultEta;
  MethodPolicy policy;
  std::uint64_t seed = 0;
};

struct SweepCell {
  double t = 0.0;
  double hbar = 0.0;
  double spacing = 0.0;
  bool ok = false;
  std::string error;
  bool cached = false;
  double value = 0.0;
  double std_error = 0.0;
  double truncation_bound = 0.0;
  HeatTraceEstimate estimate;
  double abs_discrepancy = 0.0;
  double rel_discrepancy = 0.0;
};

/// Normalized traces L(t, hbar) against the oracle, with the O(hbar)
/// two-point Richardson value from the last two hbar when there are at least
/// two (otherwise `raw` is set and `extrapolated` is empty).
struct DOSReport {
  nlohmann::json domain;
  nlohmann::json potential;
  std::vector<double> ts;
  std::vector<double> hbars;
  double eta = kDefaultEta;
  MethodPolicy policy;
  std::uint64_t seed = 0;
  /// t-major: cell(i, j) is ts[i], hbars[j].
  std::vector<SweepCell> cells;
  std::vector<double> oracle;
  bool raw = false;
  /// NaN where a contributing cell failed.
  std::vector<double> extrapolated;
  std::vector<double> extrapolated_abs_discrepancy;
  std::vector<double> extrapolated_rel_discrepancy;

  const SweepCell& cell(std::size_t i, std::size_t j) const { return cells[i * hbars.size() + j]; }
  bool all_ok() const;
};

/// Richardson combination assuming L(hbar) = L0 + c hbar + o(hbar).
double richardson(double hbar_coarse, double value_coarse, double hbar_fine, double value_fine);

/// Cell failures are recorded in the report; only invalid specs throw.
DOSReport sweep(const Domain& domain, const Potential& potential, const SweepSpec& spec,
                CellStore* store = nullptr);

/// Small-t mean: y(t) = -log[(4 pi t)^(d/2) L(t)] / t at two points,
/// linearly extrapolated to t = 0.
struct MeanExtraction {
  std::vector<double> fit_t;
  std::vector<double> fit_y;
  double mean = 0.0;
};

MeanExtraction extract_mean(int dimension, double t1, double laplace1, double t2,
                            double laplace2);

struct CounterexampleSpec {
  SweepSpec sweep;
  std::vector<double> oracle_fit_t = {0.05, 0.1};
  /// Skip the discretized sweeps (oracle-only report).
  bool oracle_only = false;
};

struct CounterexampleSide {
  nlohmann::json domain;
  double quadrature_mean = 0.0;
  std::vector<double> oracle;
  MeanExtraction oracle_mean;
  std::optional<DOSReport> report;
  /// From the raw traces at the finest hbar, at the two smallest t.
  std::optional<MeanExtraction> empirical_mean;
  /// Same fit on the extrapolated traces.
  std::optional<MeanExtraction> extrapolated_mean;
};

struct CounterexampleReport {
  nlohmann::json potential;
  std::vector<double> ts;
  std::vector<double> hbars;
  CounterexampleSide a;
  CounterexampleSide b;
  double oracle_mean_gap = 0.0;
  std::optional<double> empirical_mean_gap;
  /// Largest relative difference between the two oracle transforms over ts.
  double oracle_max_relative_difference = 0.0;
  /// True when the two limiting measures differ (oracle transforms differ by
  /// more than 1e-9 relative at some t).
  bool measures_differ = false;
};

CounterexampleReport counterexample(const Domain& domain_a, const Domain& domain_b,
                                    const Potential& potential, const CounterexampleSpec& spec,
                                    CellStore* store = nullptr);

}  // namespace shapedos
