#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shapedos/discretize.hpp"

namespace shapedos {

enum class TraceMethod { dense, stochastic };

std::string to_string(TraceMethod method);
TraceMethod trace_method_from_string(const std::string& name);

/// Tr exp(-t H) with its error budget. Dense estimates carry zero
/// std_error and truncation_bound.
struct HeatTraceEstimate {
  double t = 0.0;
  double value = 0.0;
  TraceMethod method = TraceMethod::dense;
  double std_error = 0.0;
  double truncation_bound = 0.0;
  int probes = 0;
  int degree = 0;
  std::uint64_t seed = 0;
  /// Period of the lattice coloring used by the stochastic probes (1 = plain
  /// Hutchinson).
  int probe_spacing = 0;
  std::size_t nodes = 0;
};

inline constexpr std::size_t kDefaultDenseCap = 4000;

/// Full spectrum in ascending order. Throws PreconditionError above the cap.
std::vector<double> eigen_dense(const DiscreteHamiltonian& h,
                                std::size_t dense_cap = kDefaultDenseCap);

HeatTraceEstimate heat_trace_from_spectrum(std::span<const double> eigenvalues, double t);
HeatTraceEstimate heat_trace_dense(const DiscreteHamiltonian& h, double t,
                                   std::size_t dense_cap = kDefaultDenseCap);
/// One eigensolve shared by every t.
std::vector<HeatTraceEstimate> heat_traces_dense(const DiscreteHamiltonian& h,
                                                 std::span<const double> ts,
                                                 std::size_t dense_cap = kDefaultDenseCap);

struct StochasticOptions {
  int probes = 8;
  /// 0 picks the smallest degree meeting poly_tolerance.
  int degree = 0;
  /// Uniform error allowed for the polynomial approximant of exp(-t lambda).
  double poly_tolerance = 1e-10;
  /// Probe vectors are Rademacher signs split over a lattice coloring with this
  /// period per axis; each probe sums z_c^T p(H) z_c over the colors, which
  /// removes the cross terms between nodes closer than the period. 1 gives the
  /// classical Hutchinson estimator.
  int probe_spacing = 1;
  int threads = 1;
};

/// Randomized estimate sum_j z_j^T p(H) z_j / probes with Rademacher z_j
/// seeded by seed ^ j and p the Chebyshev approximant of exp(-t lambda) on the
/// Gershgorin interval. std_error = sample deviation / sqrt(probes);
/// truncation_bound = N * uniform polynomial error.
HeatTraceEstimate heat_trace_stochastic(const DiscreteHamiltonian& h, double t,
                                        const StochasticOptions& options, std::uint64_t seed);

/// Same probes and moments shared across several t. Each result equals the
/// single-t call with the same arguments.
std::vector<HeatTraceEstimate> heat_traces_stochastic(const DiscreteHamiltonian& h,
                                                      std::span<const double> ts,
                                                      const StochasticOptions& options,
                                                      std::uint64_t seed);

/// Chebyshev moments z^T T_k(A) z of the probes, one row per probe, where A is
/// H mapped affinely from [lower, upper] onto [-1, 1].
std::vector<std::vector<double>> chebyshev_moments(const DiscreteHamiltonian& h, double lower,
                                                   double upper, int count,
                                                   const StochasticOptions& options,
                                                   std::uint64_t seed);

}  // namespace shapedos
