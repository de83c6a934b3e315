#include "shapedos/dos.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "shapedos/discretize.hpp"
#include "shapedos/errors.hpp"

namespace shapedos {

std::string to_string(MethodMode mode) {
  switch (mode) {
    case MethodMode::automatic: return "auto";
    case MethodMode::dense: return "dense";
    case MethodMode::stochastic: return "stochastic";
  }
  return "auto";
}

MethodMode method_mode_from_string(const std::string& name) {
  if (name == "auto") return MethodMode::automatic;
  if (name == "dense") return MethodMode::dense;
  if (name == "stochastic") return MethodMode::stochastic;
  throw ConfigError("unknown method '" + name + "' (expected auto, dense or stochastic)");
}

int probe_spacing_for(double t_max, double hbar, double spacing, double factor) {
  if (!(factor > 0.0)) return 1;
  const double cells = factor * std::sqrt(t_max) * hbar / spacing;
  return std::max(1, static_cast<int>(std::ceil(cells - 1e-9)));
}

std::uint64_t cell_seed(std::uint64_t seed, double hbar) {
  // splitmix64 finalizer
  std::uint64_t z = seed ^ std::bit_cast<std::uint64_t>(hbar);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double oracle_laplace(const Potential& potential, const Domain& domain, double t, double tol) {
  if (!(t > 0.0)) throw PreconditionError("oracle requires t > 0");
  const double d = domain.dimension();
  const double heat = std::pow(4.0 * std::numbers::pi * t, -0.5 * d);
  return heat * exp_mean(potential, domain, t, tol);
}

namespace {

TraceMethod choose_method(std::size_t nodes, const MethodPolicy& policy) {
  switch (policy.mode) {
    case MethodMode::dense: return TraceMethod::dense;
    case MethodMode::stochastic: return TraceMethod::stochastic;
    case MethodMode::automatic: break;
  }
  return nodes <= policy.dense_cap ? TraceMethod::dense : TraceMethod::stochastic;
}

std::vector<HeatTraceEstimate> compute_traces(const DiscreteHamiltonian& h,
                                              std::span<const double> ts, TraceMethod method,
                                              const MethodPolicy& policy, int probe_spacing,
                                              std::uint64_t seed) {
  if (method == TraceMethod::dense) return heat_traces_dense(h, ts, policy.dense_cap);
  StochasticOptions options;
  options.probes = policy.probes;
  options.degree = policy.degree;
  options.poly_tolerance = policy.poly_tolerance;
  options.probe_spacing = probe_spacing;
  options.threads = policy.threads;
  return heat_traces_stochastic(h, ts, options, seed);
}

// Operator for one hbar (or one scale R = 1/hbar) together with the factor
// turning a trace into a normalized trace.
struct CellOperator {
  std::unique_ptr<DiscreteHamiltonian> h;
  double hbar = 0.0;
  double spacing = 0.0;
  double normalization = 0.0;
};

CellOperator make_operator(const Domain& domain, const Potential& potential, double scale,
                           double eta, LaplacePath path) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw PreconditionError("scale R must be positive");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw PreconditionError("eta must be positive");
  const bool direct = path == LaplacePath::direct || !potential.is_homogeneous();
  CellOperator op;
  op.hbar = 1.0 / scale;
  if (direct) {
    const Domain large = domain.scaled(scale);
    op.spacing = eta;
    auto grid = std::make_shared<const Grid>(build_grid(large, eta));
    op.h = std::make_unique<DiscreteHamiltonian>(assemble(grid, potential, Hbar::from_value(1.0)));
    op.normalization = 1.0 / large.volume();
  } else {
    op.spacing = eta / scale;
    auto grid = std::make_shared<const Grid>(build_grid(domain, op.spacing));
    op.h = std::make_unique<DiscreteHamiltonian>(assemble(grid, potential, Hbar::from_scale(scale)));
    op.normalization = std::pow(op.hbar, domain.dimension()) / domain.volume();
  }
  return op;
}

LaplaceCell normalize(const HeatTraceEstimate& e, const CellOperator& op) {
  LaplaceCell c;
  c.t = e.t;
  c.hbar = op.hbar;
  c.spacing = op.spacing;
  c.value = e.value * op.normalization;
  c.std_error = e.std_error * op.normalization;
  c.truncation_bound = e.truncation_bound * op.normalization;
  c.estimate = e;
  return c;
}

double max_of(std::span<const double> ts) {
  double m = 0.0;
  for (double t : ts) {
    if (!(t > 0.0) || !std::isfinite(t)) throw PreconditionError("every t must be positive");
    m = std::max(m, t);
  }
  return m;
}

}  // namespace

std::vector<LaplaceCell> finite_volume_laplace(const Domain& domain, const Potential& potential,
                                               double scale, std::span<const double> ts,
                                               double eta, const MethodPolicy& policy,
                                               std::uint64_t seed, LaplacePath path) {
  if (ts.empty()) throw PreconditionError("t list is empty");
  const double t_max = max_of(ts);
  const CellOperator op = make_operator(domain, potential, scale, eta, path);
  const TraceMethod method = choose_method(op.h->size(), policy);
  const int spacing = probe_spacing_for(t_max, op.hbar, op.spacing, policy.probe_spacing_factor);
  const auto estimates = compute_traces(*op.h, ts, method, policy, spacing, seed);
  std::vector<LaplaceCell> out;
  for (const auto& e : estimates) out.push_back(normalize(e, op));
  return out;
}

double finite_volume_laplace(const Domain& domain, const Potential& potential, double scale,
                             double t, double eta, const MethodPolicy& policy,
                             std::uint64_t seed) {
  const double ts[1] = {t};
  return finite_volume_laplace(domain, potential, scale, ts, eta, policy, seed).front().value;
}

bool DOSReport::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const SweepCell& c) { return c.ok; });
}

double richardson(double hbar_coarse, double value_coarse, double hbar_fine, double value_fine) {
  return (hbar_coarse * value_fine - hbar_fine * value_coarse) / (hbar_coarse - hbar_fine);
}

namespace {

void validate(const SweepSpec& spec) {
  if (spec.ts.empty()) throw PreconditionError("t list is empty");
  if (spec.hbars.empty()) throw PreconditionError("hbar list is empty");
  max_of(spec.ts);
  for (std::size_t j = 0; j < spec.hbars.size(); ++j) {
    if (!(spec.hbars[j] > 0.0) || !std::isfinite(spec.hbars[j])) {
      throw PreconditionError("every hbar must be positive");
    }
    if (j > 0 && !(spec.hbars[j] < spec.hbars[j - 1])) {
      throw PreconditionError("hbar list must be strictly descending");
    }
  }
  if (!(spec.eta > 0.0)) throw PreconditionError("eta must be positive");
}

nlohmann::json cell_key(const nlohmann::json& domain, const nlohmann::json& potential,
                        double hbar, double t, double spacing, double eta, TraceMethod method,
                        const MethodPolicy& policy, int probe_spacing, std::uint64_t seed) {
  const bool stochastic = method == TraceMethod::stochastic;
  return nlohmann::json{
      {"domain", domain},
      {"potential", potential},
      {"hbar", hbar},
      {"t", t},
      {"h", spacing},
      {"eta", eta},
      {"method", to_string(method)},
      {"seed", stochastic ? seed : 0},
      {"degree", stochastic ? policy.degree : 0},
      {"probes", stochastic ? policy.probes : 0},
      {"probe_spacing", stochastic ? probe_spacing : 0},
      {"poly_tolerance", stochastic ? policy.poly_tolerance : 0.0},
  };
}

}  // namespace

DOSReport sweep(const Domain& domain, const Potential& potential, const SweepSpec& spec,
                CellStore* store) {
  validate(spec);
  DOSReport report;
  report.domain = domain.descriptor();
  report.potential = potential.descriptor();
  report.ts = spec.ts;
  report.hbars = spec.hbars;
  report.eta = spec.eta;
  report.policy = spec.policy;
  report.seed = spec.seed;
  const std::size_t nt = spec.ts.size();
  const std::size_t nh = spec.hbars.size();
  report.cells.resize(nt * nh);
  const double t_max = max_of(spec.ts);

  report.oracle.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    try {
      report.oracle[i] = oracle_laplace(potential, domain, spec.ts[i]);
    } catch (const Error&) {
      report.oracle[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }

  for (std::size_t j = 0; j < nh; ++j) {
    const double hbar = spec.hbars[j];
    const std::uint64_t seed = cell_seed(spec.seed, hbar);
    for (std::size_t i = 0; i < nt; ++i) {
      SweepCell& c = report.cells[i * nh + j];
      c.t = spec.ts[i];
      c.hbar = hbar;
      c.spacing = hbar * spec.eta;
    }
    try {
      const CellOperator op =
          make_operator(domain, potential, 1.0 / hbar, spec.eta, LaplacePath::rescaled);
      const TraceMethod method = choose_method(op.h->size(), spec.policy);
      const int spacing =
          probe_spacing_for(t_max, op.hbar, op.spacing, spec.policy.probe_spacing_factor);
      std::vector<nlohmann::json> keys(nt);
      std::vector<std::optional<HeatTraceEstimate>> found(nt);
      std::vector<double> missing;
      for (std::size_t i = 0; i < nt; ++i) {
        keys[i] = cell_key(report.domain, report.potential, hbar, spec.ts[i], op.spacing,
                           spec.eta, method, spec.policy, spacing, seed);
        if (store) found[i] = store->load(keys[i]);
        if (!found[i]) missing.push_back(spec.ts[i]);
      }
      std::vector<HeatTraceEstimate> fresh;
      if (!missing.empty()) {
        fresh = compute_traces(*op.h, missing, method, spec.policy, spacing, seed);
      }
      std::size_t next = 0;
      for (std::size_t i = 0; i < nt; ++i) {
        SweepCell& c = report.cells[i * nh + j];
        HeatTraceEstimate e;
        if (found[i]) {
          e = *found[i];
          c.cached = true;
        } else {
          e = fresh[next++];
          if (store) store->store(keys[i], e);
        }
        const LaplaceCell lc = normalize(e, op);
        c.spacing = lc.spacing;
        c.value = lc.value;
        c.std_error = lc.std_error;
        c.truncation_bound = lc.truncation_bound;
        c.estimate = e;
        c.ok = std::isfinite(c.value) && c.value > 0.0;
        if (!c.ok) c.error = "non-positive normalized trace";
      }
    } catch (const Error& err) {
      for (std::size_t i = 0; i < nt; ++i) {
        SweepCell& c = report.cells[i * nh + j];
        c.ok = false;
        c.error = err.what();
      }
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < nh; ++j) {
      SweepCell& c = report.cells[i * nh + j];
      if (!c.ok) {
        c.abs_discrepancy = c.rel_discrepancy = nan;
        continue;
      }
      c.abs_discrepancy = std::abs(c.value - report.oracle[i]);
      c.rel_discrepancy = c.abs_discrepancy / report.oracle[i];
    }
  }

  report.raw = nh < 2;
  if (!report.raw) {
    report.extrapolated.assign(nt, nan);
    report.extrapolated_abs_discrepancy.assign(nt, nan);
    report.extrapolated_rel_discrepancy.assign(nt, nan);
    for (std::size_t i = 0; i < nt; ++i) {
      const SweepCell& coarse = report.cell(i, nh - 2);
      const SweepCell& fine = report.cell(i, nh - 1);
      if (!coarse.ok || !fine.ok) continue;
      const double v = richardson(coarse.hbar, coarse.value, fine.hbar, fine.value);
      report.extrapolated[i] = v;
      report.extrapolated_abs_discrepancy[i] = std::abs(v - report.oracle[i]);
      report.extrapolated_rel_discrepancy[i] = report.extrapolated_abs_discrepancy[i] / report.oracle[i];
    }
  }
  return report;
}

MeanExtraction extract_mean(int dimension, double t1, double laplace1, double t2,
                            double laplace2) {
  if (!(t1 > 0.0) || !(t2 > 0.0) || t1 == t2) {
    throw PreconditionError("mean extraction needs two distinct positive t");
  }
  if (!(laplace1 > 0.0) || !(laplace2 > 0.0)) {
    throw NumericalError("mean extraction needs positive Laplace values");
  }
  auto y = [dimension](double t, double l) {
    return -std::log(std::pow(4.0 * std::numbers::pi * t, 0.5 * dimension) * l) / t;
  };
  MeanExtraction m;
  m.fit_t = {t1, t2};
  m.fit_y = {y(t1, laplace1), y(t2, laplace2)};
  const double slope = (m.fit_y[1] - m.fit_y[0]) / (t2 - t1);
  m.mean = m.fit_y[0] - slope * t1;
  return m;
}

namespace {

CounterexampleSide side(const Domain& domain, const Potential& potential,
                        const CounterexampleSpec& spec, CellStore* store) {
  CounterexampleSide s;
  s.domain = domain.descriptor();
  s.quadrature_mean = mean_over_domain(potential, domain);
  for (double t : spec.sweep.ts) s.oracle.push_back(oracle_laplace(potential, domain, t));
  if (spec.oracle_fit_t.size() != 2) throw PreconditionError("oracle fit needs exactly two t");
  const double f1 = spec.oracle_fit_t[0];
  const double f2 = spec.oracle_fit_t[1];
  s.oracle_mean = extract_mean(domain.dimension(), f1, oracle_laplace(potential, domain, f1), f2,
                               oracle_laplace(potential, domain, f2));
  if (spec.oracle_only) return s;

  s.report = sweep(domain, potential, spec.sweep, store);
  const DOSReport& r = *s.report;
  if (r.ts.size() < 2) return s;
  std::vector<std::size_t> order(r.ts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return r.ts[x] < r.ts[y]; });
  const std::size_t i1 = order[0];
  const std::size_t i2 = order[1];
  const std::size_t fine = r.hbars.size() - 1;
  const SweepCell& c1 = r.cell(i1, fine);
  const SweepCell& c2 = r.cell(i2, fine);
  if (c1.ok && c2.ok) {
    s.empirical_mean = extract_mean(domain.dimension(), r.ts[i1], c1.value, r.ts[i2], c2.value);
  }
  if (!r.raw && std::isfinite(r.extrapolated[i1]) && std::isfinite(r.extrapolated[i2]) &&
      r.extrapolated[i1] > 0.0 && r.extrapolated[i2] > 0.0) {
    s.extrapolated_mean = extract_mean(domain.dimension(), r.ts[i1], r.extrapolated[i1],
                                       r.ts[i2], r.extrapolated[i2]);
  }
  return s;
}

}  // namespace

CounterexampleReport counterexample(const Domain& domain_a, const Domain& domain_b,
                                    const Potential& potential, const CounterexampleSpec& spec,
                                    CellStore* store) {
  if (domain_a.dimension() != domain_b.dimension()) {
    throw PreconditionError("compared domains must share a dimension");
  }
  validate(spec.sweep);
  CounterexampleReport r;
  r.potential = potential.descriptor();
  r.ts = spec.sweep.ts;
  r.hbars = spec.sweep.hbars;
  r.a = side(domain_a, potential, spec, store);
  r.b = side(domain_b, potential, spec, store);
  r.oracle_mean_gap = r.a.oracle_mean.mean - r.b.oracle_mean.mean;
  if (r.a.empirical_mean && r.b.empirical_mean) {
    r.empirical_mean_gap = r.a.empirical_mean->mean - r.b.empirical_mean->mean;
  }
  for (std::size_t i = 0; i < r.ts.size(); ++i) {
    const double diff = std::abs(r.a.oracle[i] - r.b.oracle[i]) /
                        std::max(std::abs(r.a.oracle[i]), std::abs(r.b.oracle[i]));
    r.oracle_max_relative_difference = std::max(r.oracle_max_relative_difference, diff);
  }
  r.measures_differ = r.oracle_max_relative_difference > 1e-9;
  return r;
}

}  // namespace shapedos
