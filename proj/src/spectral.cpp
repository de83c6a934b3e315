#include "shapedos/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

#include "shapedos/chebyshev.hpp"
#include "shapedos/errors.hpp"

namespace shapedos {

std::string to_string(TraceMethod method) {
  return method == TraceMethod::dense ? "dense" : "stochastic";
}

TraceMethod trace_method_from_string(const std::string& name) {
  if (name == "dense") return TraceMethod::dense;
  if (name == "stochastic") return TraceMethod::stochastic;
  throw ConfigError("unknown trace method '" + name + "'");
}

std::vector<double> eigen_dense(const DiscreteHamiltonian& h, std::size_t dense_cap) {
  if (h.size() > dense_cap) {
    throw PreconditionError("operator size " + std::to_string(h.size()) +
                            " exceeds the dense cap " + std::to_string(dense_cap));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.dense(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  const Eigen::VectorXd& w = solver.eigenvalues();
  std::vector<double> out(w.data(), w.data() + w.size());
  std::sort(out.begin(), out.end());
  return out;
}

HeatTraceEstimate heat_trace_from_spectrum(std::span<const double> eigenvalues, double t) {
  if (!(t > 0.0)) throw PreconditionError("heat trace requires t > 0");
  HeatTraceEstimate e;
  e.t = t;
  e.method = TraceMethod::dense;
  e.nodes = eigenvalues.size();
  for (double lambda : eigenvalues) e.value += std::exp(-t * lambda);
  return e;
}

HeatTraceEstimate heat_trace_dense(const DiscreteHamiltonian& h, double t, std::size_t dense_cap) {
  const std::vector<double> w = eigen_dense(h, dense_cap);
  return heat_trace_from_spectrum(w, t);
}

std::vector<HeatTraceEstimate> heat_traces_dense(const DiscreteHamiltonian& h,
                                                 std::span<const double> ts,
                                                 std::size_t dense_cap) {
  const std::vector<double> w = eigen_dense(h, dense_cap);
  std::vector<HeatTraceEstimate> out;
  out.reserve(ts.size());
  for (double t : ts) out.push_back(heat_trace_from_spectrum(w, t));
  return out;
}

namespace {

constexpr int kBlock = 8;

// One probe restricted to one color class.
struct WorkItem {
  int probe;
  int color;
};

struct ScaledOperator {
  std::size_t n = 0;
  int faces = 0;
  std::vector<double> diagonal;       // (H_ii - center) / radius
  double off = 0.0;                   // -coupling / radius
  std::vector<std::int32_t> neighbor;  // padded: missing -> n (a zero row)
};

ScaledOperator scale_operator(const DiscreteHamiltonian& h, double lower, double upper) {
  ScaledOperator op;
  op.n = h.size();
  op.faces = 2 * h.dimension();
  const double center = 0.5 * (upper + lower);
  const double radius = 0.5 * (upper - lower);
  op.diagonal.resize(op.n);
  for (std::size_t i = 0; i < op.n; ++i) op.diagonal[i] = (h.diagonal()[i] - center) / radius;
  op.off = -h.coupling() / radius;
  op.neighbor.resize(op.n * op.faces);
  for (std::size_t i = 0; i < op.n; ++i) {
    for (int f = 0; f < op.faces; ++f) {
      const std::int32_t j = h.grid().neighbor(i, f);
      op.neighbor[i * op.faces + f] = j >= 0 ? j : static_cast<std::int32_t>(op.n);
    }
  }
  return op;
}

// next = 2 A cur - prev (written over prev) while accumulating
// <cur, cur> and <next, cur> per column. With First it computes next = A cur.
template <int Faces, bool First>
void chebyshev_step(const ScaledOperator& op, const double* __restrict cur,
                    double* __restrict prev, double* __restrict cur_cur,
                    double* __restrict next_cur) {
  double cc[kBlock] = {};
  double nc[kBlock] = {};
  const double off = op.off;
  const double* __restrict diag = op.diagonal.data();
  const std::int32_t* __restrict table = op.neighbor.data();
  for (std::size_t i = 0; i < op.n; ++i) {
    const double* x = cur + i * kBlock;
    double acc[kBlock];
    for (int b = 0; b < kBlock; ++b) acc[b] = diag[i] * x[b];
    const std::int32_t* nb = table + i * Faces;
    for (int f = 0; f < Faces; ++f) {
      const double* y = cur + static_cast<std::size_t>(nb[f]) * kBlock;
      for (int b = 0; b < kBlock; ++b) acc[b] += off * y[b];
    }
    double* out = prev + i * kBlock;
    for (int b = 0; b < kBlock; ++b) {
      const double next = First ? acc[b] : 2.0 * acc[b] - out[b];
      out[b] = next;
      cc[b] += x[b] * x[b];
      nc[b] += next * x[b];
    }
  }
  for (int b = 0; b < kBlock; ++b) {
    cur_cur[b] = cc[b];
    next_cur[b] = nc[b];
  }
}

template <bool First>
void chebyshev_step(const ScaledOperator& op, const double* cur, double* prev,
                    std::array<double, kBlock>& cur_cur, std::array<double, kBlock>& next_cur) {
  double* cc = cur_cur.data();
  double* nc = next_cur.data();
  switch (op.faces) {
    case 2: return chebyshev_step<2, First>(op, cur, prev, cc, nc);
    case 4: return chebyshev_step<4, First>(op, cur, prev, cc, nc);
    case 6: return chebyshev_step<6, First>(op, cur, prev, cc, nc);
    default: break;
  }
  // Generic dimension.
  cur_cur.fill(0.0);
  next_cur.fill(0.0);
  for (std::size_t i = 0; i < op.n; ++i) {
    const double* x = cur + i * kBlock;
    double acc[kBlock];
    for (int b = 0; b < kBlock; ++b) acc[b] = op.diagonal[i] * x[b];
    for (int f = 0; f < op.faces; ++f) {
      const double* y = cur + static_cast<std::size_t>(op.neighbor[i * op.faces + f]) * kBlock;
      for (int b = 0; b < kBlock; ++b) acc[b] += op.off * y[b];
    }
    double* out = prev + i * kBlock;
    for (int b = 0; b < kBlock; ++b) {
      const double next = First ? acc[b] : 2.0 * acc[b] - out[b];
      out[b] = next;
      cur_cur[b] += x[b] * x[b];
      next_cur[b] += next * x[b];
    }
  }
}

std::vector<int> color_of_nodes(const Grid& grid, int spacing, int& color_count) {
  const int d = grid.dimension();
  color_count = 1;
  for (int a = 0; a < d; ++a) color_count *= spacing;
  std::vector<int> colors(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    int c = 0;
    for (int a = d - 1; a >= 0; --a) {
      const int k = ((grid.lattice(i)[a] % spacing) + spacing) % spacing;
      c = c * spacing + k;
    }
    colors[i] = c;
  }
  return colors;
}

std::vector<double> rademacher(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::vector<double> z(n);
  std::uint64_t bits = 0;
  int left = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (left == 0) {
      bits = engine();
      left = 64;
    }
    z[i] = (bits & 1u) ? 1.0 : -1.0;
    bits >>= 1;
    --left;
  }
  return z;
}

}  // namespace

std::vector<std::vector<double>> chebyshev_moments(const DiscreteHamiltonian& h, double lower,
                                                   double upper, int count,
                                                   const StochasticOptions& options,
                                                   std::uint64_t seed) {
  if (options.probes < 1) throw PreconditionError("probe count must be >= 1");
  if (options.probe_spacing < 1) throw PreconditionError("probe spacing must be >= 1");
  if (count < 2) count = 2;
  const ScaledOperator op = scale_operator(h, lower, upper);
  const std::size_t n = op.n;

  int colors_total = 0;
  const std::vector<int> colors = color_of_nodes(h.grid(), options.probe_spacing, colors_total);
  std::vector<std::vector<std::int32_t>> members(colors_total);
  for (std::size_t i = 0; i < n; ++i) members[colors[i]].push_back(static_cast<std::int32_t>(i));

  std::vector<WorkItem> items;
  for (int p = 0; p < options.probes; ++p) {
    for (int c = 0; c < colors_total; ++c) {
      if (!members[c].empty()) items.push_back({p, c});
    }
  }
  std::vector<std::vector<double>> signs(options.probes);
  for (int p = 0; p < options.probes; ++p) {
    signs[p] = rademacher(n, seed ^ static_cast<std::uint64_t>(p));
  }

  // Moments per work item; merged per probe in item order afterwards.
  std::vector<double> item_moments(items.size() * count, 0.0);
  const std::size_t blocks = (items.size() + kBlock - 1) / kBlock;
  const int half_steps = count / 2;

  auto run_block = [&](std::size_t block, std::vector<double>& t0, std::vector<double>& t1) {
    std::fill(t0.begin(), t0.end(), 0.0);
    const std::size_t first = block * kBlock;
    const std::size_t last = std::min(items.size(), first + kBlock);
    for (std::size_t it = first; it < last; ++it) {
      const int b = static_cast<int>(it - first);
      const auto& z = signs[items[it].probe];
      for (std::int32_t i : members[items[it].color]) t0[static_cast<std::size_t>(i) * kBlock + b] = z[i];
    }
    std::array<double, kBlock> mu0{}, mu1{}, cc{}, nc{};
    // t1 = A t0; mu0 = <t0, t0>, mu1 = <t1, t0>.
    std::fill(t1.begin(), t1.end(), 0.0);
    chebyshev_step<true>(op, t0.data(), t1.data(), mu0, mu1);
    auto store = [&](int k, const std::array<double, kBlock>& v) {
      if (k >= count) return;
      for (std::size_t it = first; it < last; ++it) item_moments[it * count + k] = v[it - first];
    };
    store(0, mu0);
    store(1, mu1);
    double* cur = t1.data();
    double* prev = t0.data();
    for (int k = 1; k <= half_steps; ++k) {
      // prev <- T_{k+1} = 2 A T_k - T_{k-1}
      chebyshev_step<false>(op, cur, prev, cc, nc);
      std::array<double, kBlock> even{}, odd{};
      for (int b = 0; b < kBlock; ++b) {
        even[b] = 2.0 * cc[b] - mu0[b];
        odd[b] = 2.0 * nc[b] - mu1[b];
      }
      store(2 * k, even);
      store(2 * k + 1, odd);
      std::swap(cur, prev);
    }
  };

  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(blocks)));
  const std::size_t rows = (n + 1) * kBlock;
  if (threads == 1) {
    std::vector<double> t0(rows), t1(rows);
    for (std::size_t b = 0; b < blocks; ++b) run_block(b, t0, t1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        std::vector<double> t0(rows), t1(rows);
        for (std::size_t b = w; b < blocks; b += threads) run_block(b, t0, t1);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<std::vector<double>> per_probe(options.probes, std::vector<double>(count, 0.0));
  for (std::size_t it = 0; it < items.size(); ++it) {
    auto& row = per_probe[items[it].probe];
    for (int k = 0; k < count; ++k) row[k] += item_moments[it * count + k];
  }
  return per_probe;
}

std::vector<HeatTraceEstimate> heat_traces_stochastic(const DiscreteHamiltonian& h,
                                                      std::span<const double> ts,
                                                      const StochasticOptions& options,
                                                      std::uint64_t seed) {
  if (options.probes < 8) throw PreconditionError("stochastic trace needs at least 8 probes");
  const double lower = h.lambda_min_bound();
  const double upper = h.lambda_max();
  std::vector<ChebyshevExpansion> expansions;
  int max_degree = 1;
  for (double t : ts) {
    if (!(t > 0.0)) throw PreconditionError("heat trace requires t > 0");
    expansions.push_back(exp_expansion(t, lower, upper, options.poly_tolerance, options.degree));
    max_degree = std::max(max_degree, expansions.back().degree());
  }
  // Moments are generated in pairs, so round the count up to even.
  const int count = 2 * ((max_degree + 2) / 2);
  const auto moments = chebyshev_moments(h, lower, upper, count, options, seed);

  std::vector<HeatTraceEstimate> out;
  const double n = static_cast<double>(h.size());
  const double probes = static_cast<double>(options.probes);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& e = expansions[i];
    std::vector<double> samples(options.probes, 0.0);
    for (int p = 0; p < options.probes; ++p) {
      double s = 0.0;
      for (int k = 0; k <= e.degree(); ++k) s += e.coefficients[k] * moments[p][k];
      samples[p] = s;
    }
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= probes;
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= (probes - 1.0);

    HeatTraceEstimate est;
    est.t = ts[i];
    est.value = mean;
    est.method = TraceMethod::stochastic;
    est.std_error = std::sqrt(var / probes);
    est.truncation_bound = n * e.tail_bound;
    est.probes = options.probes;
    est.degree = e.degree();
    est.seed = seed;
    est.probe_spacing = options.probe_spacing;
    est.nodes = h.size();
    out.push_back(est);
  }
  return out;
}

HeatTraceEstimate heat_trace_stochastic(const DiscreteHamiltonian& h, double t,
                                        const StochasticOptions& options, std::uint64_t seed) {
  const double ts[1] = {t};
  return heat_traces_stochastic(h, ts, options, seed).front();
}

}  // namespace shapedos
