#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "shapedos/cli.hpp"
#include "shapedos/commands.hpp"
#include "shapedos/discretize.hpp"
#include "shapedos/dos.hpp"
#include "shapedos/ids.hpp"
#include "shapedos/spectral.hpp"

using namespace shapedos;
using nlohmann::json;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

constexpr double kMeanBox = 0.3465735903;
constexpr double kMeanBall = 0.3183098862;

constexpr double kC1MeanTolerance = 1e-6;
constexpr double kC1Seconds = 10.0;
constexpr double kC2EntryTolerance = 1e-15;
constexpr double kC2TraceTolerance = 1e-10;
constexpr std::size_t kC2MaxNodes = 2000;
constexpr double kC2Seconds = 60.0;
constexpr double kC3ExtrapolationTolerance = 0.01;
constexpr double kC3Seconds = 300.0;
constexpr double kC4Tolerance = 0.02;
constexpr double kC45Seconds = 600.0;
constexpr double kC5OracleTolerance = 1e-3;
constexpr double kC5Separation = 0.014;
constexpr int kC6Runs = 100;
constexpr int kC6Required = 95;
constexpr int kC6Probes = 32;
constexpr double kC6Seconds = 120.0;
constexpr double kC7SurfaceTolerance = 5e-3;
constexpr double kC7FreeTolerance = 1e-3;
constexpr double kC7Seconds = 60.0;
constexpr double kC8Speedup = 10.0;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  fmt::print("criterion {}: {}  {}\n", id, pass ? "PASS" : "FAIL", detail);
  std::fflush(stdout);
}

SweepSpec stochastic_spec(std::vector<double> ts, std::vector<double> hbars, std::uint64_t seed) {
  SweepSpec s;
  s.ts = std::move(ts);
  s.hbars = std::move(hbars);
  s.eta = kDefaultEta;
  s.policy.mode = MethodMode::stochastic;
  s.seed = seed;
  return s;
}

void criterion1() {
  const Stopwatch w;
  const Potential v = example_potential(2);
  const double box = mean_over_domain(v, Domain::box(2, 1.0));
  const double ball = mean_over_domain(v, Domain::ball(2, 1.0));
  const double eb = std::abs(box - kMeanBox), ec = std::abs(ball - kMeanBall);
  const double secs = w.seconds();
  report(1, eb <= kC1MeanTolerance && ec <= kC1MeanTolerance && secs < kC1Seconds,
         fmt::format("box mean {:.10f} (err {:.1e}), ball mean {:.10f} (err {:.1e}), {:.2f} s", box, eb,
                     ball, ec, secs));
}

void criterion2() {
  const Stopwatch w;
  const Potential v = example_potential(2);
  const double ts[2] = {0.5, 1.0};
  bool pass = true;
  double worst_entry = 0.0, worst_trace = 0.0;
  std::size_t largest = 0;
  struct Case {
    Domain domain;
    double spacing;
  };
  // Spacings keep the R Omega grids at or under the node limit.
  const Case cases[2] = {{Domain::box(2, 1.0), 0.05}, {Domain::ball(2, 1.0), 0.045}};
  for (const Case& c : cases) {
    for (double r : {2.0, 3.0}) {
      const RescaledPair pair = rescaled_pair(c.domain, v, r, c.spacing);
      const PairDeviation dev = compare_pair(pair);
      largest = std::max(largest, pair.large.size());
      pass = pass && dev.same_pattern && pair.large.size() <= kC2MaxNodes;
      worst_entry = std::max(worst_entry, dev.max_entry_difference);
      const auto a = heat_traces_dense(pair.large, ts);
      const auto b = heat_traces_dense(pair.small, ts);
      for (int i = 0; i < 2; ++i) {
        worst_trace = std::max(worst_trace, std::abs(a[i].value - b[i].value) / a[i].value);
      }
    }
  }
  const double secs = w.seconds();
  pass = pass && worst_entry <= kC2EntryTolerance && worst_trace <= kC2TraceTolerance &&
         secs < kC2Seconds;
  report(2, pass,
         fmt::format("max |dH| {:.1e}, max trace dev {:.1e}, largest N {}, {:.1f} s", worst_entry,
                     worst_trace, largest, secs));
}

void criterion3() {
  const Stopwatch w;
  const DOSReport r = sweep(Domain::box(2, 1.0), Potential::constant(0.0),
                            stochastic_spec({1.0}, {0.2, 0.1, 0.05}, 2024));
  const double secs = w.seconds();
  bool pass = r.all_ok();
  std::string cells;
  for (std::size_t j = 0; j < r.hbars.size(); ++j) {
    cells += fmt::format("hbar {} -> {:.6f} ({:+.2f}%), ", r.hbars[j], r.cell(0, j).value,
                         100.0 * (r.cell(0, j).value / r.oracle[0] - 1.0));
    if (j > 0) pass = pass && r.cell(0, j).rel_discrepancy < r.cell(0, j - 1).rel_discrepancy;
  }
  const double rel = r.extrapolated_rel_discrepancy.empty() ? NAN : r.extrapolated_rel_discrepancy[0];
  pass = pass && rel <= kC3ExtrapolationTolerance && secs < kC3Seconds;
  report(3, pass,
         fmt::format("{}extrapolated {:.6f} vs {:.6f} ({:.2f}%), {:.0f} s", cells, r.extrapolated[0],
                     r.oracle[0], 100.0 * rel, secs));
}

// Criteria 4 and 5 read the same two sweeps.
void criteria4and5() {
  const Stopwatch w;
  CounterexampleSpec spec;
  spec.sweep = stochastic_spec({0.25, 0.5, 1.0}, {0.2, 0.1, 0.05}, 7);
  const CounterexampleReport r =
      counterexample(Domain::box(2, 1.0), Domain::ball(2, 1.0), example_potential(2), spec);
  const double secs = w.seconds();

  bool pass4 = r.a.report && r.b.report && secs < kC45Seconds;
  std::string detail4;
  for (const auto* side : {&r.a, &r.b}) {
    const DOSReport& rep = *side->report;
    const auto at = std::find(rep.ts.begin(), rep.ts.end(), 1.0) - rep.ts.begin();
    const double rel = rep.extrapolated_rel_discrepancy[at];
    pass4 = pass4 && rep.all_ok() && rel <= kC4Tolerance;
    detail4 += fmt::format("{} {:.6f} vs oracle {:.6f} ({:+.2f}%), ", side == &r.a ? "box" : "ball",
                           rep.extrapolated[at], rep.oracle[at],
                           100.0 * (rep.extrapolated[at] / rep.oracle[at] - 1.0));
  }
  report(4, pass4, fmt::format("{}{:.0f} s (shared with 5)", detail4, secs));

  const double oa = std::abs(r.a.oracle_mean.mean - kMeanBox);
  const double ob = std::abs(r.b.oracle_mean.mean - kMeanBall);
  const double gap = r.empirical_mean_gap.value_or(0.0);
  const bool pass5 = oa <= kC5OracleTolerance && ob <= kC5OracleTolerance &&
                     std::abs(gap) > kC5Separation && secs < kC45Seconds;
  report(5, pass5,
         fmt::format("oracle means {:.6f} / {:.6f} (err {:.1e} / {:.1e}); discretized hbar = 0.05 "
                     "means {:.4f} / {:.4f}, gap {:.4f}; {:.0f} s",
                     r.a.oracle_mean.mean, r.b.oracle_mean.mean, oa, ob,
                     r.a.empirical_mean ? r.a.empirical_mean->mean : NAN,
                     r.b.empirical_mean ? r.b.empirical_mean->mean : NAN, gap, secs));
}

void criterion6() {
  const Stopwatch w;
  // 30 x 30 interior nodes.
  const DiscreteHamiltonian h =
      assemble(build_grid(Domain::box(2, 1.0), 2.0 / 31.0), example_potential(2), Hbar::from_value(0.2));
  const double t = 1.0;
  const double exact = heat_trace_dense(h, t).value;
  StochasticOptions o;
  o.probes = kC6Probes;
  int within = 0;
  for (int run = 0; run < kC6Runs; ++run) {
    const HeatTraceEstimate e = heat_trace_stochastic(h, t, o, 1000 + run);
    if (std::abs(e.value - exact) <= 3.0 * e.std_error + e.truncation_bound) ++within;
  }
  const double secs = w.seconds();
  report(6, h.size() == 900 && within >= kC6Required && secs < kC6Seconds,
         fmt::format("N {}, {}/{} runs within 3 stderr + truncation, {:.1f} s", h.size(), within, kC6Runs,
                     secs));
}

void criterion7() {
  const Stopwatch w;
  const Potential v = example_potential(2);
  const Domain ball = Domain::ball(2, 1.0);
  const auto grid = linear_grid(0.0, 40.0, 0.05);
  const IDSCurve surface = surface_average_ids(v, ball, grid, SurfaceVariant::uniform);
  double worst_surface = 0.0;
  for (double t : {0.5, 1.0, 2.0}) {
    const LaplaceOfIds l = laplace_of_ids(surface, t);
    worst_surface = std::max(worst_surface, std::abs(l.value / oracle_laplace(v, ball, t) - 1.0));
  }
  const auto fine = linear_grid(0.0, 80.0, 0.01);
  double worst_free = 0.0;
  for (int d : {1, 2, 3}) {
    const IDSCurve free = free_ids_curve(fine, 0.0, d);
    for (double t : {0.5, 1.0, 2.0}) {
      const LaplaceOfIds l = laplace_of_ids(free, t);
      worst_free = std::max(worst_free, std::abs(l.value / std::pow(4.0 * pi * t, -0.5 * d) - 1.0));
    }
  }
  const double secs = w.seconds();
  report(7, worst_surface <= kC7SurfaceTolerance && worst_free <= kC7FreeTolerance && secs < kC7Seconds,
         fmt::format("surface vs oracle max rel {:.1e}, free identity max rel {:.1e}, {:.1f} s",
                     worst_surface, worst_free, secs));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double run_sweep(const fs::path& config, const fs::path& cache) {
  const std::string c = config.string(), k = cache.string();
  const char* argv[] = {"shapedos", "sweep", "--config", c.c_str(), "--cache-dir", k.c_str()};
  std::ostringstream out, err;
  const Stopwatch w;
  const int code = run(6, argv, out, err);
  if (code != 0) throw std::runtime_error("sweep failed: " + err.str());
  return w.seconds();
}

void criterion8() {
  const fs::path root = fs::temp_directory_path() / ("shapedos-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  json config{{"domain", {{"kind", "ball"}, {"dimension", 2}, {"parameters", {{"radius", 1.0}}}}},
              {"potential", {{"kind", "example"}}},
              {"t", {0.5, 1.0}},
              {"hbar", {0.2, 0.1}},
              {"method", {{"mode", "stochastic"}}},
              {"seed", 42}};
  config["output"] = (root / "first").string();
  std::ofstream(root / "first.json") << config.dump(2);
  config["output"] = (root / "second").string();
  std::ofstream(root / "second.json") << config.dump(2);
  const double cold = run_sweep(root / "first.json", root / "cache");
  const double warm = run_sweep(root / "second.json", root / "cache");
  const json a = json::parse(slurp(root / "first" / "report.json"));
  const json b = json::parse(slurp(root / "second" / "report.json"));
  const bool same = a["body"].dump() == b["body"].dump() &&
                    slurp(root / "first" / "report.csv") == slurp(root / "second" / "report.csv");
  fs::remove_all(root);
  report(8, same && cold >= kC8Speedup * warm,
         fmt::format("bodies {}, cold {:.2f} s, warm {:.3f} s ({:.0f}x)", same ? "identical" : "DIFFER",
                     cold, warm, cold / warm));
}

}  // namespace

int main() {
  const Stopwatch total;
  criterion1();
  criterion2();
  criterion3();
  criteria4and5();
  criterion6();
  criterion7();
  criterion8();
  fmt::print("acceptance: {} failed, {:.0f} s total\n", failures, total.seconds());
  return failures == 0 ? 0 : 1;
}
