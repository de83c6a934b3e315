#include "shapedos/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "shapedos/cache.hpp"
#include "shapedos/discretize.hpp"
#include "shapedos/errors.hpp"
#include "shapedos/report_io.hpp"

namespace shapedos {

using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json metadata(const std::string& command, const ExperimentConfig& config, double elapsed) {
  return {{"tool", "shapedos"},
          {"version", kVersion},
          {"command", command},
          {"timestamp", utc_timestamp()},
          {"elapsed_seconds", elapsed},
          {"config", config.to_json()}};
}

std::unique_ptr<FileCache> open_cache(const RunOptions& run) {
  if (!run.use_cache) return nullptr;
  return std::make_unique<FileCache>(run.cache_directory);
}

json cache_json(const FileCache* cache) {
  if (!cache) return {{"enabled", false}};
  return {{"enabled", true},
          {"directory", cache->root().string()},
          {"hits", cache->hits()},
          {"misses", cache->misses()}};
}

void log_sweep(const DOSReport& r, std::ostream& log) {
  fmt::print(log, "{:>8} {:>8} {:>10} {:>22} {:>12} {:>10}\n", "t", "hbar", "method", "L", "rel.disc", "cached");
  for (std::size_t i = 0; i < r.ts.size(); ++i) {
    for (std::size_t j = 0; j < r.hbars.size(); ++j) {
      const SweepCell& c = r.cell(i, j);
      if (!c.ok) {
        fmt::print(log, "{:>8} {:>8} failed: {}\n", c.t, c.hbar, c.error);
        continue;
      }
      fmt::print(log, "{:>8} {:>8} {:>10} {:>22.15g} {:>12.4e} {:>10}\n", c.t, c.hbar,
                 to_string(c.estimate.method), c.value, c.rel_discrepancy, c.cached ? "yes" : "no");
    }
    if (!r.raw) {
      fmt::print(log, "{:>8} {:>8} {:>10} {:>22.15g} {:>12.4e}\n", r.ts[i], 0, "richardson",
                 r.extrapolated[i], r.extrapolated_rel_discrepancy[i]);
    }
  }
}

SweepSpec sweep_spec(const ExperimentConfig& config) {
  SweepSpec spec;
  spec.ts = config.ts;
  spec.hbars = config.hbars;
  spec.eta = config.eta;
  spec.policy = config.policy;
  spec.seed = config.seed;
  return spec;
}

}  // namespace

int cmd_oracle(const ExperimentConfig& config, const RunOptions&, std::ostream& log) {
  const Stopwatch watch;
  const Domain domain = config.domain();
  const Potential potential = config.potential();
  const double mean = mean_over_domain(potential, domain);
  std::vector<double> oracle, averages;
  for (double t : config.ts) {
    oracle.push_back(oracle_laplace(potential, domain, t));
    averages.push_back(exp_mean(potential, domain, t));
  }
  const json body{{"domain", domain.descriptor()},
                  {"potential", potential.descriptor()},
                  {"volume", domain.volume()},
                  {"mean", mean},
                  {"t", config.ts},
                  {"exp_mean", averages},
                  {"oracle", oracle}};
  std::string csv = "quantity,t,value\n";
  csv += fmt::format("mean,,{}\n", format_number(mean));
  for (std::size_t i = 0; i < config.ts.size(); ++i) {
    csv += fmt::format("exp_mean,{},{}\n", format_number(config.ts[i]), format_number(averages[i]));
    csv += fmt::format("oracle,{},{}\n", format_number(config.ts[i]), format_number(oracle[i]));
  }
  write_report_json(config.output, metadata("oracle", config, watch.seconds()), body);
  write_text(config.output / "report.csv", csv);
  fmt::print(log, "mean over domain = {:.12f}\n", mean);
  for (std::size_t i = 0; i < config.ts.size(); ++i) {
    fmt::print(log, "t = {:<8} oracle = {:.15g}\n", config.ts[i], oracle[i]);
  }
  return 0;
}

int cmd_sweep(const ExperimentConfig& config, const RunOptions& run, std::ostream& log) {
  const Stopwatch watch;
  const auto cache = open_cache(run);
  const DOSReport report = sweep(config.domain(), config.potential(), sweep_spec(config), cache.get());
  if (cache) cache->write_manifest();
  json meta = metadata("sweep", config, watch.seconds());
  meta["cache"] = cache_json(cache.get());
  write_report_json(config.output, meta, report_body(report));
  write_text(config.output / "report.csv", report_csv(report));
  log_sweep(report, log);
  if (!report.all_ok()) {
    fmt::print(log, "warning: some cells failed; see report.json\n");
    return 3;
  }
  return 0;
}

int cmd_compare(const ExperimentConfig& config, const RunOptions& run, std::ostream& log) {
  const Stopwatch watch;
  const auto b = config.domain_b();
  if (!b) throw ConfigError("/domain_b: missing required field for compare");
  const auto cache = open_cache(run);
  CounterexampleSpec spec;
  spec.sweep = sweep_spec(config);
  spec.oracle_fit_t = config.compare.oracle_fit_t;
  spec.oracle_only = config.compare.oracle_only;
  const CounterexampleReport r =
      counterexample(config.domain(), *b, config.potential(), spec, cache.get());
  if (cache) cache->write_manifest();
  json meta = metadata("compare", config, watch.seconds());
  meta["cache"] = cache_json(cache.get());
  write_report_json(config.output, meta, report_body(r));

  std::string csv = "side,quantity,t,value\n";
  auto side_rows = [&](const char* name, const CounterexampleSide& s) {
    csv += fmt::format("{},quadrature_mean,,{}\n", name, format_number(s.quadrature_mean));
    csv += fmt::format("{},oracle_mean,,{}\n", name, format_number(s.oracle_mean.mean));
    if (s.empirical_mean) {
      csv += fmt::format("{},empirical_mean,,{}\n", name, format_number(s.empirical_mean->mean));
    }
    if (s.extrapolated_mean) {
      csv += fmt::format("{},extrapolated_mean,,{}\n", name, format_number(s.extrapolated_mean->mean));
    }
    for (std::size_t i = 0; i < r.ts.size(); ++i) {
      csv += fmt::format("{},oracle,{},{}\n", name, format_number(r.ts[i]), format_number(s.oracle[i]));
      if (s.report && !s.report->raw) {
        csv += fmt::format("{},extrapolated,{},{}\n", name, format_number(r.ts[i]),
                           format_number(s.report->extrapolated[i]));
      }
    }
    if (s.report) write_text(config.output / fmt::format("sweep_{}.csv", name), report_csv(*s.report));
  };
  side_rows("a", r.a);
  side_rows("b", r.b);
  write_text(config.output / "report.csv", csv);

  fmt::print(log, "mean (quadrature): a = {:.10f}  b = {:.10f}\n", r.a.quadrature_mean, r.b.quadrature_mean);
  fmt::print(log, "mean (oracle fit): a = {:.10f}  b = {:.10f}  gap = {:.6f}\n", r.a.oracle_mean.mean,
             r.b.oracle_mean.mean, r.oracle_mean_gap);
  if (r.empirical_mean_gap) {
    fmt::print(log, "mean (discretized, hbar = {}): a = {:.6f}  b = {:.6f}  gap = {:.6f}\n",
               r.hbars.back(), r.a.empirical_mean->mean, r.b.empirical_mean->mean,
               *r.empirical_mean_gap);
  }
  fmt::print(log, "limiting measures differ: {}\n", r.measures_differ ? "yes" : "no");
  return 0;
}

int cmd_rescale_check(const ExperimentConfig& config, const RunOptions&, std::ostream& log) {
  const Stopwatch watch;
  const Domain domain = config.domain();
  const Potential potential = config.potential();
  if (!potential.is_homogeneous()) {
    throw PreconditionError("rescale-check requires a radially homogeneous potential");
  }
  const double h = config.rescale.spacing;
  MethodPolicy dense = config.policy;
  dense.mode = MethodMode::dense;

  json rows = json::array();
  bool pass = true;
  std::string csv =
      "scale,nodes,same_pattern,max_entry_difference,t,trace_large,trace_small,"
      "trace_relative_deviation,laplace_direct,laplace_rescaled,laplace_relative_deviation\n";
  for (double scale : config.rescale.scales) {
    const RescaledPair pair = rescaled_pair(domain, potential, scale, h);
    const PairDeviation dev = compare_pair(pair);
    if (pair.large.size() > config.policy.dense_cap) {
      throw PreconditionError(fmt::format("rescale-check grid has {} nodes, over the dense cap {}",
                                          pair.large.size(), config.policy.dense_cap));
    }
    const auto large = heat_traces_dense(pair.large, config.rescale.ts, config.policy.dense_cap);
    const auto small = heat_traces_dense(pair.small, config.rescale.ts, config.policy.dense_cap);
    const auto direct = finite_volume_laplace(domain, potential, scale, config.rescale.ts, h * scale,
                                              dense, config.seed, LaplacePath::direct);
    const auto rescaled = finite_volume_laplace(domain, potential, scale, config.rescale.ts,
                                                h * scale, dense, config.seed, LaplacePath::rescaled);
    bool ok = dev.same_pattern && dev.max_entry_difference <= kRescaleEntryTolerance;
    std::vector<double> trace_dev, laplace_dev;
    for (std::size_t i = 0; i < config.rescale.ts.size(); ++i) {
      const double a = std::abs(large[i].value - small[i].value) / std::abs(large[i].value);
      const double b = std::abs(direct[i].value - rescaled[i].value) / std::abs(direct[i].value);
      trace_dev.push_back(a);
      laplace_dev.push_back(b);
      ok = ok && a <= kRescaleTraceTolerance && b <= kRescaleTraceTolerance;
      csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", format_number(scale),
                         pair.large.size(), dev.same_pattern ? 1 : 0,
                         format_number(dev.max_entry_difference),
                         format_number(config.rescale.ts[i]), format_number(large[i].value),
                         format_number(small[i].value), format_number(a),
                         format_number(direct[i].value), format_number(rescaled[i].value),
                         format_number(b));
    }
    pass = pass && ok;
    rows.push_back({{"scale", scale},
                    {"nodes", pair.large.size()},
                    {"same_pattern", dev.same_pattern},
                    {"max_entry_difference", dev.max_entry_difference},
                    {"t", config.rescale.ts},
                    {"trace_relative_deviation", trace_dev},
                    {"laplace_relative_deviation", laplace_dev},
                    {"pass", ok}});
    fmt::print(log, "R = {:<6} N = {:<6} pattern {}  max|dH| = {:.3e}  max trace dev = {:.3e}  {}\n",
               scale, pair.large.size(), dev.same_pattern ? "equal" : "DIFFERENT",
               dev.max_entry_difference, *std::max_element(trace_dev.begin(), trace_dev.end()),
               ok ? "pass" : "FAIL");
  }
  const json body{{"domain", domain.descriptor()},
                  {"potential", potential.descriptor()},
                  {"spacing", h},
                  {"entry_tolerance", kRescaleEntryTolerance},
                  {"trace_tolerance", kRescaleTraceTolerance},
                  {"results", rows},
                  {"pass", pass}};
  write_report_json(config.output, metadata("rescale-check", config, watch.seconds()), body);
  write_text(config.output / "report.csv", csv);
  fmt::print(log, "{}\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : 3;
}

int cmd_ids(const ExperimentConfig& config, const RunOptions&, std::ostream& log) {
  const Stopwatch watch;
  const Domain domain = config.domain();
  const Potential potential = config.potential();
  const int d = domain.dimension();
  const auto grid = linear_grid(config.ids.lambda_min, config.ids.lambda_max, config.ids.lambda_step);

  std::vector<std::pair<std::string, IDSCurve>> curves;
  const double level = potential.kind() == PotentialKind::constant ? potential.constant_value() : 0.0;
  curves.emplace_back("free", free_ids_curve(grid, level, d));
  json skipped = json::object();
  if (potential.is_homogeneous()) {
    curves.emplace_back("surface_uniform", surface_average_ids(potential, domain, grid, SurfaceVariant::uniform,
                                                               config.ids.resolution));
    curves.emplace_back("surface_weighted",
                        surface_average_ids(potential, domain, grid, SurfaceVariant::cone_weighted,
                                            config.ids.resolution));
  } else {
    skipped["surface"] = "potential is not radially homogeneous";
  }
  if (config.ids.empirical) {
    curves.emplace_back("empirical", empirical_ids(domain, potential, config.ids.scale, grid,
                                                   config.ids.eta, config.policy.dense_cap));
  }

  std::vector<double> oracle;
  for (double t : config.ts) oracle.push_back(oracle_laplace(potential, domain, t));

  json curve_json = json::object();
  json laplace = json::object();
  std::string csv = "variant,t,laplace,tail_bound,oracle,relative_difference\n";
  for (const auto& [name, curve] : curves) {
    curve_json[name] = curve_body(curve);
    write_text(config.output / fmt::format("curve_{}.csv", name), curve_csv(curve));
    std::vector<double> values, tails, rel;
    for (std::size_t i = 0; i < config.ts.size(); ++i) {
      const LaplaceOfIds l = laplace_of_ids(curve, config.ts[i]);
      values.push_back(l.value);
      tails.push_back(l.tail_bound);
      rel.push_back((l.value - oracle[i]) / oracle[i]);
      csv += fmt::format("{},{},{},{},{},{}\n", name, format_number(config.ts[i]),
                         format_number(l.value), format_number(l.tail_bound),
                         format_number(oracle[i]), format_number(rel.back()));
      fmt::print(log, "{:<18} t = {:<6} laplace = {:.10g}  oracle = {:.10g}  rel = {:+.3e}\n", name,
                 config.ts[i], l.value, oracle[i], rel.back());
    }
    laplace[name] = {{"value", values}, {"tail_bound", tails}, {"relative_difference", rel}};
  }
  json body{{"domain", domain.descriptor()},
            {"potential", potential.descriptor()},
            {"t", config.ts},
            {"oracle", oracle},
            {"curves", curve_json},
            {"laplace", laplace},
            {"skipped", skipped}};
  if (curve_json.contains("surface_uniform")) {
    const auto& u = curves[1].second.values;
    const auto& w = curves[2].second.values;
    double gap = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) gap = std::max(gap, std::abs(u[i] - w[i]));
    body["surface_variant_max_difference"] = gap;
    fmt::print(log, "max |uniform - cone-weighted| = {:.3e}\n", gap);
  }
  write_report_json(config.output, metadata("ids", config, watch.seconds()), body);
  write_text(config.output / "report.csv", csv);
  return 0;
}

int cmd_cache_gc(const std::filesystem::path& cache_directory, std::optional<double> max_age_days,
                 std::ostream& log) {
  const FileCache cache(cache_directory);
  const auto r = cache.gc(max_age_days);
  fmt::print(log, "kept {}  removed: corrupt {}, temporary {}, expired {}\n", r.kept,
             r.removed_corrupt, r.removed_temporary, r.removed_old);
  return 0;
}

}  // namespace shapedos
