#include "shapedos/report_io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

#include <fmt/format.h>

#include "shapedos/errors.hpp"

namespace shapedos {

using json = nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  return fmt::format("{:.17g}", x);
}

namespace {

json policy_json(const MethodPolicy& p) {
  return {{"mode", to_string(p.mode)},
          {"dense_cap", p.dense_cap},
          {"probes", p.probes},
          {"degree", p.degree},
          {"poly_tolerance", p.poly_tolerance},
          {"probe_spacing_factor", p.probe_spacing_factor}};
}

json mean_json(const MeanExtraction& m) {
  return {{"fit_t", m.fit_t}, {"fit_y", m.fit_y}, {"mean", m.mean}};
}

json side_json(const CounterexampleSide& s) {
  json j{{"domain", s.domain},
         {"quadrature_mean", s.quadrature_mean},
         {"oracle", s.oracle},
         {"oracle_mean", mean_json(s.oracle_mean)}};
  if (s.report) j["sweep"] = report_body(*s.report);
  if (s.empirical_mean) j["empirical_mean"] = mean_json(*s.empirical_mean);
  if (s.extrapolated_mean) j["extrapolated_mean"] = mean_json(*s.extrapolated_mean);
  return j;
}

}  // namespace

json report_body(const DOSReport& r) {
  json cells;
  std::vector<double> t, hbar, h, value, std_error, trunc, abs_d, rel_d;
  std::vector<std::string> method, error;
  std::vector<int> probes, degree, spacing;
  std::vector<std::size_t> nodes;
  std::vector<std::uint64_t> seed;
  std::vector<bool> ok;
  for (const SweepCell& c : r.cells) {
    t.push_back(c.t);
    hbar.push_back(c.hbar);
    h.push_back(c.spacing);
    ok.push_back(c.ok);
    error.push_back(c.error);
    value.push_back(c.ok ? c.value : NAN);
    std_error.push_back(c.ok ? c.std_error : NAN);
    trunc.push_back(c.ok ? c.truncation_bound : NAN);
    abs_d.push_back(c.abs_discrepancy);
    rel_d.push_back(c.rel_discrepancy);
    method.push_back(c.ok ? to_string(c.estimate.method) : "");
    nodes.push_back(c.estimate.nodes);
    probes.push_back(c.estimate.probes);
    degree.push_back(c.estimate.degree);
    spacing.push_back(c.estimate.probe_spacing);
    seed.push_back(c.estimate.seed);
  }
  cells["t"] = t;
  cells["hbar"] = hbar;
  cells["h"] = h;
  cells["ok"] = ok;
  cells["error"] = error;
  cells["value"] = value;
  cells["std_error"] = std_error;
  cells["truncation_bound"] = trunc;
  cells["abs_discrepancy"] = abs_d;
  cells["rel_discrepancy"] = rel_d;
  cells["method"] = method;
  cells["nodes"] = nodes;
  cells["probes"] = probes;
  cells["degree"] = degree;
  cells["probe_spacing"] = spacing;
  cells["seed"] = seed;

  json body{{"domain", r.domain},
            {"potential", r.potential},
            {"t", r.ts},
            {"hbar", r.hbars},
            {"eta", r.eta},
            {"seed", r.seed},
            {"method", policy_json(r.policy)},
            {"oracle", r.oracle},
            {"raw", r.raw},
            {"cells", cells}};
  if (!r.raw) {
    body["extrapolation"] = {{"scheme", "richardson-linear-hbar"},
                             {"hbar_pair", {r.hbars[r.hbars.size() - 2], r.hbars.back()}},
                             {"value", r.extrapolated},
                             {"abs_discrepancy", r.extrapolated_abs_discrepancy},
                             {"rel_discrepancy", r.extrapolated_rel_discrepancy}};
  }
  return body;
}

json report_body(const CounterexampleReport& r) {
  json body{{"potential", r.potential},
            {"t", r.ts},
            {"hbar", r.hbars},
            {"a", side_json(r.a)},
            {"b", side_json(r.b)},
            {"oracle_mean_gap", r.oracle_mean_gap},
            {"oracle_max_relative_difference", r.oracle_max_relative_difference},
            {"measures_differ", r.measures_differ}};
  if (r.empirical_mean_gap) body["empirical_mean_gap"] = *r.empirical_mean_gap;
  return body;
}

json curve_body(const IDSCurve& c) {
  return {{"provenance", to_string(c.provenance)},
          {"label", c.label},
          {"dimension", c.dimension},
          {"step", c.step},
          {"lambda", c.lambda},
          {"values", c.values}};
}

std::string report_csv(const DOSReport& r) {
  std::string out =
      "t,hbar,h,method,nodes,value,std_error,truncation_bound,oracle,abs_discrepancy,"
      "rel_discrepancy,probes,degree,probe_spacing,seed,ok,error\n";
  const std::size_t nh = r.hbars.size();
  for (std::size_t i = 0; i < r.ts.size(); ++i) {
    for (std::size_t j = 0; j < nh; ++j) {
      const SweepCell& c = r.cell(i, j);
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},\"{}\"\n",
                         format_number(c.t), format_number(c.hbar), format_number(c.spacing),
                         c.ok ? to_string(c.estimate.method) : "", c.estimate.nodes,
                         format_number(c.ok ? c.value : NAN),
                         format_number(c.ok ? c.std_error : NAN),
                         format_number(c.ok ? c.truncation_bound : NAN),
                         format_number(r.oracle[i]), format_number(c.abs_discrepancy),
                         format_number(c.rel_discrepancy), c.estimate.probes, c.estimate.degree,
                         c.estimate.probe_spacing, c.estimate.seed, c.ok ? 1 : 0, c.error);
    }
    if (!r.raw) {
      out += fmt::format("{},0,0,extrapolated,0,{},nan,nan,{},{},{},0,0,0,0,{},\"\"\n",
                         format_number(r.ts[i]), format_number(r.extrapolated[i]),
                         format_number(r.oracle[i]),
                         format_number(r.extrapolated_abs_discrepancy[i]),
                         format_number(r.extrapolated_rel_discrepancy[i]),
                         std::isfinite(r.extrapolated[i]) ? 1 : 0);
    }
  }
  return out;
}

std::string curve_csv(const IDSCurve& c) {
  std::string out = "lambda,value\n";
  for (std::size_t i = 0; i < c.lambda.size(); ++i) {
    out += format_number(c.lambda[i]) + "," + format_number(c.values[i]) + "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

void write_report_json(const std::filesystem::path& dir, const json& metadata, const json& body) {
  const json doc{{"metadata", metadata}, {"body", body}};
  write_text(dir / "report.json", doc.dump(1) + "\n");
}

}  // namespace shapedos
