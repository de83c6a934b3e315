#include "shapedos/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "shapedos/errors.hpp"

namespace shapedos {
namespace {

using json = nlohmann::json;

std::string type_name(const json& v) { return v.type_name(); }

// Typed access to one JSON object with a path prefix for diagnostics.
class Fields {
 public:
  Fields(const json& object, std::string path, std::set<std::string> allowed)
      : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) {
      throw ConfigError(fmt::format("{}: expected an object, got {}", where(), type_name(object_)));
    }
    for (const auto& [key, value] : object_.items()) {
      if (!allowed.count(key)) throw ConfigError(fmt::format("{}: unknown field '{}'", where(), key));
    }
  }

  bool has(const std::string& key) const { return object_.contains(key); }
  std::string at(const std::string& key) const { return path_ + "/" + key; }

  const json& get(const std::string& key) const {
    if (!has(key)) throw ConfigError(fmt::format("{}: missing required field", at(key)));
    return object_.at(key);
  }

  double number(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_number()) {
      throw ConfigError(fmt::format("{}: expected a number, got {}", at(key), type_name(v)));
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(fmt::format("{}: must be finite", at(key)));
    return x;
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  double positive(const std::string& key, double fallback) const {
    const double x = number(key, fallback);
    if (!(x > 0.0)) throw ConfigError(fmt::format("{}: must be > 0", at(key)));
    return x;
  }

  long long integer(const std::string& key, long long fallback, long long lo) const {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number_integer()) {
      throw ConfigError(fmt::format("{}: expected an integer, got {}", at(key), type_name(v)));
    }
    const long long x = v.get<long long>();
    if (x < lo) throw ConfigError(fmt::format("{}: must be >= {}", at(key), lo));
    return x;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_boolean()) {
      throw ConfigError(fmt::format("{}: expected true or false, got {}", at(key), type_name(v)));
    }
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    return string(key);
  }
  std::string string(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_string()) {
      throw ConfigError(fmt::format("{}: expected a string, got {}", at(key), type_name(v)));
    }
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_array() || v.empty()) {
      throw ConfigError(fmt::format("{}: expected a non-empty array of numbers", at(key)));
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(fmt::format("{}/{}: expected a number, got {}", at(key), i, type_name(v[i])));
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::string where() const { return path_.empty() ? "/" : path_; }

 private:
  const json& object_;
  std::string path_;
};

void require_positive(const std::vector<double>& xs, const std::string& path) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !std::isfinite(xs[i])) {
      throw ConfigError(fmt::format("{}/{}: must be > 0", path, i));
    }
  }
}

Domain build_domain(const json& record, const std::string& path) {
  const Fields f(record, path, {"kind", "dimension", "parameters"});
  const std::string kind = f.string("kind");
  const long long dimension = f.integer("dimension", 2, 1);
  const json params = f.has("parameters") ? f.get("parameters") : json::object();
  const std::string ppath = path + "/parameters";
  try {
    if (kind == "box") {
      const Fields p(params, ppath, {"half_width"});
      return Domain::box(static_cast<int>(dimension), p.positive("half_width", 1.0));
    }
    if (kind == "ball") {
      const Fields p(params, ppath, {"radius"});
      return Domain::ball(static_cast<int>(dimension), p.positive("radius", 1.0));
    }
    if (kind == "star_polygon") {
      if (dimension != 2) throw ConfigError(fmt::format("{}/dimension: star_polygon is planar", path));
      const Fields p(params, ppath, {"vertices"});
      const json& vs = p.get("vertices");
      if (!vs.is_array() || vs.size() < 3) {
        throw ConfigError(fmt::format("{}/vertices: expected at least three [x, y] pairs", ppath));
      }
      std::vector<Vertex2> vertices;
      for (std::size_t i = 0; i < vs.size(); ++i) {
        const json& v = vs[i];
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
          throw ConfigError(fmt::format("{}/vertices/{}: expected [x, y]", ppath, i));
        }
        vertices.push_back({v[0].get<double>(), v[1].get<double>()});
      }
      return Domain::star_polygon(std::move(vertices));
    }
    if (kind == "mask") {
      const Fields p(params, ppath, {"shape", "semi_axes"});
      const std::string shape = p.string("shape");
      if (shape != "ellipsoid") {
        throw ConfigError(fmt::format("{}/shape: unknown mask shape '{}' (expected ellipsoid)", ppath, shape));
      }
      std::vector<double> axes = p.numbers("semi_axes", {});
      require_positive(axes, ppath + "/semi_axes");
      if (axes.size() != static_cast<std::size_t>(dimension)) {
        throw ConfigError(fmt::format("{}/semi_axes: expected {} entries", ppath, dimension));
      }
      double outer = 0.0;
      std::string name = "ellipsoid";
      for (double a : axes) {
        outer = std::max(outer, a);
        name += fmt::format(":{}", a);
      }
      auto inside = [axes](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < axes.size(); ++i) s += (x[i] / axes[i]) * (x[i] / axes[i]);
        return s < 1.0;
      };
      return Domain::mask(static_cast<int>(dimension), inside, outer, name);
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  throw ConfigError(fmt::format(
      "{}/kind: unknown domain kind '{}' (expected box, ball, star_polygon or mask)", path, kind));
}

Potential build_potential(const json& record, int dimension, const std::string& path) {
  const Fields f(record, path, {"kind", "parameters"});
  const std::string kind = f.string("kind");
  const json params = f.has("parameters") ? f.get("parameters") : json::object();
  const std::string ppath = path + "/parameters";
  try {
    if (kind == "example") {
      const Fields p(params, ppath, {});
      return example_potential(dimension);
    }
    if (kind == "constant") {
      const Fields p(params, ppath, {"value"});
      return Potential::constant(p.number("value", 0.0));
    }
    if (kind == "angular_step") {
      const Fields p(params, ppath, {"theta_min", "theta_max", "value"});
      return angular_step_potential(dimension, p.number("theta_min"), p.number("theta_max"),
                                    p.number("value", 1.0));
    }
    if (kind == "gaussian") {
      const Fields p(params, ppath, {"amplitude", "width"});
      return gaussian_potential(dimension, p.number("amplitude", 1.0), p.positive("width", 1.0));
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  throw ConfigError(fmt::format(
      "{}/kind: unknown potential kind '{}' (expected example, constant, angular_step or gaussian)",
      path, kind));
}

std::vector<double> descending(std::vector<double> xs, const std::string& path) {
  require_positive(xs, path);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] < xs[i - 1])) throw ConfigError(fmt::format("{}: must be strictly descending", path));
  }
  return xs;
}

}  // namespace

Domain make_domain(const nlohmann::json& record) { return build_domain(record, "/domain"); }

Potential make_potential(const nlohmann::json& record, int dimension) {
  return build_potential(record, dimension, "/potential");
}

Domain ExperimentConfig::domain() const { return build_domain(domain_record, "/domain"); }

std::optional<Domain> ExperimentConfig::domain_b() const {
  if (!domain_b_record) return std::nullopt;
  return build_domain(*domain_b_record, "/domain_b");
}

Potential ExperimentConfig::potential() const {
  return build_potential(potential_record, domain().dimension(), "/potential");
}

ExperimentConfig parse_config(const nlohmann::json& document) {
  const Fields top(document, "",
                   {"domain", "domain_b", "potential", "t", "hbar", "eta", "method", "seed",
                    "output", "cache", "rescale", "ids", "compare"});
  ExperimentConfig c;
  c.domain_record = top.get("domain");
  c.potential_record = top.has("potential") ? top.get("potential")
                                            : json{{"kind", "constant"}, {"parameters", {{"value", 0.0}}}};
  if (top.has("domain_b")) c.domain_b_record = top.get("domain_b");

  c.ts = top.numbers("t", c.ts);
  require_positive(c.ts, "/t");
  c.hbars = descending(top.numbers("hbar", c.hbars), "/hbar");
  c.eta = top.positive("eta", c.eta);
  if (top.has("seed")) {
    const json& s = top.get("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("/seed: expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  c.output = top.string("output", c.output.string());

  if (top.has("method")) {
    const Fields m(top.get("method"), "/method",
                   {"mode", "dense_cap", "probes", "degree", "poly_tolerance",
                    "probe_spacing_factor", "threads"});
    try {
      c.policy.mode = method_mode_from_string(m.string("mode", "auto"));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("/method/mode: {}", e.what()));
    }
    c.policy.dense_cap = static_cast<std::size_t>(m.integer("dense_cap", 4000, 1));
    c.policy.probes = static_cast<int>(m.integer("probes", 8, 8));
    c.policy.degree = static_cast<int>(m.integer("degree", 0, 0));
    c.policy.poly_tolerance = m.positive("poly_tolerance", 1e-10);
    c.policy.probe_spacing_factor = m.number("probe_spacing_factor", 2.5);
    if (c.policy.probe_spacing_factor < 0.0) {
      throw ConfigError("/method/probe_spacing_factor: must be >= 0");
    }
    c.policy.threads = static_cast<int>(m.integer("threads", 1, 1));
  }

  if (top.has("cache")) {
    const Fields k(top.get("cache"), "/cache", {"enabled", "directory"});
    c.cache_enabled = k.boolean("enabled", true);
    c.cache_directory = k.string("directory", c.cache_directory.string());
  }

  if (top.has("rescale")) {
    const Fields r(top.get("rescale"), "/rescale", {"scales", "spacing", "t"});
    c.rescale.scales = r.numbers("scales", c.rescale.scales);
    require_positive(c.rescale.scales, "/rescale/scales");
    c.rescale.spacing = r.positive("spacing", c.rescale.spacing);
    c.rescale.ts = r.numbers("t", c.rescale.ts);
    require_positive(c.rescale.ts, "/rescale/t");
  }

  if (top.has("ids")) {
    const Fields i(top.get("ids"), "/ids",
                   {"lambda_min", "lambda_max", "lambda_step", "scale", "eta", "resolution",
                    "empirical"});
    c.ids.lambda_min = i.number("lambda_min", c.ids.lambda_min);
    c.ids.lambda_max = i.number("lambda_max", c.ids.lambda_max);
    c.ids.lambda_step = i.positive("lambda_step", c.ids.lambda_step);
    if (!(c.ids.lambda_max > c.ids.lambda_min)) {
      throw ConfigError("/ids/lambda_max: must exceed lambda_min");
    }
    c.ids.scale = i.positive("scale", c.ids.scale);
    c.ids.eta = i.positive("eta", c.ids.eta);
    c.ids.resolution = static_cast<int>(i.integer("resolution", c.ids.resolution, 4));
    c.ids.empirical = i.boolean("empirical", c.ids.empirical);
  }

  if (top.has("compare")) {
    const Fields k(top.get("compare"), "/compare", {"oracle_fit_t", "oracle_only"});
    c.compare.oracle_fit_t = k.numbers("oracle_fit_t", c.compare.oracle_fit_t);
    require_positive(c.compare.oracle_fit_t, "/compare/oracle_fit_t");
    if (c.compare.oracle_fit_t.size() != 2 ||
        c.compare.oracle_fit_t[0] == c.compare.oracle_fit_t[1]) {
      throw ConfigError("/compare/oracle_fit_t: expected two distinct values");
    }
    c.compare.oracle_only = k.boolean("oracle_only", false);
  }

  // Build once so parameter errors surface before any computation.
  const Domain d = c.domain();
  if (c.domain_b_record && c.domain_b()->dimension() != d.dimension()) {
    throw ConfigError("/domain_b/dimension: must match /domain/dimension");
  }
  c.potential();
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json document;
  try {
    document = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    // The parser reports "line L, column C" in its message.
    throw ConfigError(fmt::format("syntax error: {}", e.what()));
  }
  return parse_config(document);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  json j;
  j["domain"] = domain().descriptor();
  if (domain_b_record) j["domain_b"] = domain_b()->descriptor();
  j["potential"] = potential().descriptor();
  j["t"] = ts;
  j["hbar"] = hbars;
  j["eta"] = eta;
  j["method"] = {{"mode", to_string(policy.mode)},
                 {"dense_cap", policy.dense_cap},
                 {"probes", policy.probes},
                 {"degree", policy.degree},
                 {"poly_tolerance", policy.poly_tolerance},
                 {"probe_spacing_factor", policy.probe_spacing_factor}};
  j["seed"] = seed;
  j["rescale"] = {{"scales", rescale.scales}, {"spacing", rescale.spacing}, {"t", rescale.ts}};
  j["ids"] = {{"lambda_min", ids.lambda_min}, {"lambda_max", ids.lambda_max},
              {"lambda_step", ids.lambda_step}, {"scale", ids.scale},
              {"eta", ids.eta}, {"resolution", ids.resolution}, {"empirical", ids.empirical}};
  j["compare"] = {{"oracle_fit_t", compare.oracle_fit_t}, {"oracle_only", compare.oracle_only}};
  return j;
}

}  // namespace shapedos
