#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "shapedos/cache.hpp"
#include "shapedos/cli.hpp"
#include "shapedos/config.hpp"
#include "shapedos/errors.hpp"

using namespace shapedos;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  Scratch() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("shapedos-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Scratch() { fs::remove_all(path); }
  fs::path path;
};

fs::path write_config(const fs::path& dir, const json& j, const std::string& name = "config.json") {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "shapedos");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json box_sweep(const fs::path& out) {
  return {{"domain", {{"kind", "box"}, {"dimension", 2}, {"parameters", {{"half_width", 1.0}}}}},
          {"potential", {{"kind", "example"}}},
          {"t", {0.5, 1.0}},
          {"hbar", {0.2, 0.1}},
          {"method", {{"mode", "stochastic"}}},
          {"seed", 17},
          {"output", out.string()}};
}

}  // namespace

TEST_CASE("config errors name the offending path") {
  Scratch s;
  json bad = box_sweep(s.path / "out");
  bad["method"]["probes"] = 4;
  auto r = invoke({"sweep", "--config", write_config(s.path, bad).string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("/method/probes") != std::string::npos);

  bad = box_sweep(s.path / "out");
  bad["domain"]["kind"] = "torus";
  r = invoke({"sweep", "--config", write_config(s.path, bad).string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("/domain/kind") != std::string::npos);

  bad = box_sweep(s.path / "out");
  bad["colour"] = 1;
  r = invoke({"sweep", "--config", write_config(s.path, bad).string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("colour") != std::string::npos);

  bad = box_sweep(s.path / "out");
  bad["hbar"] = {0.1, 0.2};
  CHECK_THROWS_AS(parse_config_text(bad.dump()), ConfigError);

  std::ofstream(s.path / "broken.json") << "{\"domain\": ";
  r = invoke({"oracle", "--config", (s.path / "broken.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("syntax error") != std::string::npos);

  CHECK(invoke({"sweep"}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("oracle command writes the mean") {
  Scratch s;
  json c = box_sweep(s.path / "out");
  const auto r = invoke({"oracle", "--config", write_config(s.path, c).string()});
  REQUIRE(r.code == 0);
  const json report = json::parse(slurp(s.path / "out" / "report.json"));
  CHECK(report["metadata"]["command"] == "oracle");
  CHECK(std::abs(report["body"]["mean"].get<double>() - 0.5 * std::log(2.0)) < 1e-6);
  CHECK(fs::exists(s.path / "out" / "report.csv"));
}

TEST_CASE("rescale-check passes for the example potential and rejects a gaussian") {
  Scratch s;
  json c = box_sweep(s.path / "out");
  c["rescale"] = {{"scales", {1.0, 2.0}}, {"spacing", 0.2}, {"t", {0.5, 1.0}}};
  auto r = invoke({"rescale-check", "--config", write_config(s.path, c).string()});
  CHECK(r.code == 0);
  const json report = json::parse(slurp(s.path / "out" / "report.json"));
  const json& rows = report["body"]["results"];
  REQUIRE(rows.size() == 2u);
  CHECK(rows[0]["max_entry_difference"].get<double>() == 0.0);
  for (const auto& row : rows) CHECK(row["pass"].get<bool>());

  c["potential"] = {{"kind", "gaussian"}, {"parameters", {{"amplitude", 1.0}, {"width", 0.5}}}};
  r = invoke({"rescale-check", "--config", write_config(s.path, c).string()});
  CHECK(r.code == 4);
}

TEST_CASE("sweeps are byte-identical for a fixed seed and the cache short-circuits") {
  Scratch s;
  const fs::path cache = s.path / "cache";
  json c = box_sweep(s.path / "a");
  const std::string cfg_a = write_config(s.path, c, "a.json").string();
  c["output"] = (s.path / "b").string();
  const std::string cfg_b = write_config(s.path, c, "b.json").string();

  const auto t0 = std::chrono::steady_clock::now();
  REQUIRE(invoke({"sweep", "--config", cfg_a, "--cache-dir", cache.string()}).code == 0);
  const auto t1 = std::chrono::steady_clock::now();
  REQUIRE(invoke({"sweep", "--config", cfg_b, "--cache-dir", cache.string()}).code == 0);
  const auto t2 = std::chrono::steady_clock::now();
  CHECK(slurp(s.path / "a" / "report.csv") == slurp(s.path / "b" / "report.csv"));
  const json a = json::parse(slurp(s.path / "a" / "report.json"));
  const json b = json::parse(slurp(s.path / "b" / "report.json"));
  CHECK(a["body"] == b["body"]);
  CHECK(b["metadata"]["cache"]["hits"] == 4);
  CHECK(a["metadata"]["cache"]["misses"] == 4);
  CHECK(std::chrono::duration<double>(t1 - t0).count() >=
        10.0 * std::chrono::duration<double>(t2 - t1).count());

  // Fresh computation without the cache reproduces the same body.
  c["output"] = (s.path / "c").string();
  REQUIRE(invoke({"sweep", "--config", write_config(s.path, c, "c.json").string(), "--no-cache"}).code == 0);
  CHECK(slurp(s.path / "a" / "report.csv") == slurp(s.path / "c" / "report.csv"));

  // A different seed changes the values.
  c["seed"] = 18;
  c["output"] = (s.path / "d").string();
  REQUIRE(invoke({"sweep", "--config", write_config(s.path, c, "d.json").string(), "--no-cache"}).code == 0);
  CHECK(slurp(s.path / "a" / "report.csv") != slurp(s.path / "d" / "report.csv"));
  CHECK(fs::exists(cache / "manifest.json"));
}

TEST_CASE("file cache round trip, corruption and gc") {
  Scratch s;
  FileCache cache(s.path / "c");
  HeatTraceEstimate e;
  e.t = 0.5;
  e.value = 1.0 / 3.0;
  e.method = TraceMethod::stochastic;
  e.std_error = 1e-7;
  e.truncation_bound = 2e-11;
  e.probes = 8;
  e.degree = 120;
  e.seed = 0xfedcba9876543210ull;
  e.probe_spacing = 5;
  e.nodes = 841;
  const json key{{"domain", "box"}, {"hbar", 0.1}, {"t", 0.5}};
  CHECK_FALSE(cache.load(key).has_value());
  cache.store(key, e);
  const auto got = cache.load(key);
  REQUIRE(got.has_value());
  CHECK(got->value == e.value);
  CHECK(got->seed == e.seed);
  CHECK(got->degree == e.degree);
  CHECK(got->probe_spacing == 5);
  CHECK(cache.hits() == 1u);
  CHECK(cache.misses() == 1u);
  CHECK(cache_key_hash(key).size() == 64u);
  CHECK(cache_key_hash(key) == cache_key_hash(json::parse(key.dump())));

  const json other{{"domain", "box"}, {"hbar", 0.1}, {"t", 1.0}};
  cache.store(other, e);
  // Corrupt one entry; it becomes a miss and gc removes it.
  const std::string hash = cache_key_hash(other);
  const fs::path entry = s.path / "c" / "entries" / hash.substr(0, 2) / (hash + ".json");
  REQUIRE(fs::exists(entry));
  std::ofstream(entry) << "{ not json";
  CHECK_FALSE(cache.load(other).has_value());
  std::ofstream(s.path / "c" / "entries" / ".tmp-1-2-x.json") << "partial";
  const auto gc = cache.gc();
  CHECK(gc.kept == 1u);
  CHECK(gc.removed_corrupt == 1u);
  CHECK(gc.removed_temporary == 1u);
  const json manifest = json::parse(slurp(s.path / "c" / "manifest.json"));
  CHECK(manifest["entries"].size() == 1u);
  CHECK(cache.load(key).has_value());

  const auto r = invoke({"cache", "gc", "--cache-dir", (s.path / "c").string(), "--max-age-days", "0"});
  CHECK(r.code == 0);
  CHECK_FALSE(FileCache(s.path / "c").load(key).has_value());
}

TEST_CASE("compare and ids commands write their artifacts") {
  Scratch s;
  json c = box_sweep(s.path / "cmp");
  c["domain_b"] = {{"kind", "ball"}, {"dimension", 2}, {"parameters", {{"radius", 1.0}}}};
  c["compare"] = {{"oracle_only", true}};
  auto r = invoke({"compare", "--config", write_config(s.path, c).string()});
  REQUIRE(r.code == 0);
  const json report = json::parse(slurp(s.path / "cmp" / "report.json"));
  CHECK(report["body"]["measures_differ"].get<bool>());

  json i = box_sweep(s.path / "ids");
  i["ids"] = {{"lambda_max", 10.0}, {"lambda_step", 0.5}, {"empirical", false}};
  r = invoke({"ids", "--config", write_config(s.path, i).string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(s.path / "ids" / "curve_free.csv"));
  CHECK(fs::exists(s.path / "ids" / "curve_surface_uniform.csv"));
  CHECK(fs::exists(s.path / "ids" / "curve_surface_weighted.csv"));
  CHECK_FALSE(fs::exists(s.path / "ids" / "curve_empirical.csv"));

  json no_b = box_sweep(s.path / "x");
  CHECK(invoke({"compare", "--config", write_config(s.path, no_b).string()}).code == 2);
}
