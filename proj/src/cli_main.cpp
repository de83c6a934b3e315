#include "shapedos/cli.hpp"

#include <functional>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "shapedos/commands.hpp"
#include "shapedos/errors.hpp"

namespace shapedos {
namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool no_cache = false;
  std::optional<std::string> cache_dir;
};

using Command = int (*)(const ExperimentConfig&, const RunOptions&, std::ostream&);

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "experiment file (JSON)")->required();
  sub->add_option("--seed", f.seed, "override the config seed");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--threads", f.threads, "worker threads for trace estimation")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--no-cache", f.no_cache, "neither read nor write the result cache");
  sub->add_option("--cache-dir", f.cache_dir, "cache directory");
}

int dispatch(Command command, const Flags& f, std::ostream& out) {
  ExperimentConfig config = load_config(f.config);
  if (f.seed) config.seed = *f.seed;
  if (f.out) config.output = *f.out;
  if (f.threads) config.policy.threads = *f.threads;
  RunOptions run;
  run.use_cache = config.cache_enabled && !f.no_cache;
  run.cache_directory = f.cache_dir ? std::filesystem::path(*f.cache_dir) : config.cache_directory;
  return command(config, run, out);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Density-of-states experiments for Schroedinger operators on shaped domains",
               "shapedos"};
  app.require_subcommand(1);

  struct Entry {
    const char* name;
    const char* help;
    Command command;
  };
  const Entry entries[] = {
      {"oracle", "analytic Laplace transform and potential mean", cmd_oracle},
      {"sweep", "finite-volume traces over an hbar sweep", cmd_sweep},
      {"compare", "two-domain counterexample report", cmd_compare},
      {"rescale-check", "verify the discrete rescaling identity", cmd_rescale_check},
      {"ids", "integrated density of states curves", cmd_ids},
  };
  Flags flags;
  Command chosen = nullptr;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, flags);
    sub->callback([&chosen, c = e.command] { chosen = c; });
  }

  CLI::App* cache = app.add_subcommand("cache", "result cache maintenance");
  cache->require_subcommand(1);
  CLI::App* gc = cache->add_subcommand("gc", "drop corrupt, temporary or expired entries");
  std::string gc_dir = ".shapedos-cache";
  std::optional<double> max_age;
  gc->add_option("--cache-dir", gc_dir, "cache directory");
  gc->add_option("--max-age-days", max_age, "also drop entries older than this");
  bool run_gc = false;
  gc->callback([&run_gc] { run_gc = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (run_gc) return cmd_cache_gc(gc_dir, max_age, out);
    return dispatch(chosen, flags, out);
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return 2;
  } catch (const PreconditionError& e) {
    fmt::print(err, "precondition violated: {}\n", e.what());
    return 4;
  } catch (const NumericalError& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(err, "i/o error: {}\n", e.what());
    return 3;
  }
}

}  // namespace shapedos
