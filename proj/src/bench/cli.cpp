#include "lasmc/bench/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "lasmc/bench/experiments.hpp"

namespace lasmc::bench {

namespace {

struct Overrides {
  std::string config, out, reference;
  std::optional<std::string> experiment, strategy;
  std::optional<int> m, reps, T, delta, threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<int>> lookaheads;
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON experiment config");
  app->add_option("--experiment", o.experiment, "nonlinear, tracking or qam");
  app->add_option("--strategy", o.strategy, "strategy kind");
  app->add_option("--m", o.m, "particles");
  app->add_option("--reps", o.reps, "repetitions");
  app->add_option("--T", o.T, "horizon");
  app->add_option("--seed", o.seed, "64-bit seed");
  app->add_option("--delta", o.delta, "lookahead depth of the strategy");
  app->add_option("--lookaheads", o.lookaheads, "total lookaheads to report");
  app->add_option("--threads", o.threads, "worker threads");
}

ExperimentConfig resolve(const Overrides& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot open config file '" + o.config + "'");
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file '" + o.config + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  }
  if (o.experiment) j["experiment"] = *o.experiment;
  if (o.strategy) j["strategy"]["kind"] = *o.strategy;
  if (o.delta) j["strategy"]["delta"] = *o.delta;
  if (o.m) j["m"] = *o.m;
  if (o.reps) j["reps"] = *o.reps;
  if (o.T) j["T"] = *o.T;
  if (o.seed) j["seed"] = *o.seed;
  if (o.threads) j["threads"] = *o.threads;
  if (o.lookaheads) j["lookaheads"] = *o.lookaheads;
  return config_from_json(j);
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write output file '" + path + "'");
  f << text;
  if (!f.flush()) throw ConfigError("failed while writing output file '" + path + "'");
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lookahead sequential Monte Carlo experiments", "smc"};
  app.require_subcommand(1);
  Overrides run_o, ref_o;
  CLI::App* run = app.add_subcommand("run", "run an experiment and write per-repetition metrics as CSV");
  add_overrides(run, run_o);
  run->add_option("--out", run_o.out, "CSV output path (default stdout)");
  run->add_option("--reference", run_o.reference, "reference cache for RMSE2 / MAE2");
  CLI::App* ref = app.add_subcommand("reference", "build the large-m reference cache of an experiment");
  add_overrides(ref, ref_o);
  ref->add_option("--out", ref_o.out, "cache path")->required();
  CLI::App* self = app.add_subcommand("selftest", "run the oracle cross-checks");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*run) {
      const ExperimentConfig cfg = resolve(run_o);
      std::optional<ReferenceCache> cache;
      const std::string rpath = run_o.reference.empty() ? cfg.reference.path : run_o.reference;
      if (!rpath.empty()) cache = load_reference(rpath);
      const ResultTable tab = run_experiment(cfg, cache ? &*cache : nullptr);
      write_text(run_o.out, to_csv(tab), out);
      return kExitOk;
    }
    if (*ref) {
      const ExperimentConfig cfg = resolve(ref_o);
      save_reference(build_reference(cfg), ref_o.out);
      return kExitOk;
    }
    if (*self) {
      bool ok = true;
      for (const auto& r : run_selftest()) {
        out << (r.ok ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        ok = ok && r.ok;
      }
      return ok ? kExitOk : kExitNumerical;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const GuardError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace lasmc::bench
