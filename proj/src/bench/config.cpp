#include "lasmc/bench/config.hpp"

#include <fstream>
#include <set>

namespace lasmc::bench {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::string_view where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("unknown field '" + it.key() + "' in " + std::string(where));
}

template <class T>
void read(const json& j, const char* key, T& out, std::string_view where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + std::string(key) + "' in " + std::string(where) + " has the wrong type");
  }
}

Track parse_track(std::string_view s) {
  if (s == "concurrent") return Track::concurrent;
  if (s == "auxiliary") return Track::auxiliary;
  if (s == "resampling") return Track::resampling;
  throw ConfigError("unknown weight track '" + std::string(s) + "' (expected concurrent, auxiliary or resampling)");
}

std::string track_name(Track k) {
  switch (k) {
    case Track::concurrent: return "concurrent";
    case Track::auxiliary: return "auxiliary";
    case Track::resampling: return "resampling";
  }
  return "?";
}

AdaptiveRule parse_rule(std::string_view s) {
  if (s == "automatic") return AdaptiveRule::automatic;
  if (s == "probability") return AdaptiveRule::probability;
  if (s == "variance") return AdaptiveRule::variance;
  throw ConfigError("unknown adaptive rule '" + std::string(s) + "' (expected automatic, probability or variance)");
}

std::string rule_name(AdaptiveRule r) {
  switch (r) {
    case AdaptiveRule::automatic: return "automatic";
    case AdaptiveRule::probability: return "probability";
    case AdaptiveRule::variance: return "variance";
  }
  return "?";
}

}  // namespace

Experiment parse_experiment(std::string_view name) {
  if (name == "nonlinear") return Experiment::nonlinear;
  if (name == "tracking") return Experiment::tracking;
  if (name == "qam") return Experiment::qam;
  throw ConfigError("unknown experiment '" + std::string(name) + "' (expected nonlinear, tracking or qam)");
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::nonlinear: return "nonlinear";
    case Experiment::tracking: return "tracking";
    case Experiment::qam: return "qam";
  }
  return "?";
}

ExperimentConfig default_config(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::nonlinear:
      c.resample.every = 1;
      c.strategy.pilot.smoother.bin_width = 0.5;
      break;
    case Experiment::tracking:
      c.m = 200;
      c.reps = 100;
      c.resample.ess_threshold = 0.1;
      c.strategy.pilot.smoother.bins_per_dim = 10;
      c.lookaheads = {0, 1, 2, 3, 5, 8, 10, 13, 15};
      c.reference.m = 20000;
      break;
    case Experiment::qam:
      c.m = 200;
      c.reps = 20;
      c.T = 500;
      c.resample.scheme = ResampleScheme::residual;
      c.resample.ess_threshold = 0.5;
      c.lookaheads = {0, 2, 4, 8, 10};
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (m < 1) throw ConfigError("m must be positive");
  if (reps < 1) throw ConfigError("reps must be positive");
  if (T < 1) throw ConfigError("T must be positive");
  if (threads < 1) throw ConfigError("threads must be positive");
  if (lookaheads.empty()) throw ConfigError("lookaheads must list at least one value");
  for (int l : lookaheads)
    if (l < 0) throw ConfigError("lookaheads must be nonnegative");
  if (strategy.delta < 0) throw ConfigError("strategy delta must be nonnegative");
  if (strategy.pilot.K < 1) throw ConfigError("strategy K must be positive");
  if (strategy.pilot.A < 0) throw ConfigError("strategy A must be nonnegative");
  if (!(strategy.pilot.smoother.bin_width > 0.0)) throw ConfigError("smoother bin_width must be positive");
  if (strategy.pilot.smoother.bins_per_dim < 0) throw ConfigError("smoother bins_per_dim must be nonnegative");
  if (strategy.adaptive.max_steps < 0) throw ConfigError("adaptive max_steps must be nonnegative");
  if (!(strategy.adaptive.p0 > 0.0 && strategy.adaptive.p0 < 1.0)) throw ConfigError("adaptive p0 must lie in (0, 1)");
  if (!(strategy.adaptive.sigma0_sq > 0.0)) throw ConfigError("adaptive sigma0_sq must be positive");
  if (resample.every < 0) throw ConfigError("resample every must be nonnegative");
  if (!(resample.ess_threshold >= 0.0 && resample.ess_threshold <= 1.0))
    throw ConfigError("resample ess_threshold must lie in [0, 1]");
  if (resample.priority_gap < 0) throw ConfigError("resample priority_gap must be nonnegative");
  if (resample.priority_pilots < 1) throw ConfigError("resample priority_pilots must be positive");
  if (resample.scheme == ResampleScheme::optimal_finite)
    throw ConfigError("optimal_finite is a strategy, not a resampling scheme for this harness");
  if (reference.m < 1) throw ConfigError("reference m must be positive");
  switch (experiment) {
    case Experiment::nonlinear:
      nonlinear.validate();
      if (strategy.kind != Strategy::sis && strategy.kind != Strategy::pilot && strategy.kind != Strategy::adaptive)
        throw ConfigError("the nonlinear experiment supports strategies sis, pilot and adaptive");
      if (strategy.kind != Strategy::sis && strategy.pilot.A < 1)
        throw ConfigError("the nonlinear experiment needs A >= 1 candidates for pilot strategies");
      break;
    case Experiment::tracking:
      tracking.validate();
      break;
    case Experiment::qam: {
      QamConfig q = qam;
      q.frame = T;
      q.validate();
      break;
    }
  }
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, "config", {"experiment", "strategy", "resample", "lookaheads", "m", "reps", "T", "seed", "threads",
                           "timing", "reference", "nonlinear", "tracking", "qam"});
  std::string exp = "nonlinear";
  read(j, "experiment", exp, "config");
  ExperimentConfig c = default_config(parse_experiment(exp));
  read(j, "lookaheads", c.lookaheads, "config");
  read(j, "m", c.m, "config");
  read(j, "reps", c.reps, "config");
  read(j, "T", c.T, "config");
  read(j, "seed", c.seed, "config");
  read(j, "threads", c.threads, "config");
  read(j, "timing", c.timing, "config");
  if (j.contains("strategy")) {
    const json& s = j["strategy"];
    check_keys(s, "strategy", {"kind", "delta", "K", "A", "smooth", "bin_width", "bins_per_dim", "pilot_kind",
                               "partition", "estimate_track", "adaptive"});
    std::string kind = to_string(c.strategy.kind);
    read(s, "kind", kind, "strategy");
    c.strategy.kind = parse_strategy(kind);
    read(s, "delta", c.strategy.delta, "strategy");
    read(s, "K", c.strategy.pilot.K, "strategy");
    read(s, "A", c.strategy.pilot.A, "strategy");
    read(s, "smooth", c.strategy.pilot.smooth, "strategy");
    read(s, "bin_width", c.strategy.pilot.smoother.bin_width, "strategy");
    read(s, "bins_per_dim", c.strategy.pilot.smoother.bins_per_dim, "strategy");
    std::string pk = to_string(c.strategy.pilot_kind);
    read(s, "pilot_kind", pk, "strategy");
    c.strategy.pilot_kind = parse_pilot_kind(pk);
    if (s.contains("estimate_track")) {
      std::string tr;
      read(s, "estimate_track", tr, "strategy");
      c.strategy.estimate_track = parse_track(tr);
    }
    if (s.contains("partition")) {
      std::string p;
      read(s, "partition", p, "strategy");
      if (p != "flat" && p != "constellation")
        throw ConfigError("unknown partition '" + p + "' (expected flat or constellation)");
      if (p == "constellation" && c.experiment != Experiment::qam)
        throw ConfigError("the constellation partition needs the qam experiment");
      c.constellation_partition = p == "constellation";
    }
    if (s.contains("adaptive")) {
      const json& a = s["adaptive"];
      check_keys(a, "strategy.adaptive", {"max_steps", "p0", "sigma0_sq", "rule"});
      read(a, "max_steps", c.strategy.adaptive.max_steps, "strategy.adaptive");
      read(a, "p0", c.strategy.adaptive.p0, "strategy.adaptive");
      read(a, "sigma0_sq", c.strategy.adaptive.sigma0_sq, "strategy.adaptive");
      std::string r = rule_name(c.strategy.adaptive.rule);
      read(a, "rule", r, "strategy.adaptive");
      c.strategy.adaptive.rule = parse_rule(r);
    }
  }
  if (j.contains("resample")) {
    const json& r = j["resample"];
    check_keys(r, "resample", {"scheme", "every", "ess_threshold", "priority_gap", "priority_pilots"});
    std::string sc = to_string(c.resample.scheme);
    read(r, "scheme", sc, "resample");
    try {
      c.resample.scheme = parse_resample_scheme(sc);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    read(r, "every", c.resample.every, "resample");
    read(r, "ess_threshold", c.resample.ess_threshold, "resample");
    read(r, "priority_gap", c.resample.priority_gap, "resample");
    read(r, "priority_pilots", c.resample.priority_pilots, "resample");
  }
  if (j.contains("reference")) {
    const json& r = j["reference"];
    check_keys(r, "reference", {"m", "path"});
    read(r, "m", c.reference.m, "reference");
    read(r, "path", c.reference.path, "reference");
  }
  if (j.contains("nonlinear")) {
    const json& n = j["nonlinear"];
    check_keys(n, "nonlinear", {"sigma", "eta", "x0_mean", "x0_var"});
    read(n, "sigma", c.nonlinear.sigma, "nonlinear");
    read(n, "eta", c.nonlinear.eta, "nonlinear");
    read(n, "x0_mean", c.nonlinear.x0_mean, "nonlinear");
    read(n, "x0_var", c.nonlinear.x0_var, "nonlinear");
  }
  if (j.contains("tracking")) {
    const json& t = j["tracking"];
    check_keys(t, "tracking", {"p_d", "clutter_rate", "window", "obs_noise_var", "accel_var"});
    read(t, "p_d", c.tracking.p_d, "tracking");
    read(t, "clutter_rate", c.tracking.clutter_rate, "tracking");
    read(t, "window", c.tracking.window, "tracking");
    read(t, "obs_noise_var", c.tracking.obs_noise_var, "tracking");
    read(t, "accel_var", c.tracking.accel_var, "tracking");
  }
  if (j.contains("qam")) {
    const json& q = j["qam"];
    check_keys(q, "qam", {"order", "phi", "theta", "snr_db", "known_period", "known_channel_start"});
    read(q, "order", c.qam.order, "qam");
    read(q, "phi", c.qam.phi, "qam");
    read(q, "theta", c.qam.theta, "qam");
    read(q, "snr_db", c.qam.snr_db, "qam");
    read(q, "known_period", c.qam.known_period, "qam");
    read(q, "known_channel_start", c.qam.known_channel_start, "qam");
  }
  c.qam.frame = c.T;
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json s = {{"kind", to_string(c.strategy.kind)},
            {"delta", c.strategy.delta},
            {"K", c.strategy.pilot.K},
            {"A", c.strategy.pilot.A},
            {"smooth", c.strategy.pilot.smooth},
            {"bin_width", c.strategy.pilot.smoother.bin_width},
            {"bins_per_dim", c.strategy.pilot.smoother.bins_per_dim},
            {"pilot_kind", to_string(c.strategy.pilot_kind)},
            {"partition", c.constellation_partition ? "constellation" : "flat"},
            {"adaptive",
             {{"max_steps", c.strategy.adaptive.max_steps},
              {"p0", c.strategy.adaptive.p0},
              {"sigma0_sq", c.strategy.adaptive.sigma0_sq},
              {"rule", rule_name(c.strategy.adaptive.rule)}}}};
  if (c.strategy.estimate_track) s["estimate_track"] = track_name(*c.strategy.estimate_track);
  return {{"experiment", to_string(c.experiment)},
          {"strategy", s},
          {"resample",
           {{"scheme", to_string(c.resample.scheme)},
            {"every", c.resample.every},
            {"ess_threshold", c.resample.ess_threshold},
            {"priority_gap", c.resample.priority_gap},
            {"priority_pilots", c.resample.priority_pilots}}},
          {"lookaheads", c.lookaheads},
          {"m", c.m},
          {"reps", c.reps},
          {"T", c.T},
          {"seed", c.seed},
          {"threads", c.threads},
          {"timing", c.timing},
          {"reference", {{"m", c.reference.m}, {"path", c.reference.path}}},
          {"nonlinear",
           {{"sigma", c.nonlinear.sigma},
            {"eta", c.nonlinear.eta},
            {"x0_mean", c.nonlinear.x0_mean},
            {"x0_var", c.nonlinear.x0_var}}},
          {"tracking",
           {{"p_d", c.tracking.p_d},
            {"clutter_rate", c.tracking.clutter_rate},
            {"window", c.tracking.window},
            {"obs_noise_var", c.tracking.obs_noise_var},
            {"accel_var", c.tracking.accel_var}}},
          {"qam",
           {{"order", c.qam.order},
            {"phi", c.qam.phi},
            {"theta", c.qam.theta},
            {"snr_db", c.qam.snr_db},
            {"known_period", c.qam.known_period},
            {"known_channel_start", c.qam.known_channel_start}}}};
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::uint64_t data_seed(std::uint64_t seed, int rep) {
  return derive_seed(seed, {0x64617461ULL, static_cast<std::uint64_t>(rep)});
}

std::uint64_t filter_seed(std::uint64_t seed, int rep) {
  return derive_seed(seed, {0x66696c74ULL, static_cast<std::uint64_t>(rep)});
}

}  // namespace lasmc::bench
