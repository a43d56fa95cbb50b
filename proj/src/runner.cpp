#include "lasmc/lookahead/runner.hpp"

namespace lasmc {

namespace {

struct StrategyName {
  Strategy kind;
  const char* name;
};

constexpr StrategyName kStrategies[] = {
    {Strategy::sis, "sis"},
    {Strategy::exact, "exact"},
    {Strategy::block, "block"},
    {Strategy::pilot, "pilot"},
    {Strategy::deterministic, "deterministic"},
    {Strategy::multilevel, "multilevel"},
    {Strategy::adaptive, "adaptive"},
    {Strategy::optimal_finite, "optimal_finite"},
};

}  // namespace

Strategy parse_strategy(std::string_view name) {
  for (const auto& s : kStrategies)
    if (name == s.name) return s.kind;
  throw ConfigError("unknown strategy '" + std::string(name) +
                    "' (expected sis, exact, block, pilot, deterministic, multilevel, adaptive or optimal_finite)");
}

std::string to_string(Strategy s) {
  for (const auto& e : kStrategies)
    if (e.kind == s) return e.name;
  return "?";
}

PilotKind parse_pilot_kind(std::string_view name) {
  if (name == "random") return PilotKind::random;
  if (name == "deterministic") return PilotKind::deterministic;
  throw ConfigError("unknown pilot kind '" + std::string(name) + "' (expected random or deterministic)");
}

std::string to_string(PilotKind k) { return k == PilotKind::random ? "random" : "deterministic"; }

int observation_lead(const StrategyConfig& cfg) {
  switch (cfg.kind) {
    case Strategy::exact:
    case Strategy::pilot:
    case Strategy::deterministic:
    case Strategy::multilevel:
      return cfg.delta;
    default:
      return 0;
  }
}

Track estimate_track(const StrategyConfig& cfg) {
  if (cfg.estimate_track) return *cfg.estimate_track;
  switch (cfg.kind) {
    case Strategy::multilevel:
      // Greedy pilot values are not unbiased, so only w is proper.
      return cfg.pilot_kind == PilotKind::deterministic ? Track::concurrent : Track::auxiliary;
    case Strategy::pilot:
    case Strategy::deterministic:
    case Strategy::adaptive:
      return Track::auxiliary;
    default:
      return Track::concurrent;
  }
}

int estimate_lead(const StrategyConfig& cfg) {
  switch (cfg.kind) {
    case Strategy::pilot:
    case Strategy::deterministic:
    case Strategy::multilevel:
      return estimate_track(cfg) == Track::concurrent ? 0 : cfg.delta;
    default:
      return observation_lead(cfg);
  }
}

Track resample_track(const StrategyConfig& cfg) {
  switch (cfg.kind) {
    case Strategy::pilot:
    case Strategy::multilevel:
    case Strategy::adaptive:
      return Track::auxiliary;
    case Strategy::deterministic:
      return Track::resampling;
    default:
      return Track::concurrent;
  }
}

double FilterStats::mean_depth() const {
  double s = 0.0;
  int n = 0;
  for (const auto& r : steps)
    if (r.t >= 1) {
      s += r.depth;
      ++n;
    }
  return n ? s / n : 0.0;
}

double FilterStats::mean_ess() const {
  double s = 0.0;
  for (const auto& r : steps) s += r.ess;
  return steps.empty() ? 0.0 : s / static_cast<double>(steps.size());
}

int FilterStats::resample_count() const {
  int n = 0;
  for (const auto& r : steps) n += r.resampled ? 1 : 0;
  return n;
}

}  // namespace lasmc
