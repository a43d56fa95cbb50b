#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "lasmc/engine.hpp"
#include "lasmc/lookahead/block.hpp"
#include "lasmc/lookahead/deterministic.hpp"
#include "lasmc/lookahead/exact.hpp"
#include "lasmc/lookahead/multilevel.hpp"
#include "lasmc/lookahead/pilot.hpp"
#include "lasmc/lookahead/priority.hpp"
#include "lasmc/lookahead/weighting.hpp"

namespace lasmc {

enum class Strategy {
  sis,            // plain SIS; lookahead weighting when estimates lag the frontier
  exact,          // exact lookahead sampling
  block,          // block sampling with the optimal finite proposal
  pilot,          // random pilots (alphabet or A trial draws, optional smoothing)
  deterministic,  // greedy pilots with three weight tracks
  multilevel,     // partition descent with random or greedy pilots
  adaptive,       // pilot depth chosen per step
  optimal_finite  // expand every child, Fearnhead-Clifford selection
};

Strategy parse_strategy(std::string_view name);
std::string to_string(Strategy s);

PilotKind parse_pilot_kind(std::string_view name);
std::string to_string(PilotKind k);

struct StrategyConfig {
  Strategy kind = Strategy::sis;
  int delta = 0;      // Delta for exact and block, Delta' for the pilot family
  PilotConfig pilot;  // K, A and smoothing; pilot.delta is taken from delta
  PilotKind pilot_kind = PilotKind::deterministic;
  std::shared_ptr<const MultilevelPartition> partition;  // null: flat
  AdaptiveConfig adaptive;
  std::optional<Track> estimate_track;  // override of the default below
};

struct ResampleConfig {
  ResampleScheme scheme = ResampleScheme::multinomial;
  int every = 0;               // > 0: resample every `every` steps
  double ess_threshold = 0.0;  // > 0: resample when ESS < threshold * m
  int priority_gap = 0;        // > 0: score by optimal priority with this T_gap
  int priority_pilots = 1;
};

// Steps of future observations already used by the frontier state: Delta for
// exact and pilot strategies, 0 otherwise.
int observation_lead(const StrategyConfig& cfg);
// Track that is proper for the estimates the strategy is meant to deliver.
Track estimate_track(const StrategyConfig& cfg);
// Lookahead of estimates on the estimate track: w of the pilot family is
// proper for pi_t, the auxiliary weight for pi_{t+Delta}. Adaptive depth
// varies per step and counts as 0.
int estimate_lead(const StrategyConfig& cfg);
// Track whose ESS triggers resampling and which provides the scores.
Track resample_track(const StrategyConfig& cfg);

struct StepRecord {
  int t = 0;
  double ess = 0.0;  // of the resampling track, before resampling
  bool resampled = false;
  int depth = 0;     // pilot depth used at this step
};

struct FilterStats {
  std::vector<StepRecord> steps;
  double mean_depth() const;  // over t >= 1
  double mean_ess() const;
  int resample_count() const;
};

// Initial population and one-step dispatch for a configured strategy.
template <SequentialModel M>
class StrategyStepper {
 public:
  using State = typename M::State;

  StrategyStepper(const M& model, const StrategyConfig& cfg) : model_(model), cfg_(cfg) {
    if (cfg.delta < 0) throw ConfigError("lookahead depth must be nonnegative");
    pcfg_ = cfg.pilot;
    pcfg_.delta = cfg.delta;
    part_ = cfg.partition;
    if constexpr (FiniteModel<M>) {
      if (cfg.kind == Strategy::block) block_ = optimal_block_proposal(model, cfg.delta);
      if (cfg.kind == Strategy::multilevel && !part_ && model.horizon() >= 1)
        part_ = std::make_shared<const MultilevelPartition>(MultilevelPartition::flat(model.alphabet_size(1)));
    } else if (cfg.kind == Strategy::exact || cfg.kind == Strategy::block || cfg.kind == Strategy::deterministic ||
               cfg.kind == Strategy::multilevel || cfg.kind == Strategy::optimal_finite) {
      throw ConfigError("strategy " + to_string(cfg.kind) + " needs a finite-alphabet model");
    }
  }

  const StrategyConfig& config() const { return cfg_; }
  const PilotConfig& pilot_config() const { return pcfg_; }
  bool produces_bundle() const { return cfg_.kind == Strategy::pilot || cfg_.kind == Strategy::adaptive; }

  ParticleSystem<M> initialize(int m, Rng& rng, int retain) const {
    switch (cfg_.kind) {
      case Strategy::sis:
      case Strategy::adaptive:
      case Strategy::optimal_finite:
        return lasmc::initialize(model_, m, rng, retain);
      case Strategy::pilot:
      case Strategy::multilevel:
        return pilot_initialize(model_, m, cfg_.delta, rng, retain);
      default:
        break;
    }
    if constexpr (FiniteModel<M>) {
      if (cfg_.kind == Strategy::exact) return exact_lookahead_initialize(model_, m, cfg_.delta, rng, retain);
      if (cfg_.kind == Strategy::block) return block_sampling_initialize(model_, m, cfg_.delta, rng, retain);
      return deterministic_pilot_initialize(model_, m, cfg_.delta, rng, retain);
    }
    throw ConfigError("strategy " + to_string(cfg_.kind) + " needs a finite-alphabet model");
  }

  // Advances sys by one step and returns the lookahead depth used. The pilot
  // bundle is filled for pilot and adaptive strategies when requested.
  int step(ParticleSystem<M>& sys, Rng& rng, PilotBundle<State>* bundle = nullptr) const {
    switch (cfg_.kind) {
      case Strategy::sis:
        sis_step(sys, model_, rng);
        return cfg_.delta;
      case Strategy::pilot: {
        PilotBundle<State> b = pilot_step(sys, model_, pcfg_, rng);
        const int d = b.delta;
        if (bundle) *bundle = std::move(b);
        return d;
      }
      case Strategy::adaptive:
        return adaptive_lookahead(sys, model_, cfg_.adaptive, pcfg_, rng, bundle);
      default:
        break;
    }
    if constexpr (FiniteModel<M>) {
      switch (cfg_.kind) {
        case Strategy::exact:
          exact_lookahead_step(sys, model_, cfg_.delta, rng);
          break;
        case Strategy::block:
          block_sampling_step(sys, model_, cfg_.delta, *block_, rng);
          break;
        case Strategy::deterministic:
          deterministic_pilot_step(sys, model_, cfg_.delta, rng);
          break;
        case Strategy::multilevel:
          multilevel_step(sys, model_, cfg_.delta, *part_, cfg_.pilot_kind, rng);
          break;
        case Strategy::optimal_finite:
          optimal_finite_step(sys, model_, rng);
          break;
        default:
          break;
      }
      return cfg_.delta;
    }
    throw ConfigError("strategy " + to_string(cfg_.kind) + " needs a finite-alphabet model");
  }

 private:
  const M& model_;
  StrategyConfig cfg_;
  PilotConfig pcfg_;
  std::optional<BlockProposal<M>> block_;
  std::shared_ptr<const MultilevelPartition> part_;
};

// Post-step hook: models whose carry is a Gaussian belief get one mixture
// Kalman step; everything else uses the plain dispatch.
template <class C>
concept GaussianCarry = requires(C& c) {
  c.mean;
  c.cov;
};

template <SequentialModel M>
int advance_step(const StrategyStepper<M>& stepper, ParticleSystem<M>& sys, Rng& rng,
                 PilotBundle<typename M::State>* bundle);

// Runs a strategy from t = 0 to the horizon. obs(sys, record) or
// obs(sys, record, bundle) is called after every step, before any
// resampling, with the frontier at record.t; bundle is the pilot bundle of
// the step that produced the frontier, or null.
template <SequentialModel M, class Observer>
FilterStats run_filter(const M& model, const StrategyConfig& cfg, const ResampleConfig& rcfg, int m, Rng& rng,
                       Observer&& obs, int retain_depth = 0) {
  using State = typename M::State;
  const int T = model.horizon();
  const StrategyStepper<M> stepper(model, cfg);
  FilterStats stats;
  ParticleSystem<M> sys = stepper.initialize(m, rng, retain_depth);
  const Track rtrack = resample_track(cfg);
  constexpr bool wants_bundle =
      std::is_invocable_v<Observer&, const ParticleSystem<M>&, const StepRecord&, const PilotBundle<State>*>;
  PilotBundle<State> bundle;
  bool have_bundle = false;
  int depth = cfg.kind == Strategy::adaptive ? 0 : cfg.delta;
  for (;;) {
    StepRecord rec;
    rec.t = sys.time();
    rec.depth = depth;
    const std::span<const double> rw = sys.has_track(rtrack) ? sys.track(rtrack) : sys.logw();
    rec.ess = ess(rw);
    if constexpr (wants_bundle) {
      obs(static_cast<const ParticleSystem<M>&>(sys), static_cast<const StepRecord&>(rec),
          have_bundle ? static_cast<const PilotBundle<State>*>(&bundle) : nullptr);
    } else {
      obs(static_cast<const ParticleSystem<M>&>(sys), static_cast<const StepRecord&>(rec));
    }
    const bool last = sys.time() >= T;
    if (!last && cfg.kind != Strategy::optimal_finite) {
      const bool due = (rcfg.every > 0 && sys.time() % rcfg.every == 0) ||
                       (rcfg.ess_threshold > 0.0 && rec.ess < rcfg.ess_threshold * m);
      if (due) {
        std::vector<double> scores = rcfg.priority_gap > 0
                                         ? optimal_priority_scores(sys, model, rcfg.priority_gap, rcfg.priority_pilots,
                                                                   rng, rtrack)
                                         : std::vector<double>(rw.begin(), rw.end());
        resample(sys, scores, rcfg.scheme, rng);
        rec.resampled = true;
      }
    }
    stats.steps.push_back(rec);
    if (last) break;
    have_bundle = wants_bundle && stepper.produces_bundle();
    depth = advance_step(stepper, sys, rng, have_bundle ? &bundle : nullptr);
  }
  return stats;
}

}  // namespace lasmc

#include "lasmc/kalman/mkf.hpp"

namespace lasmc {

template <SequentialModel M>
int advance_step(const StrategyStepper<M>& stepper, ParticleSystem<M>& sys, Rng& rng,
                 PilotBundle<typename M::State>* bundle) {
  if constexpr (GaussianCarry<typename M::Carry>) {
    return mkf_step(sys, stepper, rng, bundle).depth;
  } else {
    return stepper.step(sys, rng, bundle);
  }
}

}  // namespace lasmc
