#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lasmc/engine.hpp"
#include "lasmc/lookahead/smoother.hpp"

namespace lasmc {

struct PilotConfig {
  int delta = 1;           // pilot depth (truncated at the horizon)
  int K = 1;               // pilots per candidate
  int A = 0;               // 0: enumerate the alphabet; > 0: A draws from q_t
  bool smooth = false;     // score candidates by a pooled piecewise-constant fit
  SmootherConfig smoother;
  bool record_paths = false;
};

enum class AdaptiveRule { automatic, probability, variance };

struct AdaptiveConfig {
  int max_steps = 3;        // N
  double p0 = 0.9;          // probability rule
  double sigma0_sq = 4.0;   // variance rule
  AdaptiveRule rule = AdaptiveRule::automatic;  // probability for enumerated candidates, variance otherwise
};

template <class State>
struct PilotBundle {
  int delta = 0;         // depth reached
  int n_candidates = 0;  // per particle
  int K = 0;
  double log_c = 0.0;    // 0 for the alphabet, -log A for drawn candidates
  std::vector<State> candidates;   // [j * n + i]
  std::vector<double> log_v;       // log V_t per candidate
  std::vector<double> log_q;       // [(j * n + i) * K + k], pilot part only
  std::vector<double> log_u;       // same layout, log V_t + sum_s (log g f - log q)
  std::vector<double> log_score;   // per candidate, what selection used
  std::vector<std::vector<State>> paths;  // same layout as log_q when recorded
  std::vector<int> selected;       // per particle
};

// Smoothing is allowed when the model says its feature summarizes the future.
template <class M>
bool smoothing_supported(const M& m) {
  if constexpr (requires { { m.smoothing_supported() } -> std::convertible_to<bool>; }) return m.smoothing_supported();
  return model_is_markovian(m);
}

namespace detail {

template <SequentialModel M>
class PilotWork {
 public:
  using State = typename M::State;
  using Carry = typename M::Carry;
  using Node = typename ParticleSystem<M>::Node;

  PilotWork(const ParticleSystem<M>& sys, const M& model, const PilotConfig& cfg)
      : sys_(sys), model_(model), cfg_(cfg), m_(sys.size()), t_(sys.time() + 1) {
    if (t_ > model.horizon()) throw PreconditionError("horizon exceeded at t=" + std::to_string(t_));
    if (cfg.delta < 0) throw PreconditionError("pilot depth must be nonnegative");
    if (cfg.K < 1) throw PreconditionError("pilot count K must be positive");
    if (cfg.A < 0) throw PreconditionError("candidate count A must be nonnegative");
    if (cfg.smooth) {
      if constexpr (!HasFeature<M>) {
        throw PreconditionError("smoothing needs a feature hook on the model");
      } else if (!smoothing_supported(model)) {
        throw PreconditionError("smoothing requires a markovian model");
      }
    }
    if (cfg.A == 0) {
      if constexpr (FiniteModel<M>) {
        n_ = model.alphabet_size(t_);
      } else {
        throw PreconditionError("candidate count A is required for models without an alphabet");
      }
    } else {
      n_ = cfg.A;
      log_c_ = -std::log(static_cast<double>(cfg.A));
    }
  }

  int depth() const { return depth_; }
  int time() const { return t_; }

  void generate(Rng& rng) {
    const std::size_t nc = static_cast<std::size_t>(m_) * n_;
    cand_x_.resize(nc);
    cand_carry_.resize(nc);
    cand_lv_.resize(nc);
    pil_carry_.resize(nc * cfg_.K);
    pil_lvf_.assign(nc * cfg_.K, 0.0);
    pil_lq_.assign(nc * cfg_.K, 0.0);
    if (cfg_.record_paths) pil_path_.assign(nc * cfg_.K, {});
    for_each_particle(m_, rng(), [&](int j, Rng& r) {
      const Carry& prefix = sys_.frontier(j).carry;
      for (int i = 0; i < n_; ++i) {
        const std::size_t ji = static_cast<std::size_t>(j) * n_ + i;
        State x;
        double lq = 0.0;
        if (cfg_.A == 0) {
          if constexpr (FiniteModel<M>) x = model_.symbol(t_, i);
        } else {
          auto d = model_.draw_trial(prefix, t_, r);
          if (!(d.log_q > kNegInf)) throw NumericalError("improper trial: q_t is zero at the sampled state");
          x = std::move(d.x);
          lq = d.log_q;
        }
        auto a = model_.advance(prefix, x, t_);
        cand_lv_[ji] = finite_or_neg_inf(a.log_target() - lq);
        cand_x_[ji] = std::move(x);
        cand_carry_[ji] = std::move(a.carry);
        for (int k = 0; k < cfg_.K; ++k) pil_carry_[ji * cfg_.K + k] = cand_carry_[ji];
      }
    });
    depth_ = 0;
  }

  // Extends every pilot by one step from q^pilot; false once the horizon is reached.
  bool extend(Rng& rng) {
    const int s = t_ + depth_ + 1;
    if (s > model_.horizon()) return false;
    for_each_particle(m_, rng(), [&](int j, Rng& r) {
      for (int i = 0; i < n_; ++i) {
        const std::size_t ji = static_cast<std::size_t>(j) * n_ + i;
        if (cand_lv_[ji] == kNegInf) continue;
        for (int k = 0; k < cfg_.K; ++k) {
          const std::size_t q = ji * cfg_.K + k;
          if (pil_lvf_[q] == kNegInf) continue;
          auto d = model_.draw_pilot(pil_carry_[q], s, r);
          if (!(d.log_q > kNegInf)) throw NumericalError("improper pilot trial: zero density at the sampled state");
          auto a = model_.advance(pil_carry_[q], d.x, s);
          pil_lvf_[q] = finite_or_neg_inf(pil_lvf_[q] + a.log_target() - d.log_q);
          pil_lq_[q] += d.log_q;
          pil_carry_[q] = std::move(a.carry);
          if (cfg_.record_paths) pil_path_[q].push_back(std::move(d.x));
        }
      }
    });
    ++depth_;
    return true;
  }

  // Selection score per candidate: log V_t plus the mean (or smoothed mean)
  // of the future part of U over the K pilots.
  void score() {
    const std::size_t nc = static_cast<std::size_t>(m_) * n_;
    lvbar_.resize(nc);
    parallel_for(static_cast<int>(nc), [&](int ji) {
      const std::size_t b = static_cast<std::size_t>(ji) * cfg_.K;
      lvbar_[ji] = log_mean_exp(std::span<const double>(pil_lvf_.data() + b, static_cast<std::size_t>(cfg_.K)));
    });
    score_.resize(nc);
    if (cfg_.smooth) {
      if constexpr (HasFeature<M>) {
        std::vector<Eigen::VectorXd> feat(nc);
        parallel_for(static_cast<int>(nc), [&](int ji) { feat[ji] = model_.feature(cand_carry_[ji], cand_x_[ji]); });
        PiecewiseConstantSmoother sm(cfg_.smoother);
        sm.fit(feat, lvbar_);
        const auto& fit = sm.fitted();
        for (std::size_t ji = 0; ji < nc; ++ji) score_[ji] = cand_lv_[ji] == kNegInf ? kNegInf : cand_lv_[ji] + fit[ji];
      }
    } else {
      for (std::size_t ji = 0; ji < nc; ++ji) score_[ji] = cand_lv_[ji] == kNegInf ? kNegInf : cand_lv_[ji] + lvbar_[ji];
    }
  }

  // Stop rules of the adaptive controller, evaluated on the current scores.
  bool criterion_met(const AdaptiveConfig& cfg) const {
    const bool probability =
        cfg.rule == AdaptiveRule::probability || (cfg.rule == AdaptiveRule::automatic && cfg_.A == 0);
    const auto prev = sys_.logw();
    const std::size_t nc = static_cast<std::size_t>(m_) * n_;
    std::vector<double> lw(nc);
    for (int j = 0; j < m_; ++j)
      for (int i = 0; i < n_; ++i) {
        const std::size_t ji = static_cast<std::size_t>(j) * n_ + i;
        lw[ji] = prev[j] == kNegInf ? kNegInf : prev[j] + score_[ji];
      }
    const std::vector<double> w = shifted_exp(lw);
    double total = 0.0;
    for (double v : w) total += v;
    if (probability) {
      std::vector<double> mass(static_cast<std::size_t>(n_), 0.0);
      for (std::size_t ji = 0; ji < nc; ++ji) mass[ji % n_] += w[ji];
      return *std::max_element(mass.begin(), mass.end()) / total > cfg.p0;
    }
    if constexpr (HasSummary<M>) {
      double mean = 0.0;
      std::vector<double> h(nc, 0.0);
      for (std::size_t ji = 0; ji < nc; ++ji)
        if (w[ji] > 0.0) {
          h[ji] = model_.summary(cand_carry_[ji], cand_x_[ji]);
          mean += w[ji] * h[ji];
        }
      mean /= total;
      double var = 0.0;
      for (std::size_t ji = 0; ji < nc; ++ji)
        if (w[ji] > 0.0) var += w[ji] * (h[ji] - mean) * (h[ji] - mean);
      return var / total < cfg.sigma0_sq;
    } else {
      throw PreconditionError("variance stop rule needs a summary hook on the model");
    }
  }

  // Draws x_t per particle with probability proportional to the scores and
  // sets w_t (proper for pi_t) and w_aux (proper for pi_{t+delta}).
  void commit(ParticleSystem<M>& sys, Rng& rng, PilotBundle<State>* out) {
    std::vector<Node> next(static_cast<std::size_t>(m_));
    std::vector<double> lw(static_cast<std::size_t>(m_)), la(static_cast<std::size_t>(m_));
    std::vector<int> sel(static_cast<std::size_t>(m_));
    const auto prev = sys.logw();
    for_each_particle(m_, rng(), [&](int j, Rng& r) {
      const std::size_t b = static_cast<std::size_t>(j) * n_;
      const std::span<const double> sc(score_.data() + b, static_cast<std::size_t>(n_));
      const double lse = log_sum_exp(sc);
      int i = 0;
      if (lse == kNegInf || prev[j] == kNegInf) {
        lw[j] = kNegInf;
        la[j] = kNegInf;
      } else {
        i = sample_log_categorical(sc, r);
        la[j] = prev[j] + log_c_ + lse;
        lw[j] = la[j] + cand_lv_[b + i] - score_[b + i];
      }
      sel[j] = i;
      next[j] = Node{cand_x_[b + i], cand_carry_[b + i], j};
    });
    if (out) fill_bundle(*out, sel);
    sys.push_layer(std::move(next));
    sys.logw_mut() = std::move(lw);
    sys.set_track(Track::auxiliary, std::move(la));
    sys.drop_track(Track::resampling);
  }

 private:
  void fill_bundle(PilotBundle<State>& out, const std::vector<int>& sel) {
    out.delta = depth_;
    out.n_candidates = n_;
    out.K = cfg_.K;
    out.log_c = log_c_;
    out.candidates = cand_x_;
    out.log_v = cand_lv_;
    out.log_q = pil_lq_;
    out.log_u.resize(pil_lvf_.size());
    for (std::size_t q = 0; q < pil_lvf_.size(); ++q) {
      const double v = cand_lv_[q / cfg_.K];
      out.log_u[q] = v == kNegInf ? kNegInf : v + pil_lvf_[q];
    }
    out.log_score = score_;
    out.paths = cfg_.record_paths ? pil_path_ : std::vector<std::vector<State>>{};
    out.selected = sel;
  }

  const ParticleSystem<M>& sys_;
  const M& model_;
  PilotConfig cfg_;
  int m_ = 0, t_ = 0, n_ = 0, depth_ = 0;
  double log_c_ = 0.0;
  std::vector<State> cand_x_;
  std::vector<Carry> cand_carry_;
  std::vector<double> cand_lv_, lvbar_, score_;
  std::vector<Carry> pil_carry_;
  std::vector<double> pil_lvf_, pil_lq_;
  std::vector<std::vector<State>> pil_path_;
};

}  // namespace detail

// x_0 ~ q_0, w_0 = g_0 / q_0, and w_aux_0 = w_0 times the weight of one pilot
// x_{1:delta} from q^pilot.
template <SequentialModel M>
ParticleSystem<M> pilot_initialize(const M& model, int m, int delta, Rng& rng, int retain_depth = 0) {
  if (delta < 0) throw PreconditionError("pilot depth must be nonnegative");
  ParticleSystem<M> sys = initialize(model, m, rng, retain_depth);
  const int last = std::min(delta, model.horizon());
  std::vector<double> la(sys.logw().begin(), sys.logw().end());
  for_each_particle(m, rng(), [&](int j, Rng& r) {
    if (la[j] == kNegInf) return;
    typename M::Carry c = sys.frontier(j).carry;
    for (int s = 1; s <= last && la[j] > kNegInf; ++s) {
      auto d = model.draw_pilot(c, s, r);
      auto a = model.advance(c, d.x, s);
      la[j] = finite_or_neg_inf(la[j] + a.log_target() - d.log_q);
      c = std::move(a.carry);
    }
  });
  sys.set_track(Track::auxiliary, std::move(la));
  return sys;
}

// One pilot lookahead step with fixed depth.
template <SequentialModel M>
PilotBundle<typename M::State> pilot_step(ParticleSystem<M>& sys, const M& model, const PilotConfig& cfg, Rng& rng) {
  detail::PilotWork<M> work(sys, model, cfg);
  work.generate(rng);
  for (int d = 0; d < cfg.delta; ++d)
    if (!work.extend(rng)) break;
  work.score();
  PilotBundle<typename M::State> out;
  work.commit(sys, rng, &out);
  return out;
}

template <FiniteModel M>
PilotBundle<typename M::State> pilot_step_finite(ParticleSystem<M>& sys, const M& model, int delta, int K, Rng& rng,
                                                 bool record_paths = false) {
  if (delta < 1) throw PreconditionError("finite pilot lookahead needs delta >= 1");
  PilotConfig cfg;
  cfg.delta = delta;
  cfg.K = K;
  cfg.record_paths = record_paths;
  return pilot_step(sys, model, cfg, rng);
}

template <SequentialModel M>
PilotBundle<typename M::State> pilot_step_continuous(ParticleSystem<M>& sys, const M& model, int delta, int A, int K,
                                                     bool smooth, Rng& rng, SmootherConfig smoother = {}) {
  if (A < 1) throw PreconditionError("candidate count A must be positive");
  PilotConfig cfg;
  cfg.delta = delta;
  cfg.A = A;
  cfg.K = K;
  cfg.smooth = smooth;
  cfg.smoother = smoother;
  return pilot_step(sys, model, cfg, rng);
}

// Grows the pilot depth from 0 until the stop rule fires, N is reached or the
// horizon is hit, then commits the step at that depth. Returns the depth.
// base.delta is ignored.
template <SequentialModel M>
int adaptive_lookahead(ParticleSystem<M>& sys, const M& model, const AdaptiveConfig& acfg, const PilotConfig& base,
                       Rng& rng, PilotBundle<typename M::State>* out = nullptr) {
  if (acfg.max_steps < 0) throw ConfigError("adaptive max_steps must be nonnegative");
  if (!(acfg.p0 > 0.0 && acfg.p0 < 1.0)) throw ConfigError("adaptive p0 must lie in (0, 1)");
  if (!(acfg.sigma0_sq > 0.0)) throw ConfigError("adaptive sigma0_sq must be positive");
  detail::PilotWork<M> work(sys, model, base);
  work.generate(rng);
  work.score();
  while (work.depth() < acfg.max_steps && !work.criterion_met(acfg)) {
    if (!work.extend(rng)) break;
    work.score();
  }
  work.commit(sys, rng, out);
  return work.depth();
}

}  // namespace lasmc
