#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lasmc/engine.hpp"

namespace lasmc {

// argmax over `subset` of g_s f_s given the carry; the model's greedy hook is
// used when present. Ties go to the lowest alphabet index.
template <FiniteModel M>
int greedy_choice(const M& model, const typename M::Carry& c, int s, std::span<const int> subset) {
  if (subset.empty()) throw PreconditionError("greedy choice over an empty subset");
  if constexpr (HasGreedyIndex<M>) {
    return model.greedy_index(c, s, subset);
  } else {
    int best = -1;
    double bv = kNegInf;
    for (int i : subset) {
      const double v = finite_or_neg_inf(model.advance(c, model.symbol(s, i), s).log_target());
      if (best < 0 || v > bv || (v == bv && i < best)) {
        best = i;
        bv = v;
      }
    }
    return best;
  }
}

template <FiniteModel M>
int greedy_choice(const M& model, const typename M::Carry& c, int s) {
  std::vector<int> all(static_cast<std::size_t>(model.alphabet_size(s)));
  std::iota(all.begin(), all.end(), 0);
  return greedy_choice(model, c, s, all);
}

namespace detail {

// log of the greedy pilot's target weight over s = from..last.
template <FiniteModel M>
double greedy_pilot_log_weight(const M& model, typename M::Carry c, int from, int last) {
  double lu = 0.0;
  for (int s = from; s <= last; ++s) {
    const int g = greedy_choice(model, c, s);
    auto a = model.advance(c, model.symbol(s, g), s);
    lu += a.log_target();
    if (!(lu > kNegInf)) return kNegInf;
    c = std::move(a.carry);
  }
  return lu;
}

// log of a random pilot's importance weight sum_s (log g f - log q^pilot).
template <SequentialModel M>
double random_pilot_log_weight(const M& model, typename M::Carry c, int from, int last, Rng& rng) {
  double lu = 0.0;
  for (int s = from; s <= last; ++s) {
    auto d = model.draw_pilot(c, s, rng);
    if (!(d.log_q > kNegInf)) throw NumericalError("improper pilot trial: zero density at the sampled state");
    auto a = model.advance(c, d.x, s);
    lu = finite_or_neg_inf(lu + a.log_target() - d.log_q);
    if (lu == kNegInf) return kNegInf;
    c = std::move(a.carry);
  }
  return lu;
}

}  // namespace detail

// x_0 ~ q_0; w_res_0 = w_0 U_0 with U_0 from the greedy pilot, w_aux_0 from
// one random pilot.
template <FiniteModel M>
ParticleSystem<M> deterministic_pilot_initialize(const M& model, int m, int delta, Rng& rng, int retain_depth = 0) {
  if (delta < 0) throw PreconditionError("pilot depth must be nonnegative");
  ParticleSystem<M> sys = initialize(model, m, rng, retain_depth);
  const int last = std::min(delta, model.horizon());
  std::vector<double> lr(sys.logw().begin(), sys.logw().end()), la = lr;
  for_each_particle(m, rng(), [&](int j, Rng& r) {
    if (lr[j] == kNegInf) return;
    const auto& c = sys.frontier(j).carry;
    lr[j] += detail::greedy_pilot_log_weight(model, c, 1, last);
    la[j] += detail::random_pilot_log_weight(model, c, 1, last, r);
  });
  sys.set_track(Track::resampling, std::move(lr));
  sys.set_track(Track::auxiliary, std::move(la));
  return sys;
}

// Every alphabet member is scored by a greedy pilot, U_i = g_t f_t(a_i) times
// the pilot's target weights; x_t ~ U. Tracks after the step:
//   w     = w_{t-1} g_t f_t(x_t) sum_i U_i / U_sel   (pi_t),
//   w_res = w_{t-1} sum_i U_i,
//   w_aux = w times one random pilot weight from x_t (pi_{t+delta}).
// At delta = 0 all three coincide.
template <FiniteModel M>
void deterministic_pilot_step(ParticleSystem<M>& sys, const M& model, int delta, Rng& rng) {
  if (delta < 0) throw PreconditionError("pilot depth must be nonnegative");
  const int t = sys.time() + 1;
  if (t > model.horizon()) throw PreconditionError("horizon exceeded at t=" + std::to_string(t));
  const int last = std::min(t + delta, model.horizon());
  const int m = sys.size();
  const int n = model.alphabet_size(t);
  using Node = typename ParticleSystem<M>::Node;
  std::vector<Node> next(static_cast<std::size_t>(m));
  std::vector<double> lw(static_cast<std::size_t>(m)), lr(static_cast<std::size_t>(m)), la(static_cast<std::size_t>(m));
  const auto prev = sys.logw();
  for_each_particle(m, rng(), [&](int j, Rng& r) {
    const auto& prefix = sys.frontier(j).carry;
    std::vector<double> lt(static_cast<std::size_t>(n)), lu(static_cast<std::size_t>(n));
    std::vector<typename M::Carry> carry(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto a = model.advance(prefix, model.symbol(t, i), t);
      lt[i] = finite_or_neg_inf(a.log_target());
      lu[i] = lt[i] == kNegInf ? kNegInf : lt[i] + detail::greedy_pilot_log_weight(model, a.carry, t + 1, last);
      carry[i] = std::move(a.carry);
    }
    const double lse = log_sum_exp(lu);
    int i = 0;
    if (lse == kNegInf || prev[j] == kNegInf) {
      lw[j] = lr[j] = la[j] = kNegInf;
    } else {
      i = sample_log_categorical(lu, r);
      lr[j] = prev[j] + lse;
      lw[j] = lr[j] + lt[i] - lu[i];
      la[j] = lw[j] + detail::random_pilot_log_weight(model, carry[i], t + 1, last, r);
    }
    next[j] = Node{model.symbol(t, i), std::move(carry[i]), j};
  });
  sys.push_layer(std::move(next));
  sys.logw_mut() = std::move(lw);
  sys.set_track(Track::resampling, std::move(lr));
  sys.set_track(Track::auxiliary, std::move(la));
}

}  // namespace lasmc
