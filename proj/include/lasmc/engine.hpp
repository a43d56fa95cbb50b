#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "lasmc/logspace.hpp"
#include "lasmc/model.hpp"
#include "lasmc/particle_system.hpp"
#include "lasmc/resampling.hpp"

namespace lasmc {

inline double finite_or_neg_inf(double v) { return std::isnan(v) ? kNegInf : v; }

// x_0 ~ q_0 with log w_0 = log g_0 - log q_0.
template <SequentialModel M>
ParticleSystem<M> initialize(const M& model, int m, Rng& rng, int retain_depth = 0) {
  if (m < 1) throw PreconditionError("particle count must be positive");
  using Node = typename ParticleSystem<M>::Node;
  std::vector<Node> layer(static_cast<std::size_t>(m));
  std::vector<double> logw(static_cast<std::size_t>(m));
  const auto root = model.initial_carry();
  for_each_particle(m, rng(), [&](int j, Rng& r) {
    auto d = model.draw_trial(root, 0, r);
    if (!(d.log_q > kNegInf)) throw NumericalError("improper trial: q_0 is zero at the sampled state");
    auto a = model.advance(root, d.x, 0);
    logw[j] = finite_or_neg_inf(a.log_target() - d.log_q);
    layer[j] = Node{std::move(d.x), std::move(a.carry), -1};
  });
  ParticleSystem<M> sys(retain_depth);
  sys.reset(std::move(layer), std::move(logw), 0);
  return sys;
}

// One SIS propagation: x_t ~ q_t, log w += log g_t + log f_t - log q_t.
// Auxiliary and resampling tracks are left untouched.
template <SequentialModel M>
void sis_step(ParticleSystem<M>& sys, const M& model, Rng& rng) {
  const int t = sys.time() + 1;
  if (t > model.horizon()) throw PreconditionError("horizon exceeded: no observation at t=" + std::to_string(t));
  const int m = sys.size();
  using Node = typename ParticleSystem<M>::Node;
  std::vector<Node> next(static_cast<std::size_t>(m));
  std::vector<double> inc(static_cast<std::size_t>(m));
  for_each_particle(m, rng(), [&](int j, Rng& r) {
    const Node& p = sys.frontier(j);
    auto d = model.draw_trial(p.carry, t, r);
    if (!(d.log_q > kNegInf)) throw NumericalError("improper trial: q_t is zero at the sampled state");
    auto a = model.advance(p.carry, d.x, t);
    inc[j] = finite_or_neg_inf(a.log_target() - d.log_q);
    next[j] = Node{std::move(d.x), std::move(a.carry), j};
  });
  sys.push_layer(std::move(next));
  auto& lw = sys.logw_mut();
  for (int j = 0; j < m; ++j) lw[j] += inc[j];
}

// Draw m particles with probability proportional to exp(log_scores); each copy
// of particle j carries every weight track divided by its score.
template <SequentialModel M>
std::vector<int> resample(ParticleSystem<M>& sys, std::span<const double> log_scores, ResampleScheme scheme, Rng& rng) {
  const int m = sys.size();
  if (static_cast<int>(log_scores.size()) != m) throw PreconditionError("score track length must equal m");
  const std::vector<int> idx = resample_indices(log_scores, m, scheme, rng);
  using Node = typename ParticleSystem<M>::Node;
  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(m));
  for (int a : idx) nodes.push_back(sys.frontier(a));
  std::vector<double> scores(log_scores.begin(), log_scores.end());
  for (Track k : {Track::concurrent, Track::auxiliary, Track::resampling}) {
    if (!sys.has_track(k)) continue;
    const std::span<const double> old = sys.track(k);
    std::vector<double> nw(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) nw[j] = old[idx[j]] - scores[idx[j]];
    sys.track_mut(k) = std::move(nw);
  }
  sys.replace_frontier(std::move(nodes));
  return idx;
}

// Mixture Kalman style expansion: every particle is extended by every
// alphabet member with its one-step target weight, and m children are kept by
// Fearnhead-Clifford selection. Only the concurrent track is maintained.
template <FiniteModel M>
void optimal_finite_step(ParticleSystem<M>& sys, const M& model, Rng& rng) {
  const int t = sys.time() + 1;
  if (t > model.horizon()) throw PreconditionError("horizon exceeded");
  const int m = sys.size();
  const int n = model.alphabet_size(t);
  using Node = typename ParticleSystem<M>::Node;
  std::vector<Node> children(static_cast<std::size_t>(m) * n);
  std::vector<double> logw(static_cast<std::size_t>(m) * n);
  const auto w = sys.logw();
  parallel_for(m, [&](int j) {
    const Node& p = sys.frontier(j);
    for (int i = 0; i < n; ++i) {
      auto x = model.symbol(t, i);
      auto a = model.advance(p.carry, x, t);
      const std::size_t k = static_cast<std::size_t>(j) * n + i;
      logw[k] = finite_or_neg_inf(w[j] + a.log_target());
      children[k] = Node{std::move(x), std::move(a.carry), j};
    }
  });
  const FcSelection sel = optimal_finite_select(logw, m, rng);
  std::vector<Node> next;
  next.reserve(sel.index.size());
  for (int k : sel.index) next.push_back(children[static_cast<std::size_t>(k)]);
  if (static_cast<int>(next.size()) != m) throw NumericalError("optimal-finite selection kept fewer than m children");
  sys.drop_track(Track::auxiliary);
  sys.drop_track(Track::resampling);
  sys.push_layer(std::move(next));
  sys.logw_mut() = sel.logw;
}

struct Estimate {
  double value = 0.0;
  double se = 0.0;  // delta-method Monte Carlo standard error
};

// Self-normalized sum_j w_j h_j / sum_j w_j with its standard error.
template <class H>
Estimate weighted_estimate(std::span<const double> logw, H&& h) {
  const std::vector<double> w = shifted_exp(logw);
  double sw = 0.0, swh = 0.0;
  std::vector<double> hv(w.size(), 0.0);
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] == 0.0) continue;
    hv[j] = h(static_cast<int>(j));
    sw += w[j];
    swh += w[j] * hv[j];
  }
  Estimate e;
  e.value = swh / sw;
  double v = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double d = w[j] * (hv[j] - e.value);
    v += d * d;
  }
  e.se = std::sqrt(v) / sw;
  return e;
}

template <SequentialModel M, class H>
Estimate estimate(const ParticleSystem<M>& sys, H&& h, Track track = Track::concurrent) {
  return weighted_estimate(sys.track(track), [&](int j) { return h(sys, j); });
}

// Debug snapshot: particle, final-state components, each maintained track.
template <SequentialModel M, class Components>
void write_snapshot_csv(std::ostream& os, const ParticleSystem<M>& sys, Components&& components) {
  const int m = sys.size();
  const std::vector<double> first = components(sys.frontier(0).x);
  os << "particle";
  for (std::size_t c = 0; c < first.size(); ++c) os << ",x" << c;
  std::vector<Track> tracks;
  for (Track k : {Track::concurrent, Track::auxiliary, Track::resampling})
    if (sys.has_track(k)) {
      tracks.push_back(k);
      os << ',' << to_string(k);
    }
  os << '\n';
  os.precision(17);
  for (int j = 0; j < m; ++j) {
    os << j;
    for (double v : components(sys.frontier(j).x)) os << ',' << v;
    for (Track k : tracks) os << ',' << sys.track(k)[j];
    os << '\n';
  }
}

}  // namespace lasmc
