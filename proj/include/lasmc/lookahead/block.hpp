#pragma once

#include <functional>
#include <span>
#include <vector>

#include "lasmc/lookahead/exact.hpp"

namespace lasmc {

template <class State>
struct BlockDraw {
  std::vector<State> block;  // x*_{t:t+delta}
  double log_q = 0.0;
};

// q_t(x*_{t:t+delta} | prefix, old block) and the artificial conditional
// lambda_t(old block | prefix, x*). The prefix is given by its carry at t-1.
template <SequentialModel M>
struct BlockProposal {
  using State = typename M::State;
  using Carry = typename M::Carry;
  std::function<BlockDraw<State>(const Carry& prefix, std::span<const State> old_block, int t, Rng& rng)> draw;
  std::function<double(const Carry& prefix, std::span<const State> old_block, std::span<const State> new_block, int t)>
      log_lambda;
};

// Initial population for block sampling: paths reach time delta - 1 so that
// the first block step redraws x_{0:delta-1} and adds x_delta.
template <SequentialModel M>
ParticleSystem<M> block_sampling_initialize(const M& model, int m, int delta, Rng& rng, int retain_depth = 0) {
  if (delta < 0) throw PreconditionError("block length must be nonnegative");
  if (retain_depth > 0 && retain_depth <= delta + 1) throw PreconditionError("retain depth must exceed the block length");
  ParticleSystem<M> sys = initialize(model, m, rng, retain_depth);
  for (int s = 1; s < delta; ++s) sis_step(sys, model, rng);
  return sys;
}

// Replaces x_{t:t+delta-1} by x*_{t:t+delta}, t = frontier - delta + 1, with
// w *= pi_{t+delta}(prefix, x*) lambda / (pi_{t+delta-1}(prefix, old) q).
// A zero lambda or q gives a -inf weight.
template <SequentialModel M>
void block_sampling_step(ParticleSystem<M>& sys, const M& model, int delta, const BlockProposal<M>& proposal, Rng& rng) {
  using State = typename M::State;
  using Carry = typename M::Carry;
  using Node = typename ParticleSystem<M>::Node;
  const int t = delta == 0 ? sys.time() + 1 : sys.time() - delta + 1;
  if (t + delta > model.horizon()) throw PreconditionError("horizon exceeded: block needs y_" + std::to_string(t + delta));
  if (t > 0 && t - 1 < sys.oldest_time()) throw PreconditionError("prefix no longer stored");
  const int m = sys.size();
  struct Result {
    std::vector<Node> block;
    double inc = 0.0;
  };
  std::vector<Result> res(static_cast<std::size_t>(m));
  std::vector<int> prefix_index(static_cast<std::size_t>(m), -1);
  for_each_particle(m, rng(), [&](int j, Rng& r) {
    Carry prefix = model.initial_carry();
    std::vector<State> old_block;
    if (delta > 0) {
      const auto nodes = sys.lineage(j, t == 0 ? sys.oldest_time() : t - 1);
      const std::size_t off = t == 0 ? 0 : 1;
      if (t > 0) {
        prefix = nodes[0]->carry;
        prefix_index[j] = sys.ancestor_index(j, t - 1);
      }
      for (std::size_t k = off; k < nodes.size(); ++k) old_block.push_back(nodes[k]->x);
    } else {
      prefix = sys.frontier(j).carry;
      prefix_index[j] = j;
    }
    BlockDraw<State> d = proposal.draw(prefix, old_block, t, r);
    if (static_cast<int>(d.block.size()) != delta + 1) throw PreconditionError("block proposal returned wrong length");
    double log_new = 0.0, log_old = 0.0;
    Carry c = prefix;
    Result& out = res[j];
    for (int k = 0; k <= delta; ++k) {
      auto a = model.advance(c, d.block[k], t + k);
      log_new += a.log_target();
      out.block.push_back(Node{d.block[k], a.carry, -1});
      c = std::move(a.carry);
    }
    c = prefix;
    for (int k = 0; k < delta; ++k) {
      auto a = model.advance(c, old_block[k], t + k);
      log_old += a.log_target();
      c = std::move(a.carry);
    }
    const double lam = delta == 0 ? 0.0 : proposal.log_lambda(prefix, old_block, d.block, t);
    out.inc = (d.log_q > kNegInf && lam > kNegInf) ? finite_or_neg_inf(log_new - log_old + lam - d.log_q) : kNegInf;
  });
  // New frontier first so that older layers can take appended nodes.
  std::vector<Node> frontier(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) frontier[j] = res[j].block.back();
  sys.push_layer(std::move(frontier));
  auto& front = sys.frontier_layer_mut();
  for (int j = 0; j < m; ++j) {
    int parent = prefix_index[j];
    for (int k = 0; k < delta; ++k) {
      Node n = std::move(res[j].block[k]);
      n.parent = parent;
      parent = sys.append_node(t + k, std::move(n));
    }
    front[j].parent = parent;
  }
  auto& lw = sys.logw_mut();
  for (int j = 0; j < m; ++j) lw[j] += res[j].inc;
}

// The optimal block trial for finite models: q_t = pi_{t+delta}(block | prefix)
// and lambda_t = pi_{t+delta-1}(old block | prefix). With these the step
// coincides with exact lookahead sampling.
template <FiniteModel M>
BlockProposal<M> optimal_block_proposal(const M& model, int delta) {
  using State = typename M::State;
  using Carry = typename M::Carry;
  BlockProposal<M> p;
  const M* mp = &model;
  p.draw = [mp, delta](const Carry& prefix, std::span<const State>, int t, Rng& rng) {
    BlockDraw<State> d;
    Carry c = prefix;
    const int last = t + delta;
    for (int s = t; s <= last; ++s) {
      const LookaheadMarginal marg = exact_lookahead_marginal(*mp, c, s, last - s);
      const int i = sample_log_categorical(marg.log_branch, rng);
      d.log_q += marg.log_branch[i] - marg.log_total;
      State x = mp->symbol(s, i);
      c = mp->advance(c, x, s).carry;
      d.block.push_back(std::move(x));
    }
    return d;
  };
  p.log_lambda = [mp, delta](const Carry& prefix, std::span<const State> old_block, std::span<const State>, int t) {
    double lp = 0.0;
    Carry c = prefix;
    for (int k = 0; k < delta; ++k) {
      auto a = mp->advance(c, old_block[k], t + k);
      lp += a.log_target();
      c = std::move(a.carry);
    }
    return lp - log_future_mass(*mp, prefix, t, t + delta - 1);
  };
  return p;
}

}  // namespace lasmc
