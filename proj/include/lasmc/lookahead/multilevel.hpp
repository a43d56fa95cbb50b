#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "lasmc/engine.hpp"
#include "lasmc/lookahead/deterministic.hpp"

namespace lasmc {

// Levels 0..L of subsets of alphabet indices {0..n-1}. Level 0 is the whole
// alphabet, level L is all singletons, every level partitions the alphabet and
// each subset lies inside exactly one subset of the level above.
class MultilevelPartition {
 public:
  MultilevelPartition() = default;
  MultilevelPartition(std::vector<std::vector<std::vector<int>>> levels, int alphabet_size);

  // Only the root and the singletons (L = 1).
  static MultilevelPartition flat(int alphabet_size);

  int depth() const { return static_cast<int>(levels_.size()) - 1; }  // L
  int alphabet_size() const { return n_; }
  int level_size(int l) const { return static_cast<int>(levels_.at(l).size()); }  // D_l
  const std::vector<int>& subset(int l, int i) const { return levels_.at(l).at(i); }
  const std::vector<int>& children(int l, int i) const { return children_.at(l).at(i); }
  // Index of the level-L singleton holding alphabet member a.
  int leaf_of(int a) const { return leaf_.at(a); }

 private:
  std::vector<std::vector<std::vector<int>>> levels_;
  std::vector<std::vector<std::vector<int>>> children_;
  std::vector<int> leaf_;
  int n_ = 0;
};

enum class PilotKind { random, deterministic };

struct MultilevelInfo {
  std::vector<int> evaluations;  // per particle: candidates scored over all levels
};

namespace detail {

// log pi-prior mass of each member of `subset` at time t, normalized within it.
template <FiniteModel M>
std::vector<double> restricted_prior(const M& model, const typename M::Carry& c, int t, const std::vector<int>& subset) {
  std::vector<double> lp(subset.size());
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if constexpr (HasPriorLogProb<M>) {
      lp[k] = finite_or_neg_inf(model.prior_log_prob(c, t, subset[k]));
    } else {
      lp[k] = finite_or_neg_inf(model.advance(c, model.symbol(t, subset[k]), t).log_transition);
    }
  }
  const double z = log_sum_exp(lp);
  for (double& v : lp) v = z == kNegInf ? kNegInf : v - z;
  return lp;
}

}  // namespace detail

// Samples x_t by descending the partition. At each level every child subset
// of the current node gets one pilot: x_t inside the subset (prior restricted
// to it, or greedy), then delta future steps (q^pilot, or greedy). A child is
// drawn with probability proportional to its pilot weight U; the concurrent
// weight divides by the product of these level probabilities and
//   w_aux = w_{t-1} U_L / prod_l q_l,
// which is proper for pi_{t+delta} with random pilots.
template <FiniteModel M>
void multilevel_step(ParticleSystem<M>& sys, const M& model, int delta, const MultilevelPartition& part,
                     PilotKind kind, Rng& rng, MultilevelInfo* info = nullptr) {
  if (delta < 0) throw PreconditionError("pilot depth must be nonnegative");
  const int t = sys.time() + 1;
  if (t > model.horizon()) throw PreconditionError("horizon exceeded at t=" + std::to_string(t));
  if (part.alphabet_size() != model.alphabet_size(t))
    throw PreconditionError("partition does not match the alphabet size at t=" + std::to_string(t));
  const int last = std::min(t + delta, model.horizon());
  const int m = sys.size();
  const int L = part.depth();
  using Carry = typename M::Carry;
  using Node = typename ParticleSystem<M>::Node;
  std::vector<Node> next(static_cast<std::size_t>(m));
  std::vector<double> lw(static_cast<std::size_t>(m)), la(static_cast<std::size_t>(m));
  if (info) info->evaluations.assign(static_cast<std::size_t>(m), 0);
  const auto prev = sys.logw();
  for_each_particle(m, rng(), [&](int j, Rng& r) {
    const Carry& prefix = sys.frontier(j).carry;
    int node = 0;
    double log_qprod = 0.0, lu_sel = 0.0, lt_sel = kNegInf;
    int sym = part.subset(0, 0).front();
    Carry carry_sel = prefix;
    bool dead = prev[j] == kNegInf;
    for (int l = 1; l <= L && !dead; ++l) {
      const std::vector<int>& ch = part.children(l - 1, node);
      std::vector<double> lu(ch.size());
      std::vector<int> xs(ch.size());
      std::vector<double> lts(ch.size());
      std::vector<Carry> cs(ch.size());
      for (std::size_t c = 0; c < ch.size(); ++c) {
        const std::vector<int>& S = part.subset(l, ch[c]);
        int a = S.front();
        double lqc = 0.0;
        if (S.size() > 1) {
          if (kind == PilotKind::random) {
            const std::vector<double> lp = detail::restricted_prior(model, prefix, t, S);
            if (log_sum_exp(lp) == kNegInf) {
              lu[c] = kNegInf;
              lts[c] = kNegInf;
              xs[c] = a;
              continue;
            }
            const int k = sample_log_categorical(lp, r);
            a = S[k];
            lqc = lp[k];
          } else {
            a = greedy_choice(model, prefix, t, S);
          }
        }
        auto adv = model.advance(prefix, model.symbol(t, a), t);
        lts[c] = finite_or_neg_inf(adv.log_target());
        xs[c] = a;
        if (lts[c] == kNegInf) {
          lu[c] = kNegInf;
          continue;
        }
        const double fut = kind == PilotKind::random
                               ? detail::random_pilot_log_weight(model, adv.carry, t + 1, last, r)
                               : detail::greedy_pilot_log_weight(model, adv.carry, t + 1, last);
        lu[c] = finite_or_neg_inf(lts[c] - lqc + fut);
        cs[c] = std::move(adv.carry);
      }
      if (info) info->evaluations[j] += static_cast<int>(ch.size());
      const double lse = log_sum_exp(lu);
      if (lse == kNegInf) {
        dead = true;
        break;
      }
      const int k = sample_log_categorical(lu, r);
      log_qprod += lu[k] - lse;
      node = ch[k];
      lu_sel = lu[k];
      if (l == L) {
        sym = xs[k];
        lt_sel = lts[k];
        carry_sel = std::move(cs[k]);
      }
    }
    if (dead) {
      lw[j] = la[j] = kNegInf;
      auto adv = model.advance(prefix, model.symbol(t, sym), t);
      carry_sel = std::move(adv.carry);
    } else {
      lw[j] = prev[j] + lt_sel - log_qprod;
      la[j] = prev[j] + lu_sel - log_qprod;
    }
    next[j] = Node{model.symbol(t, sym), std::move(carry_sel), j};
  });
  sys.push_layer(std::move(next));
  sys.logw_mut() = std::move(lw);
  sys.set_track(Track::auxiliary, std::move(la));
  sys.drop_track(Track::resampling);
}

}  // namespace lasmc
