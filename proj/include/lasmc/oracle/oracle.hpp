#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lasmc/engine.hpp"
#include "lasmc/model.hpp"

namespace lasmc {

inline constexpr double kPathTableGuard = 1e7;

// pi_{t+delta}(x_t = a_i) for every alphabet member, by forward filtering to t
// and a backward pass over t+1..min(t+delta, T). Markovian finite models only.
std::vector<double> forward_backward(const ModelSpec& model, int t, int delta);

// pi_{t+delta}(x_t = a_i | x_{t-1} = a_prev); prev is ignored at t = 0.
std::vector<double> forward_backward_conditional(const ModelSpec& model, int t, int delta, int prev);

// Exact joint over x_{0:last} under pi_last, by visiting every path.
struct PathTable {
  int last = 0;
  std::vector<int> sizes;         // alphabet size per time
  std::vector<double> log_joint;  // unnormalized; mixed radix index, x_0 most significant
  double log_z = 0.0;
  std::vector<std::vector<double>> marginals;  // [t][i], normalized

  std::vector<int> path(std::size_t index) const {
    std::vector<int> p(sizes.size());
    for (std::size_t s = sizes.size(); s-- > 0;) {
      p[s] = static_cast<int>(index % static_cast<std::size_t>(sizes[s]));
      index /= static_cast<std::size_t>(sizes[s]);
    }
    return p;
  }
};

template <FiniteModel M>
PathTable enumerate_paths(const M& model, int last) {
  if (last < 0 || last > model.horizon()) throw PreconditionError("enumeration time outside 0..T");
  PathTable tab;
  tab.last = last;
  double total = 1.0;
  for (int s = 0; s <= last; ++s) {
    tab.sizes.push_back(model.alphabet_size(s));
    total *= tab.sizes.back();
    if (total > kPathTableGuard)
      throw GuardError("path enumeration up to t=" + std::to_string(last) + " exceeds the 1e7 path limit");
  }
  tab.log_joint.assign(static_cast<std::size_t>(total), kNegInf);
  std::size_t next = 0;
  std::function<void(const typename M::Carry&, int, double)> visit = [&](const typename M::Carry& c, int s, double lp) {
    for (int i = 0; i < tab.sizes[s]; ++i) {
      if (lp == kNegInf) {
        if (s == last) ++next;
        else visit(c, s + 1, kNegInf);
        continue;
      }
      auto a = model.advance(c, model.symbol(s, i), s);
      const double v = finite_or_neg_inf(a.log_target());
      const double lv = v == kNegInf ? kNegInf : lp + v;
      if (s == last) tab.log_joint[next++] = lv;
      else visit(a.carry, s + 1, lv);
    }
  };
  visit(model.initial_carry(), 0, 0.0);
  tab.log_z = log_sum_exp(tab.log_joint);
  if (tab.log_z == kNegInf) throw NumericalError("target has no support on any path");
  tab.marginals.assign(static_cast<std::size_t>(last) + 1, {});
  for (int s = 0; s <= last; ++s) tab.marginals[s].assign(static_cast<std::size_t>(tab.sizes[s]), 0.0);
  for (std::size_t k = 0; k < tab.log_joint.size(); ++k) {
    if (tab.log_joint[k] == kNegInf) continue;
    const double p = std::exp(tab.log_joint[k] - tab.log_z);
    const std::vector<int> x = tab.path(k);
    for (int s = 0; s <= last; ++s) tab.marginals[s][x[s]] += p;
  }
  return tab;
}

// Runs closure(rng) R times on streams derived from seed and summarizes every
// output coordinate. Replicates are paired: coordinate k of replicate r comes
// from the same run for every k.
struct ReplicateSummary {
  int R = 0;
  std::vector<std::vector<double>> values;  // [r][k]
  std::vector<double> mean, var, var_se;
};

ReplicateSummary replicate_variance(const std::function<std::vector<double>(Rng&)>& closure, int R, std::uint64_t seed);

struct Difference {
  double value = 0.0;
  double se = 0.0;
  double z() const {
    if (se > 0.0) return value / se;
    return value > 0.0 ? -kNegInf : (value < 0.0 ? kNegInf : 0.0);
  }
};

// var_a - var_b with the paired-replicate standard error.
Difference variance_difference(const ReplicateSummary& s, int a, int b);
// mean_a - mean_b with the paired-replicate standard error.
Difference mean_difference(const ReplicateSummary& s, int a, int b);

// Two-state chain with binary emissions, exact in any field type S.
template <class S>
struct TwoStateHmm {
  S init1;    // P(x_0 = 1)
  S stay[2];  // P(x_t = a | x_{t-1} = a)
  S emit1[2]; // P(y_t = 1 | x_t = a)
};

// II = E[(E(h | y_{1:t+delta}) - h)^2] for h = 1{x_t = 1}, averaging over the
// joint law of states and observations. Exhaustive over y, 2^(t+delta) terms.
template <class S>
S information_loss(const TwoStateHmm<S>& p, int t, int delta) {
  if (t < 0 || delta < 0 || t + delta > 20) throw PreconditionError("information_loss needs 0 <= t, delta and t+delta <= 20");
  const int n = t + delta;
  auto tr = [&](int a, int b) { return a == b ? p.stay[a] : S(1) - p.stay[a]; };
  auto em = [&](int a, int y) { return y == 1 ? p.emit1[a] : S(1) - p.emit1[a]; };
  S prior_h = S(0), sum_sq = S(0);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    // alpha over x_s with y_{1:s}; pinned at time t to x_t = 1 in a second pass.
    S all[2] = {S(1) - p.init1, p.init1};
    S hit[2] = {S(1) - p.init1, p.init1};
    if (t == 0) hit[0] = S(0);
    for (int s = 1; s <= n; ++s) {
      const int y = static_cast<int>((code >> (s - 1)) & 1u);
      S na[2], nh[2];
      for (int b = 0; b < 2; ++b) {
        na[b] = (all[0] * tr(0, b) + all[1] * tr(1, b)) * em(b, y);
        nh[b] = (hit[0] * tr(0, b) + hit[1] * tr(1, b)) * em(b, y);
      }
      if (s == t) nh[0] = S(0);
      all[0] = na[0];
      all[1] = na[1];
      hit[0] = nh[0];
      hit[1] = nh[1];
    }
    const S py = all[0] + all[1];
    const S pyh = hit[0] + hit[1];
    prior_h += pyh;
    if (py != S(0)) sum_sq += pyh * pyh / py;
  }
  return prior_h - sum_sq;
}

}  // namespace lasmc
