#include "lasmc/oracle/oracle.hpp"

#include <string>

namespace lasmc {

namespace {

struct Lattice {
  int n = 0;
  int last = 0;
  std::vector<double> log_g0;                     // [i]
  std::vector<Eigen::MatrixXd> log_gf;  // [s](a, b) = log g_s(b | a) + log f_s(y_s | a, b), s >= 1
};

Lattice build(const ModelSpec& model, int last) {
  if (!model.alphabet) throw PreconditionError("forward-backward needs a finite alphabet");
  if (!model.markovian) throw PreconditionError("forward-backward needs a markovian model; use enumerate_paths");
  Lattice L;
  L.n = model.alphabet->size();
  L.last = last;
  const auto& sym = model.alphabet->symbols;
  L.log_g0.resize(static_cast<std::size_t>(L.n));
  for (int i = 0; i < L.n; ++i) L.log_g0[i] = finite_or_neg_inf(model.transition.log_density({}, sym[i], 0));
  L.log_gf.assign(static_cast<std::size_t>(last) + 1, Eigen::MatrixXd());
  for (int s = 1; s <= last; ++s) {
    L.log_gf[s].resize(L.n, L.n);
    for (int a = 0; a < L.n; ++a) {
      const History h(&sym[a], 1);
      for (int b = 0; b < L.n; ++b) {
        const double g = finite_or_neg_inf(model.transition.log_density(h, sym[b], s));
        L.log_gf[s](a, b) =
            g == kNegInf ? kNegInf : g + finite_or_neg_inf(model.log_observation(h, sym[b], model.observations.at(s), s));
      }
    }
  }
  return L;
}

// log beta_t(b) = log sum over x_{t+1..last} of prod g f, given x_t = b.
std::vector<double> backward(const Lattice& L, int t) {
  std::vector<double> beta(static_cast<std::size_t>(L.n), 0.0);
  for (int s = L.last; s > t; --s) {
    std::vector<double> nb(static_cast<std::size_t>(L.n));
    for (int a = 0; a < L.n; ++a) {
      std::vector<double> v(static_cast<std::size_t>(L.n));
      for (int b = 0; b < L.n; ++b) v[b] = L.log_gf[s](a, b) + beta[b];
      nb[a] = log_sum_exp(v);
    }
    beta = std::move(nb);
  }
  return beta;
}

std::vector<double> normalized(std::vector<double> lp) {
  const double z = log_sum_exp(lp);
  if (z == kNegInf) throw NumericalError("oracle distribution has no support");
  for (double& v : lp) v = std::exp(v - z);
  return lp;
}

void check_time(const ModelSpec& model, int t, int delta) {
  if (t < 0 || t > model.horizon()) throw PreconditionError("time outside 0..T");
  if (delta < 0) throw PreconditionError("lookahead depth must be nonnegative");
}

}  // namespace

std::vector<double> forward_backward(const ModelSpec& model, int t, int delta) {
  check_time(model, t, delta);
  const Lattice L = build(model, std::min(t + delta, model.horizon()));
  std::vector<double> alpha = L.log_g0;
  for (int s = 1; s <= t; ++s) {
    std::vector<double> na(static_cast<std::size_t>(L.n));
    for (int b = 0; b < L.n; ++b) {
      std::vector<double> v(static_cast<std::size_t>(L.n));
      for (int a = 0; a < L.n; ++a) v[a] = alpha[a] + L.log_gf[s](a, b);
      na[b] = log_sum_exp(v);
    }
    alpha = std::move(na);
  }
  const std::vector<double> beta = backward(L, t);
  for (int b = 0; b < L.n; ++b) alpha[b] += beta[b];
  return normalized(std::move(alpha));
}

std::vector<double> forward_backward_conditional(const ModelSpec& model, int t, int delta, int prev) {
  check_time(model, t, delta);
  const Lattice L = build(model, std::min(t + delta, model.horizon()));
  if (t > 0 && (prev < 0 || prev >= L.n)) throw PreconditionError("previous state index outside the alphabet");
  const std::vector<double> beta = backward(L, t);
  std::vector<double> lp(static_cast<std::size_t>(L.n));
  for (int b = 0; b < L.n; ++b)
    lp[b] = (t == 0 ? L.log_g0[b] : L.log_gf[t](prev, b)) + beta[b];
  return normalized(std::move(lp));
}

ReplicateSummary replicate_variance(const std::function<std::vector<double>(Rng&)>& closure, int R, std::uint64_t seed) {
  if (R < 2) throw PreconditionError("replicate_variance needs R >= 2");
  ReplicateSummary s;
  s.R = R;
  s.values.assign(static_cast<std::size_t>(R), {});
  parallel_for(R, [&](int r) {
    Rng rng = make_stream(seed, {0x7265706cULL, static_cast<std::uint64_t>(r)});
    s.values[r] = closure(rng);
  });
  const std::size_t k = s.values[0].size();
  for (const auto& v : s.values)
    if (v.size() != k) throw PreconditionError("replicates returned different output sizes");
  s.mean.assign(k, 0.0);
  s.var.assign(k, 0.0);
  s.var_se.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    double m = 0.0;
    for (const auto& v : s.values) m += v[c];
    m /= R;
    std::vector<double> d(static_cast<std::size_t>(R));
    double var = 0.0;
    for (int r = 0; r < R; ++r) {
      d[r] = (s.values[r][c] - m) * (s.values[r][c] - m);
      var += d[r];
    }
    var /= (R - 1);
    const double md = var * (R - 1) / R;
    double vd = 0.0;
    for (double x : d) vd += (x - md) * (x - md);
    vd /= (R - 1);
    s.mean[c] = m;
    s.var[c] = var;
    s.var_se[c] = std::sqrt(vd / R) * R / (R - 1);
  }
  return s;
}

namespace {

Difference paired(const ReplicateSummary& s, int a, int b, bool squared) {
  const int R = s.R;
  if (a < 0 || b < 0 || a >= static_cast<int>(s.mean.size()) || b >= static_cast<int>(s.mean.size()))
    throw PreconditionError("replicate coordinate out of range");
  std::vector<double> d(static_cast<std::size_t>(R));
  for (int r = 0; r < R; ++r) {
    const double xa = s.values[r][a], xb = s.values[r][b];
    d[r] = squared ? ((xa - s.mean[a]) * (xa - s.mean[a]) - (xb - s.mean[b]) * (xb - s.mean[b])) * R / (R - 1)
                   : xa - xb;
  }
  double m = 0.0;
  for (double x : d) m += x;
  m /= R;
  double v = 0.0;
  for (double x : d) v += (x - m) * (x - m);
  v /= (R - 1);
  return {m, std::sqrt(v / R)};
}

}  // namespace

Difference variance_difference(const ReplicateSummary& s, int a, int b) { return paired(s, a, b, true); }
Difference mean_difference(const ReplicateSummary& s, int a, int b) { return paired(s, a, b, false); }

}  // namespace lasmc
