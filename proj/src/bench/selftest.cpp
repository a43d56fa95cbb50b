#include <cmath>
#include <sstream>

#include "lasmc/bench/cli.hpp"
#include "lasmc/bench/csv.hpp"
#include "lasmc/lookahead/exact.hpp"
#include "lasmc/models/hmm.hpp"
#include "lasmc/oracle/oracle.hpp"

namespace lasmc::bench {

namespace {

SelftestResult check(std::string name, double err, double tol) {
  std::ostringstream d;
  d << "max error " << err << " (tolerance " << tol << ")";
  return {std::move(name), err <= tol, d.str()};
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
  std::vector<SelftestResult> out;
  Rng rng(20240611);
  double fb_err = 0.0, cond_err = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const HmmParams p = random_hmm(3, 2, rng);
    const HmmSample s = simulate_hmm(p, 5, rng);
    const ModelSpec model = make_hmm_model(p, s.y);
    const PathTable tab = enumerate_paths(model, 5);
    for (int t = 0; t <= 5; ++t) {
      const std::vector<double> fb = forward_backward(model, t, 5 - t);
      for (int i = 0; i < 3; ++i) fb_err = std::max(fb_err, std::abs(fb[i] - tab.marginals[t][i]));
    }
    for (int t = 1; t <= 5; ++t)
      for (int prev = 0; prev < 3; ++prev) {
        SpecCarry c;
        c.last = scalar_state(prev);
        c.t = t - 1;
        const LookaheadMarginal em = exact_lookahead_marginal(model, c, t, 2);
        const std::vector<double> fc = forward_backward_conditional(model, t, 2, prev);
        for (int i = 0; i < 3; ++i) cond_err = std::max(cond_err, std::abs(em.prob[i] - fc[i]));
      }
  }
  out.push_back(check("forward-backward equals path enumeration", fb_err, 1e-10));
  out.push_back(check("exact lookahead marginal equals forward-backward conditional", cond_err, 1e-10));

  TwoStateHmm<double> two{0.5, {0.9, 0.8}, {0.2, 0.7}};
  double rise = 0.0;
  double prev = information_loss(two, 2, 0);
  for (int d = 1; d <= 4; ++d) {
    const double cur = information_loss(two, 2, d);
    rise = std::max(rise, cur - prev);
    prev = cur;
  }
  out.push_back(check("information loss is non-increasing in the lookahead", std::max(0.0, rise), 1e-12));

  ResultTable tab;
  tab.labels = {{"note", "a,\"quoted\"\nfield"}};
  tab.columns = {"x"};
  tab.rows = {{0.1}, {1.0 / 3.0}};
  const auto rec = parse_csv(to_csv(tab));
  const bool csv_ok = rec.size() == 5 && rec[1][1] == tab.labels[0].second && std::stod(rec[2][3]) == 1.0 / 3.0;
  out.push_back({"CSV quoting and double round trip", csv_ok, csv_ok ? "ok" : "mismatch"});
  return out;
}

}  // namespace lasmc::bench
