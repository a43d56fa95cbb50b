#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fixtures.hpp"
#include "lasmc/lookahead/block.hpp"
#include "lasmc/lookahead/exact.hpp"
#include "lasmc/lookahead/weighting.hpp"

using namespace lasmc;
using lasmc::testing::indicator;
using lasmc::testing::two_state_model;
using lasmc::testing::z_score;

namespace {

bool same_population(const ParticleSystem<ModelSpec>& a, const ParticleSystem<ModelSpec>& b) {
  if (a.size() != b.size() || a.time() != b.time()) return false;
  for (int j = 0; j < a.size(); ++j)
    if (a.frontier(j).x != b.frontier(j).x || a.logw()[j] != b.logw()[j]) return false;
  return true;
}

SpecCarry carry_at(int state, int t) {
  SpecCarry c;
  c.last = scalar_state(state);
  c.t = t;
  return c;
}

}  // namespace

TEST_SUITE("lookahead") {
  TEST_CASE("lookahead weighting with zero depth is the SIS step bit for bit") {
    const ModelSpec m = two_state_model(4);
    Rng r1(3), r2(3);
    auto a = lookahead_weighting_initialize(m, 500, 0, r1);
    auto b = initialize(m, 500, r2);
    for (int t = 1; t <= 4; ++t) {
      lookahead_weighting_step(a, m, 0, r1);
      sis_step(b, m, r2);
      CHECK(same_population(a, b));
    }
  }

  TEST_CASE("lookahead weighting estimate of P(x_t=1 | y_{1:t+2})") {
    const ModelSpec m = two_state_model(5);
    Rng rng(21);
    auto sys = lookahead_weighting_initialize(m, 50000, 2, rng, 4);
    for (int t = 1; t <= 3; ++t) {
      lookahead_weighting_step(sys, m, 2, rng);
      const Estimate e = lagged_estimate(sys, 2, [](const StateVec& x) { return indicator(x, 1.0); });
      CHECK(z_score(e.value, e.se, forward_backward(m, t, 2)[1]) < 3.0);
    }
    CHECK_THROWS_AS(lookahead_weighting_initialize(m, 10, 2, rng, 2), PreconditionError);
  }

  TEST_CASE("exact marginal with zero depth is the one-step posterior") {
    const ModelSpec m = two_state_model(4);
    for (int prev = 0; prev < 2; ++prev) {
      const SpecCarry c = carry_at(prev, 1);
      const LookaheadMarginal r = exact_lookahead_marginal(m, c, 2, 0);
      const std::vector<double> lp = posterior_log_probs(m, c, 2);
      for (int i = 0; i < 2; ++i) CHECK(r.prob[i] == doctest::Approx(std::exp(lp[i])).epsilon(1e-14));
    }
  }

  TEST_CASE("two-step exact marginal sums pi_{t+2} over the future pair") {
    const ModelSpec m = two_state_model(5);
    const PathTable tab = enumerate_paths(m, 4);
    for (int prev = 0; prev < 2; ++prev) {
      const LookaheadMarginal r = exact_lookahead_marginal(m, carry_at(prev, 1), 2, 2);
      std::vector<double> mass(2, 0.0);
      for (std::size_t k = 0; k < tab.log_joint.size(); ++k) {
        const std::vector<int> x = tab.path(k);
        if (x[1] == prev) mass[static_cast<std::size_t>(x[2])] += std::exp(tab.log_joint[k] - tab.log_z);
      }
      const double z = mass[0] + mass[1];
      CHECK(std::abs(r.prob[0] + r.prob[1] - 1.0) < 1e-12);
      for (int i = 0; i < 2; ++i) CHECK(std::abs(r.prob[i] - mass[i] / z) < 1e-12);
    }
  }

  TEST_CASE("uniform transitions with missing observations give a uniform marginal") {
    HmmParams p;
    p.init = Eigen::Vector3d::Constant(1.0 / 3.0);
    p.trans = Eigen::Matrix3d::Constant(1.0 / 3.0);
    p.emit = (Eigen::Matrix<double, 3, 2>() << 0.1, 0.9, 0.5, 0.5, 0.8, 0.2).finished();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const ModelSpec m = make_hmm_model(p, ObservationSeq::from_scalars(std::vector<double>(4, nan)));
    const LookaheadMarginal r = exact_lookahead_marginal(m, carry_at(2, 0), 1, 3);
    for (double q : r.prob) CHECK(q == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }

  TEST_CASE("exact marginal equals the forward-backward conditional on a random 3-state model") {
    Rng rng(8);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const HmmParams p = random_hmm(3, 2, rng);
      const ModelSpec m = make_hmm_model(p, simulate_hmm(p, 6, rng).y);
      for (int t = 1; t <= 6; ++t)
        for (int prev = 0; prev < 3; ++prev) {
          const LookaheadMarginal r = exact_lookahead_marginal(m, carry_at(prev, t - 1), t, 2);
          const std::vector<double> fc = forward_backward_conditional(m, t, 2, prev);
          for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(r.prob[i] - fc[i]));
        }
    }
    CHECK(worst <= 1e-10);
  }

  TEST_CASE("exact step with zero depth is posterior-trial SIS") {
    const ModelSpec post = two_state_model(4, TrialKind::posterior);
    Rng r1(5), r2(5);
    auto a = exact_lookahead_initialize(post, 400, 0, r1);
    auto b = initialize(post, 400, r2);
    for (int t = 1; t <= 4; ++t) {
      exact_lookahead_step(a, post, 0, r1);
      sis_step(b, post, r2);
      for (int j = 0; j < 400; ++j) {
        CHECK(a.frontier(j).x == b.frontier(j).x);
        CHECK(a.logw()[j] == doctest::Approx(b.logw()[j]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("exact lookahead sampling is properly weighted for pi_{t+delta}") {
    const ModelSpec m = two_state_model(5);
    Rng rng(31);
    auto sys = exact_lookahead_initialize(m, 50000, 2, rng);
    ExactStepInfo info;
    for (int t = 1; t <= 3; ++t) {
      exact_lookahead_step(sys, m, 2, rng, &info);
      const double truth = forward_backward(m, t, 2)[1];
      const Estimate e = estimate(sys, [](const auto& s, int j) { return indicator(s.frontier(j).x, 1.0); });
      CHECK(z_score(e.value, e.se, truth) < 3.0);
      const Estimate rb = rao_blackwell_estimate(sys, info, [](int, int i) { return i == 1 ? 1.0 : 0.0; });
      CHECK(z_score(rb.value, rb.se, truth) < 3.0);
    }
  }

  TEST_CASE("exact enumeration past the guard is refused") {
    Rng rng(1);
    const HmmParams p = random_hmm(40, 2, rng);
    const ModelSpec m = make_hmm_model(p, simulate_hmm(p, 6, rng).y);
    CHECK_THROWS_AS(exact_lookahead_marginal(m, carry_at(0, 0), 1, 4), GuardError);
  }

  TEST_CASE("block sampling with zero length and prior proposal is the SIS step") {
    const ModelSpec m = two_state_model(4);
    BlockProposal<ModelSpec> prop;
    prop.draw = [&m](const SpecCarry& c, std::span<const StateVec>, int t, Rng& r) {
      auto d = m.draw_trial(c, t, r);
      return BlockDraw<StateVec>{{d.x}, d.log_q};
    };
    prop.log_lambda = [](const SpecCarry&, std::span<const StateVec>, std::span<const StateVec>, int) { return 0.0; };
    Rng r1(6), r2(6);
    auto a = block_sampling_initialize(m, 300, 0, r1);
    auto b = initialize(m, 300, r2);
    for (int t = 1; t <= 4; ++t) {
      block_sampling_step(a, m, 0, prop, r1);
      sis_step(b, m, r2);
      CHECK(same_population(a, b));
    }
  }

  TEST_CASE("optimal block proposal reproduces the exact lookahead weight update") {
    const ModelSpec m = two_state_model(5);
    const int delta = 2;
    const BlockProposal<ModelSpec> prop = optimal_block_proposal(m, delta);
    Rng rng(13);
    auto sys = block_sampling_initialize(m, 200, delta, rng, 6);
    for (int step = 0; step < 4; ++step) {
      const int t = sys.time() - delta + 1;
      std::vector<double> expected(200);
      for (int j = 0; j < 200; ++j) {
        const SpecCarry prefix = t == 0 ? m.initial_carry() : sys.node_at(j, t - 1).carry;
        expected[j] = sys.logw()[j] + log_future_mass(m, prefix, t, t + delta) - log_future_mass(m, prefix, t, t + delta - 1);
      }
      block_sampling_step(sys, m, delta, prop, rng);
      for (int j = 0; j < 200; ++j) CHECK(sys.logw()[j] == doctest::Approx(expected[j]).epsilon(1e-12));
    }
  }

  TEST_CASE("optimal block draws x_t from the exact lookahead marginal") {
    const ModelSpec m = two_state_model(5);
    const BlockProposal<ModelSpec> prop = optimal_block_proposal(m, 2);
    const SpecCarry prefix = carry_at(1, 1);
    const double p1 = exact_lookahead_marginal(m, prefix, 2, 2).prob[1];
    Rng rng(17);
    const int n = 40000;
    int hits = 0;
    for (int k = 0; k < n; ++k) hits += prop.draw(prefix, {}, 2, rng).block[0](0) == 1.0 ? 1 : 0;
    const double f = static_cast<double>(hits) / n;
    CHECK(z_score(f, std::sqrt(p1 * (1 - p1) / n), p1) < 3.0);
  }

  TEST_CASE("block sampling is properly weighted for pi_{t+delta}") {
    const ModelSpec m = two_state_model(5);
    const BlockProposal<ModelSpec> prop = optimal_block_proposal(m, 2);
    Rng rng(19);
    auto sys = block_sampling_initialize(m, 50000, 2, rng, 5);
    while (sys.time() < 5) {
      block_sampling_step(sys, m, 2, prop, rng);
      const int t = sys.time() - 2;
      if (t < 1) continue;
      const Estimate e = lagged_estimate(sys, 2, [](const StateVec& x) { return indicator(x, 1.0); });
      CHECK(z_score(e.value, e.se, forward_backward(m, t, 2)[1]) < 3.0);
    }
  }
}
