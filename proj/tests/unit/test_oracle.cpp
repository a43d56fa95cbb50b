#include <doctest.h>

#include <gmpxx.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fixtures.hpp"
#include "lasmc/oracle/oracle.hpp"

using namespace lasmc;
using lasmc::testing::two_state_model;
using lasmc::testing::two_state_params;

TEST_SUITE("oracle-exact") {
  TEST_CASE("missing observations give the predictive marginal g_0 P^t") {
    const HmmParams p = two_state_params();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const ModelSpec m = make_hmm_model(p, ObservationSeq::from_scalars(std::vector<double>(4, nan)));
    Eigen::RowVectorXd pred = p.init.transpose();
    for (int t = 0; t <= 4; ++t) {
      const std::vector<double> fb = forward_backward(m, t, 4 - t);
      for (int i = 0; i < 2; ++i) CHECK(fb[i] == doctest::Approx(pred(i)).epsilon(1e-13));
      pred = pred * p.trans;
    }
  }

  TEST_CASE("forward-backward agrees with path enumeration to 1e-12") {
    const ModelSpec m = two_state_model(5);
    for (int last = 0; last <= 5; ++last) {
      const PathTable tab = enumerate_paths(m, last);
      for (int t = 0; t <= last; ++t) {
        const std::vector<double> fb = forward_backward(m, t, last - t);
        CHECK(std::abs(fb[0] + fb[1] - 1.0) < 1e-12);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(fb[i] - tab.marginals[t][i]) < 1e-12);
      }
    }
    Rng rng(5);
    for (int rep = 0; rep < 10; ++rep) {
      const HmmParams p = random_hmm(3, 3, rng);
      const ModelSpec r = make_hmm_model(p, simulate_hmm(p, 5, rng).y);
      const PathTable tab = enumerate_paths(r, 5);
      for (int t = 0; t <= 5; ++t) {
        const std::vector<double> fb = forward_backward(r, t, 5 - t);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(fb[i] - tab.marginals[t][i]) < 1e-12);
      }
    }
  }

  TEST_CASE("zero lookahead is the filtering marginal") {
    const ModelSpec m = two_state_model(5);
    for (int t = 1; t <= 5; ++t) {
      const PathTable tab = enumerate_paths(m, t);
      const std::vector<double> fb = forward_backward(m, t, 0);
      CHECK(std::abs(fb[1] - tab.marginals[t][1]) < 1e-12);
    }
  }

  TEST_CASE("conditionals match the enumerated joint") {
    const ModelSpec m = two_state_model(5);
    const PathTable tab = enumerate_paths(m, 5);
    for (int t = 1; t <= 3; ++t)
      for (int prev = 0; prev < 2; ++prev) {
        const std::vector<double> fc = forward_backward_conditional(m, t, 5 - t, prev);
        double both = 0.0, given = 0.0;
        for (std::size_t k = 0; k < tab.log_joint.size(); ++k) {
          const std::vector<int> x = tab.path(k);
          if (x[t - 1] != prev) continue;
          const double p = std::exp(tab.log_joint[k] - tab.log_z);
          given += p;
          if (x[t] == 1) both += p;
        }
        CHECK(std::abs(fc[1] - both / given) < 1e-12);
      }
  }

  TEST_CASE("T=0 table is the prior") {
    const ModelSpec m = two_state_model(3);
    const PathTable tab = enumerate_paths(m, 0);
    CHECK(tab.marginals[0][0] == doctest::Approx(0.5));
    CHECK(tab.log_z == doctest::Approx(0.0).epsilon(1e-15));
  }

  TEST_CASE("a deterministic chain puts all mass on one path") {
    HmmParams p;
    p.init = Eigen::Vector2d(1.0, 0.0);
    p.trans = (Eigen::Matrix2d() << 0.0, 1.0, 1.0, 0.0).finished();
    p.emit = (Eigen::Matrix2d() << 0.5, 0.5, 0.5, 0.5).finished();
    const ModelSpec m = make_hmm_model(p, ObservationSeq::from_scalars(std::vector<double>{0, 1, 0, 1}));
    const PathTable tab = enumerate_paths(m, 4);
    int support = 0;
    for (std::size_t k = 0; k < tab.log_joint.size(); ++k) {
      if (tab.log_joint[k] == kNegInf) continue;
      ++support;
      CHECK(tab.path(k) == std::vector<int>{0, 1, 0, 1, 0});
      CHECK(std::exp(tab.log_joint[k] - tab.log_z) == doctest::Approx(1.0));
    }
    CHECK(support == 1);
  }

  TEST_CASE("guards and preconditions are hard errors") {
    Rng rng(1);
    const HmmParams p = random_hmm(10, 2, rng);
    const ModelSpec big = make_hmm_model(p, simulate_hmm(p, 7, rng).y);
    CHECK_THROWS_AS(enumerate_paths(big, 7), GuardError);
    ModelSpec nm = two_state_model(3);
    nm.markovian = false;
    CHECK_THROWS_AS(forward_backward(nm, 1, 1), PreconditionError);
    CHECK_THROWS_AS(replicate_variance([](Rng&) { return std::vector<double>{1.0}; }, 1, 1), PreconditionError);
  }

  TEST_CASE("replicate variance of constant and two-point closures") {
    const ReplicateSummary c = replicate_variance([](Rng&) { return std::vector<double>{3.0}; }, 50, 1);
    CHECK(c.var[0] == 0.0);
    const ReplicateSummary s =
        replicate_variance([](Rng& r) { return std::vector<double>{uniform01(r) < 0.5 ? -1.0 : 1.0}; }, 20000, 2);
    CHECK(s.var[0] == doctest::Approx(1.0).epsilon(0.01));
    const ReplicateSummary again =
        replicate_variance([](Rng& r) { return std::vector<double>{uniform01(r) < 0.5 ? -1.0 : 1.0}; }, 20000, 2);
    CHECK(again.values == s.values);
  }

  TEST_CASE("paired variance difference detects a larger spread") {
    const ReplicateSummary s = replicate_variance(
        [](Rng& r) {
          const double z = std_normal(r);
          return std::vector<double>{2.0 * z + 0.1 * std_normal(r), z};
        },
        500, 3);
    const Difference d = variance_difference(s, 0, 1);
    CHECK(d.value > 0.0);
    CHECK(d.z() > 10.0);
    CHECK(mean_difference(s, 0, 0).value == 0.0);
  }

  TEST_CASE("information loss is non-increasing in exact arithmetic") {
    const auto p = lasmc::testing::two_state_exact<mpq_class>();
    for (int t : {1, 2, 3}) {
      mpq_class prev = information_loss(p, t, 0);
      for (int d = 1; d <= 4; ++d) {
        const mpq_class cur = information_loss(p, t, d);
        CHECK(cur <= prev);
        prev = cur;
      }
    }
    const double approx = information_loss(lasmc::testing::two_state_exact<double>(), 2, 1);
    CHECK(approx == doctest::Approx(information_loss(p, 2, 1).get_d()).epsilon(1e-13));
  }

  TEST_CASE("information loss at zero lookahead matches the enumerated posterior") {
    // II(0) at t=1 is E[P(x_1=1|y_1) P(x_1=0|y_1)] = sum_y p(y) p1(y) p0(y).
    const auto p = lasmc::testing::two_state_exact<double>();
    double prior1 = 0.5 * (1 - 0.9) + 0.5 * 0.8;
    double ii = 0.0;
    for (int y = 0; y < 2; ++y) {
      const double l1 = y == 1 ? 0.7 : 0.3, l0 = y == 1 ? 0.2 : 0.8;
      const double py = prior1 * l1 + (1 - prior1) * l0;
      const double q = prior1 * l1 / py;
      ii += py * q * (1 - q);
    }
    CHECK(information_loss(p, 1, 0) == doctest::Approx(ii).epsilon(1e-14));
  }
}
