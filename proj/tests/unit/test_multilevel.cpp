#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "lasmc/kalman/qam.hpp"
#include "lasmc/lookahead/multilevel.hpp"
#include "lasmc/lookahead/pilot.hpp"

using namespace lasmc;
using lasmc::testing::indicator;
using lasmc::testing::two_state_model;
using lasmc::testing::z_score;

namespace {

ModelSpec four_symbol_model(int T, std::uint64_t seed) {
  Rng rng(seed);
  const HmmParams p = random_hmm(4, 3, rng);
  return make_hmm_model(p, simulate_hmm(p, T, rng).y);
}

MultilevelPartition pairs_of_four() { return MultilevelPartition({{{0, 1, 2, 3}}, {{0, 1}, {2, 3}}, {{0}, {1}, {2}, {3}}}, 4); }

double frequency(const ParticleSystem<ModelSpec>& sys, double v) {
  double n = 0.0;
  for (int j = 0; j < sys.size(); ++j) n += indicator(sys.frontier(j).x, v);
  return n / sys.size();
}

}  // namespace

TEST_SUITE("lookahead") {
  TEST_CASE("partitions must nest, cover and end in singletons") {
    const MultilevelPartition p = pairs_of_four();
    CHECK(p.depth() == 2);
    CHECK(p.children(0, 0) == std::vector<int>{0, 1});
    CHECK(p.children(1, 1) == std::vector<int>{2, 3});
    CHECK(p.leaf_of(3) == 3);
    CHECK_THROWS_AS(MultilevelPartition({{{0, 1, 2}}, {{0, 1}, {1, 2}}, {{0}, {1}, {2}}}, 3), PreconditionError);
    CHECK_THROWS_AS(MultilevelPartition({{{0, 1, 2}}, {{0, 1}}, {{0}, {1}, {2}}}, 3), PreconditionError);
    CHECK_THROWS_AS(MultilevelPartition({{{0, 1, 2, 3}}, {{0, 2}, {1, 3}}, {{0, 1}, {2}, {3}}}, 4), PreconditionError);
    CHECK_THROWS_AS(MultilevelPartition({{{0, 1, 2, 3}}, {{0, 1}, {2, 3}}, {{0}, {1, 2}, {3}}}, 4), PreconditionError);
  }

  TEST_CASE("16-QAM digit hierarchy needs 4 + 4 evaluations instead of 16") {
    const QamConstellation con(16);
    const MultilevelPartition p = con.partition();
    CHECK(p.depth() == 2);
    CHECK(p.level_size(1) == 4);
    QamConfig cfg;
    cfg.frame = 20;
    Rng rng(3);
    const QamData d = simulate_qam(cfg, con, rng);
    const QamModel model(cfg, con, d);
    auto sys = initialize(model, 50, rng);
    MultilevelInfo info;
    for (int t = 1; t <= 3; ++t) {
      multilevel_step(sys, model, 1, p, PilotKind::random, rng, &info);
      for (int e : info.evaluations) CHECK(e == 8);
    }
  }

  TEST_CASE("flat hierarchy draws like a one-pilot finite lookahead") {
    const ModelSpec m = two_state_model(5);
    Rng r1(51), r2(52);
    auto a = pilot_initialize(m, 50000, 2, r1);
    auto b = pilot_initialize(m, 50000, 2, r2);
    const MultilevelPartition flat = MultilevelPartition::flat(2);
    for (int t = 1; t <= 3; ++t) {
      multilevel_step(a, m, 2, flat, PilotKind::random, r1);
      pilot_step_finite(b, m, 2, 1, r2);
    }
    // Different streams: compare the two populations' weighted estimates.
    auto h = [](const auto& s, int j) { return indicator(s.frontier(j).x, 1.0); };
    const Estimate ea = estimate(a, h, Track::auxiliary), eb = estimate(b, h, Track::auxiliary);
    CHECK(z_score(ea.value - eb.value, std::hypot(ea.se, eb.se), 0.0) < 3.0);
    const double fa = frequency(a, 1.0), fb = frequency(b, 1.0);
    CHECK(z_score(fa - fb, std::sqrt(2 * fa * (1 - fa) / 50000), 0.0) < 3.0);
  }

  TEST_CASE("multilevel auxiliary weights are proper on a 4-symbol alphabet") {
    // Unnormalized weights across independent runs: the self-normalized
    // standard error is unreliable here because the auxiliary weights are
    // heavy tailed.
    const ModelSpec m = four_symbol_model(4, 9);
    const MultilevelPartition p = pairs_of_four();
    auto run = [&](Rng& r) {
      auto sys = pilot_initialize(m, 1000, 1, r);
      for (int t = 1; t <= 3; ++t) multilevel_step(sys, m, 1, p, PilotKind::random, r);
      std::vector<double> out(8, 0.0);
      for (int j = 0; j < sys.size(); ++j) {
        const int a = static_cast<int>(sys.frontier(j).x(0));
        out[static_cast<std::size_t>(a)] += std::exp(sys.track(Track::auxiliary)[j]) / sys.size();
        out[static_cast<std::size_t>(4 + a)] += std::exp(sys.logw()[j]) / sys.size();
      }
      return out;
    };
    const ReplicateSummary s = replicate_variance(run, 300, 53);
    const double z_ahead = std::exp(enumerate_paths(m, 4).log_z), z_now = std::exp(enumerate_paths(m, 3).log_z);
    const std::vector<double> ahead = forward_backward(m, 3, 1), now = forward_backward(m, 3, 0);
    for (int a = 0; a < 4; ++a) {
      const double se_a = std::sqrt(s.var[a] / 300), se_n = std::sqrt(s.var[4 + a] / 300);
      CHECK(z_score(s.mean[a], se_a, ahead[a] * z_ahead) < 3.0);
      CHECK(z_score(s.mean[4 + a], se_n, now[a] * z_now) < 3.0);
    }
  }

  TEST_CASE("greedy multilevel pilots keep the concurrent weight proper") {
    const ModelSpec m = four_symbol_model(4, 10);
    Rng rng(54);
    auto sys = pilot_initialize(m, 50000, 2, rng);
    const MultilevelPartition p = pairs_of_four();
    for (int t = 1; t <= 2; ++t) {
      multilevel_step(sys, m, 2, p, PilotKind::deterministic, rng);
      const std::vector<double> now = forward_backward(m, t, 0);
      for (int a = 0; a < 4; ++a) {
        const Estimate cur = estimate(sys, [a](const auto& s, int j) { return indicator(s.frontier(j).x, a); });
        CHECK(z_score(cur.value, cur.se, now[a]) < 3.0);
      }
    }
  }

  TEST_CASE("partition size must match the alphabet") {
    const ModelSpec m = two_state_model(3);
    Rng rng(1);
    auto sys = initialize(m, 5, rng);
    CHECK_THROWS_AS(multilevel_step(sys, m, 1, pairs_of_four(), PilotKind::random, rng), PreconditionError);
  }
}
