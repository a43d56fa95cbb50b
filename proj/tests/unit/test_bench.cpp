#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lasmc/bench/cli.hpp"
#include "lasmc/bench/config.hpp"
#include "lasmc/bench/csv.hpp"
#include "lasmc/bench/experiments.hpp"
#include "lasmc/bench/lagged.hpp"
#include "lasmc/bench/reference.hpp"

using namespace lasmc;
using namespace lasmc::bench;

namespace {

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lasmc_bench_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

ExperimentConfig small_nonlinear() {
  ExperimentConfig c = default_config(Experiment::nonlinear);
  c.strategy.kind = Strategy::pilot;
  c.strategy.delta = 1;
  c.strategy.pilot.A = 1;
  c.strategy.pilot.smooth = true;
  c.lookaheads = {1, 2};
  c.m = 60;
  c.reps = 5;
  c.T = 15;
  return c;
}

}  // namespace

TEST_SUITE("bench-cli") {
  TEST_CASE("CSV fields round-trip through quoting") {
    ResultTable t;
    t.labels = {{"note", "a,\"b\"\nc"}};
    t.columns = {"x", "y,z"};
    t.rows = {{1.0 / 3.0, std::numeric_limits<double>::quiet_NaN()}, {2.5, -1e-300}};
    const std::string text = to_csv(t);
    CHECK(text.find("\r\n") != std::string::npos);
    const auto rec = parse_csv(text);
    REQUIRE(rec.size() == 5);
    CHECK(rec[0] == std::vector<std::string>{"row", "note", "rep", "x", "y,z"});
    CHECK(rec[1][1] == "a,\"b\"\nc");
    CHECK(std::stod(rec[1][3]) == 1.0 / 3.0);
    CHECK(rec[1][4].empty());
    CHECK(std::stod(rec[2][4]) == -1e-300);
    CHECK(rec[3][0] == "mean");
    CHECK(std::stod(rec[3][4]) == -1e-300);
    CHECK(rec[4][0] == "se");
    CHECK_THROWS_AS(parse_csv("a,\"b"), ConfigError);
    CHECK_THROWS_AS(parse_csv("a,b\"c\""), ConfigError);
  }

  TEST_CASE("column statistics skip missing values") {
    ResultTable t;
    t.columns = {"v"};
    t.rows = {{1.0}, {3.0}, {std::numeric_limits<double>::quiet_NaN()}};
    const auto [m, se] = t.mean_se(0);
    CHECK(m == 2.0);
    CHECK(se == doctest::Approx(1.0));
    CHECK(t.column("v") == 0);
    CHECK(t.column("w") == -1);
    CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({5.0}, 0.9) == 5.0);
  }

  TEST_CASE("configs reject unknown keys and bad values") {
    using nlohmann::json;
    CHECK_THROWS_AS(config_from_json(json{{"experiment", "nonlinear"}, {"particles", 10}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"experiment", "weather"}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"experiment", "nonlinear"}, {"m", 0}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"experiment", "nonlinear"}, {"strategy", {{"kind", "exact"}}}}),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"experiment", "qam"}, {"qam", {{"order", 8}}}}), ConfigError);
    const ExperimentConfig c = config_from_json(json{{"experiment", "tracking"}, {"m", 17}});
    CHECK(c.experiment == Experiment::tracking);
    CHECK(c.m == 17);
    const ExperimentConfig back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
  }

  TEST_CASE("shipped configs load") {
    for (const auto& e : std::filesystem::directory_iterator(LASMC_CONFIG_DIR)) {
      CAPTURE(e.path().string());
      CHECK_NOTHROW(load_config(e.path().string()));
    }
  }

  TEST_CASE("lag plans drop totals below the strategy lead") {
    StrategyConfig s;
    s.kind = Strategy::exact;
    s.delta = 3;
    const LagPlan p = make_lag_plan(s, {0, 2, 3, 5, 5, 7});
    CHECK(p.lead == 3);
    CHECK(p.totals == std::vector<int>{3, 5, 7});
    CHECK(p.lags == std::vector<int>{0, 2, 4});
    CHECK_THROWS_AS(make_lag_plan(s, {0, 1}), ConfigError);
  }

  TEST_CASE("seeds separate data and filter streams") {
    CHECK(data_seed(1, 0) != filter_seed(1, 0));
    CHECK(data_seed(1, 0) != data_seed(1, 1));
    CHECK(data_seed(1, 3) == data_seed(1, 3));
  }

  TEST_CASE("experiment tables do not depend on the thread count") {
    ExperimentConfig c = small_nonlinear();
    const std::string one = to_csv(run_experiment(c));
    c.threads = 3;
    CHECK(to_csv(run_experiment(c)) == one);
    ExperimentConfig q = default_config(Experiment::qam);
    q.m = 20;
    q.reps = 3;
    q.T = 30;
    q.lookaheads = {0, 2};
    const std::string qa = to_csv(run_experiment(q));
    q.threads = 2;
    CHECK(to_csv(run_experiment(q)) == qa);
  }

  TEST_CASE("reference caches round-trip exactly and check coverage") {
    ExperimentConfig c = small_nonlinear();
    c.reference.m = 200;
    const ReferenceCache ref = build_reference(c);
    const auto path = scratch("ref.json");
    save_reference(ref, path.string());
    const ReferenceCache back = load_reference(path.string());
    CHECK(back.values == ref.values);
    CHECK(back.data_seeds == ref.data_seeds);
    CHECK(back.totals == ref.totals);
    CHECK_NOTHROW(back.check_covers(c));
    ExperimentConfig more = c;
    more.reps = c.reps + 1;
    CHECK_THROWS_AS(back.check_covers(more), ConfigError);
    ExperimentConfig other = c;
    other.seed = 99;
    CHECK_THROWS_AS(back.check_covers(other), ConfigError);
    ExperimentConfig longer = c;
    longer.lookaheads = {1, 9};
    CHECK_THROWS_AS(back.check_covers(longer), ConfigError);
    const ResultTable tab = run_experiment(c, &back);
    CHECK(tab.column("rmse2@1") >= 0);
    CHECK_THROWS_AS(load_reference(scratch("missing.json").string()), ConfigError);
  }

  TEST_CASE("command line exit codes") {
    const CliRun self = cli({"selftest"});
    CHECK(self.code == kExitOk);
    CHECK(self.out.find("FAIL") == std::string::npos);
    CHECK(self.out.find("PASS") != std::string::npos);

    CHECK(cli({"run", "--config", scratch("nope.json").string()}).code == kExitConfig);
    const auto bad = scratch("bad.json");
    write_file(bad, "{\"experiment\": \"nonlinear\", \"m\": -4}");
    const CliRun r = cli({"run", "--config", bad.string()});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("config error") != std::string::npos);
    write_file(bad, "{not json");
    CHECK(cli({"run", "--config", bad.string()}).code == kExitConfig);
    CHECK(cli({"run", "--bogus-flag"}).code == kExitConfig);

    const auto unstable = scratch("unstable.json");
    write_file(unstable,
               "{\"experiment\": \"qam\", \"m\": 10, \"reps\": 1, \"T\": 20, \"lookaheads\": [0],"
               " \"qam\": {\"phi\": [-1.5], \"theta\": [1.0, 0.5]}}");
    const CliRun u = cli({"run", "--config", unstable.string()});
    CHECK(u.code == kExitNumerical);
    CHECK(u.err.find("numerical failure") != std::string::npos);

    const auto out = scratch("run.csv");
    const CliRun ok = cli({"run", "--experiment", "nonlinear", "--m", "30", "--reps", "2", "--T", "10",
                           "--lookaheads", "0", "--lookaheads", "1", "--out", out.string()});
    CHECK(ok.code == kExitOk);
    std::ifstream f(out, std::ios::binary);
    const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const auto rec = parse_csv(text);
    REQUIRE(rec.size() >= 5);
    CHECK(rec[1][0] == "rep");
  }
}
