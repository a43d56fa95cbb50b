#include "lasmc/bench/reference.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lasmc/bench/csv.hpp"
#include "lasmc/bench/experiments.hpp"
#include "lasmc/bench/lagged.hpp"

namespace lasmc::bench {

namespace {

constexpr const char* kMagic = "lasmc_reference";

// Model parameters that, together with the data seed, determine the data.
std::string model_key(const ExperimentConfig& cfg) {
  const nlohmann::json j = config_to_json(cfg);
  return j.at(to_string(cfg.experiment)).dump();
}

}  // namespace

int ReferenceCache::total_index(int L) const {
  for (std::size_t k = 0; k < totals.size(); ++k)
    if (totals[k] == L) return static_cast<int>(k);
  return -1;
}

double ReferenceCache::at(int rep, int l, int t) const {
  if (rep < 0 || rep >= reps() || l < 0 || l >= static_cast<int>(totals.size()) || t < 1 || t > T)
    throw PreconditionError("reference index outside the cache");
  return values[(static_cast<std::size_t>(rep) * totals.size() + static_cast<std::size_t>(l)) * T +
                static_cast<std::size_t>(t - 1)];
}

void ReferenceCache::check_covers(const ExperimentConfig& cfg) const {
  const std::string hint = "; regenerate it with `smc reference --config <file> --out <cache>`";
  if (experiment != cfg.experiment)
    throw ConfigError("reference cache is for the " + to_string(experiment) + " experiment" + hint);
  if (T != cfg.T) throw ConfigError("reference cache horizon " + std::to_string(T) + " differs from T" + hint);
  if (model != model_key(cfg)) throw ConfigError("reference cache was built for other model parameters" + hint);
  if (reps() < cfg.reps) throw ConfigError("reference cache covers only " + std::to_string(reps()) + " repetitions" + hint);
  for (int r = 0; r < cfg.reps; ++r)
    if (data_seeds[static_cast<std::size_t>(r)] != data_seed(cfg.seed, r))
      throw ConfigError("reference cache was built from another seed" + hint);
  const LagPlan plan = make_lag_plan(cfg.strategy, cfg.lookaheads);
  for (int L : plan.totals)
    if (total_index(L) < 0) throw ConfigError("reference cache lacks lookahead " + std::to_string(L) + hint);
}

ReferenceCache build_reference(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment == Experiment::qam) throw ConfigError("the qam experiment has no reference estimator");
  StrategyConfig sis;
  sis.kind = Strategy::sis;
  const ResampleConfig rcfg = default_config(cfg.experiment).resample;
  ReferenceCache ref;
  ref.experiment = cfg.experiment;
  ref.T = cfg.T;
  ref.m = cfg.reference.m;
  ref.model = model_key(cfg);
  ref.totals = make_lag_plan(sis, cfg.lookaheads).totals;
  for (int r = 0; r < cfg.reps; ++r) ref.data_seeds.push_back(data_seed(cfg.seed, r));
  const std::size_t per_rep = ref.totals.size() * static_cast<std::size_t>(cfg.T);
  ref.values.assign(per_rep * static_cast<std::size_t>(cfg.reps), 0.0);
  set_thread_count(cfg.threads);
  parallel_for(cfg.reps, [&](int r) {
    const LaggedSeries s = cfg.experiment == Experiment::nonlinear ? nonlinear_series(cfg, r, sis, rcfg, ref.m)
                                                                   : tracking_series(cfg, r, sis, rcfg, ref.m);
    for (std::size_t l = 0; l < ref.totals.size(); ++l)
      for (int t = 1; t <= cfg.T; ++t)
        ref.values[static_cast<std::size_t>(r) * per_rep + l * static_cast<std::size_t>(cfg.T) +
                   static_cast<std::size_t>(t - 1)] = s.value[l][static_cast<std::size_t>(t)];
  });
  return ref;
}

void save_reference(const ReferenceCache& ref, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write reference cache '" + path + "'");
  std::string totals;
  for (std::size_t k = 0; k < ref.totals.size(); ++k) totals += (k ? " " : "") + std::to_string(ref.totals[k]);
  out << kMagic << ",1," << to_string(ref.experiment) << ',' << ref.T << ',' << ref.m << ',' << totals << ','
      << csv_escape(ref.model) << "\r\n";
  out << "rep,data_seed,lookahead,t,value\r\n";
  for (int r = 0; r < ref.reps(); ++r)
    for (std::size_t l = 0; l < ref.totals.size(); ++l)
      for (int t = 1; t <= ref.T; ++t)
        out << r << ',' << ref.data_seeds[static_cast<std::size_t>(r)] << ',' << ref.totals[l] << ',' << t << ','
            << format_double(ref.at(r, static_cast<int>(l), t)) << "\r\n";
  out.flush();
  if (!out) throw ConfigError("failed while writing reference cache '" + path + "'");
}

ReferenceCache load_reference(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("reference cache '" + path + "' not found; generate it with `smc reference --config <file> --out " +
                      path + "`");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto rec = parse_csv(ss.str());
  auto bad = [&](const std::string& why) { return ConfigError("reference cache '" + path + "' is malformed: " + why); };
  if (rec.size() < 2 || rec[0].size() != 7 || rec[0][0] != kMagic || rec[0][1] != "1") throw bad("bad header");
  ReferenceCache ref;
  try {
    ref.experiment = parse_experiment(rec[0][2]);
    ref.T = std::stoi(rec[0][3]);
    ref.m = std::stoi(rec[0][4]);
    std::istringstream ts(rec[0][5]);
    for (int L; ts >> L;) ref.totals.push_back(L);
    ref.model = rec[0][6];
  } catch (const std::exception& e) {
    throw bad(e.what());
  }
  if (ref.T < 1 || ref.totals.empty()) throw bad("empty horizon or lookahead list");
  const std::size_t per_rep = ref.totals.size() * static_cast<std::size_t>(ref.T);
  const std::size_t n = rec.size() - 2;
  if (n % per_rep != 0) throw bad("row count is not a whole number of repetitions");
  ref.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rec[i + 2];
    if (row.size() != 5) throw bad("row " + std::to_string(i + 2) + " has " + std::to_string(row.size()) + " fields");
    const std::size_t r = i / per_rep, l = (i % per_rep) / static_cast<std::size_t>(ref.T);
    const int t = static_cast<int>(i % static_cast<std::size_t>(ref.T)) + 1;
    char* end = nullptr;
    const std::uint64_t seed = std::strtoull(row[1].c_str(), &end, 10);
    if (std::stoul(row[0]) != r || std::stoi(row[2]) != ref.totals[l] || std::stoi(row[3]) != t)
      throw bad("rows out of order at line " + std::to_string(i + 3));
    if (l == 0 && t == 1) ref.data_seeds.push_back(seed);
    else if (seed != ref.data_seeds.back()) throw bad("inconsistent data seed at line " + std::to_string(i + 3));
    ref.values[i] = std::strtod(row[4].c_str(), &end);
    if (end == row[4].c_str()) throw bad("unreadable value at line " + std::to_string(i + 3));
  }
  return ref;
}

}  // namespace lasmc::bench
