#include "lasmc/model.hpp"

namespace lasmc {

SpecCarry carry_for_path(const ModelSpec& model, std::span<const StateVec> path) {
  SpecCarry c = model.initial_carry();
  for (std::size_t s = 0; s < path.size(); ++s) c = model.advance(c, path[s], static_cast<int>(s)).carry;
  return c;
}

double log_target_increment(const ModelSpec& model, std::span<const StateVec> path, int t) {
  if (t < 0 || static_cast<int>(path.size()) != t + 1) throw PreconditionError("path must have length t+1");
  const SpecCarry c = carry_for_path(model, path.first(t));
  return model.advance(c, path[t], t).log_target();
}

double incremental_weight(const ModelSpec& model, std::span<const StateVec> path, int t) {
  if (t < 0 || static_cast<int>(path.size()) != t + 1) throw PreconditionError("path must have length t+1");
  const SpecCarry c = carry_for_path(model, path.first(t));
  const double lq = model.log_trial(c, path[t], t);
  if (!(lq > kNegInf)) throw NumericalError("improper trial: q_t is zero at the sampled state");
  return model.advance(c, path[t], t).log_target() - lq;
}

}  // namespace lasmc
