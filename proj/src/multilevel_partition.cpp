#include "lasmc/lookahead/multilevel.hpp"

#include <algorithm>
#include <string>

namespace lasmc {

MultilevelPartition::MultilevelPartition(std::vector<std::vector<std::vector<int>>> levels, int alphabet_size)
    : levels_(std::move(levels)), n_(alphabet_size) {
  if (n_ < 1) throw PreconditionError("partition alphabet must be nonempty");
  if (levels_.size() < 2) throw PreconditionError("partition needs at least levels 0 and 1");
  std::vector<std::vector<int>> owner(levels_.size(), std::vector<int>(static_cast<std::size_t>(n_), -1));
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    for (std::size_t i = 0; i < levels_[l].size(); ++i) {
      auto& s = levels_[l][i];
      if (s.empty()) throw PreconditionError("partition level " + std::to_string(l) + " has an empty subset");
      std::sort(s.begin(), s.end());
      for (int a : s) {
        if (a < 0 || a >= n_) throw PreconditionError("partition member outside the alphabet");
        if (owner[l][a] >= 0) throw PreconditionError("partition level " + std::to_string(l) + " is not disjoint");
        owner[l][a] = static_cast<int>(i);
      }
    }
    for (int a = 0; a < n_; ++a)
      if (owner[l][a] < 0) throw PreconditionError("partition level " + std::to_string(l) + " does not cover the alphabet");
  }
  if (levels_[0].size() != 1) throw PreconditionError("partition level 0 must be the whole alphabet");
  for (const auto& s : levels_.back())
    if (s.size() != 1) throw PreconditionError("partition's last level must be singletons");
  children_.resize(levels_.size() - 1);
  for (std::size_t l = 0; l + 1 < levels_.size(); ++l) {
    children_[l].resize(levels_[l].size());
    for (std::size_t c = 0; c < levels_[l + 1].size(); ++c) {
      const auto& s = levels_[l + 1][c];
      const int parent = owner[l][s.front()];
      for (int a : s)
        if (owner[l][a] != parent)
          throw PreconditionError("partition subset at level " + std::to_string(l + 1) + " straddles two parents");
      children_[l][parent].push_back(static_cast<int>(c));
    }
  }
  leaf_ = owner.back();
}

MultilevelPartition MultilevelPartition::flat(int alphabet_size) {
  std::vector<int> all(static_cast<std::size_t>(alphabet_size));
  std::vector<std::vector<int>> singles;
  for (int a = 0; a < alphabet_size; ++a) {
    all[a] = a;
    singles.push_back({a});
  }
  return MultilevelPartition({{all}, singles}, alphabet_size);
}

}  // namespace lasmc
