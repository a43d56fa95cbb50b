#pragma once

#include <deque>
#include <span>
#include <string>
#include <vector>

#include "lasmc/errors.hpp"
#include "lasmc/model.hpp"

namespace lasmc {

enum class Track { concurrent, auxiliary, resampling };

inline const char* to_string(Track k) {
  switch (k) {
    case Track::concurrent: return "logw";
    case Track::auxiliary: return "logw_aux";
    case Track::resampling: return "logw_res";
  }
  return "?";
}

template <class State, class Carry>
struct PathNode {
  State x;
  Carry carry;
  int parent = -1;  // index into the previous layer
};

// Weighted particle paths stored as a genealogy: one layer of nodes per time,
// each node pointing at its parent in the layer before. Particle j is entry j
// of the newest layer. retain_depth > 0 bounds the number of stored layers.
template <SequentialModel M>
class ParticleSystem {
 public:
  using State = typename M::State;
  using Carry = typename M::Carry;
  using Node = PathNode<State, Carry>;

  explicit ParticleSystem(int retain_depth = 0) : retain_(retain_depth) {}

  int size() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().size()); }
  bool empty() const { return layers_.empty(); }
  int time() const { return first_time_ + static_cast<int>(layers_.size()) - 1; }
  int oldest_time() const { return first_time_; }
  int retain_depth() const { return retain_; }

  const Node& frontier(int j) const { return layers_.back()[j]; }
  const std::vector<Node>& frontier_layer() const { return layers_.back(); }

  // Index of particle j's ancestor in the layer of time s.
  int ancestor_index(int j, int s) const {
    if (s > time() || s < first_time_)
      throw PreconditionError("time " + std::to_string(s) + " outside stored history [" +
                              std::to_string(first_time_) + ", " + std::to_string(time()) + "]");
    int idx = j;
    for (int u = time(); u > s; --u) idx = layer(u)[idx].parent;
    return idx;
  }
  const Node& node_at(int j, int s) const { return layer(s)[ancestor_index(j, s)]; }
  const State& state_at(int j, int s) const { return node_at(j, s).x; }

  // Nodes of particle j from time `from` to the frontier.
  std::vector<const Node*> lineage(int j, int from) const {
    std::vector<const Node*> out(static_cast<std::size_t>(time() - from + 1));
    int idx = j;
    for (int u = time(); u >= from; --u) {
      if (u < first_time_) throw PreconditionError("lineage exceeds stored history");
      const Node& n = layer(u)[idx];
      out[static_cast<std::size_t>(u - from)] = &n;
      idx = n.parent;
    }
    return out;
  }

  std::vector<State> path(int j) const {
    std::vector<State> out;
    for (const Node* n : lineage(j, first_time_)) out.push_back(n->x);
    return out;
  }

  bool has_track(Track k) const { return k == Track::concurrent || enabled(k); }
  std::span<const double> track(Track k) const {
    if (!has_track(k)) throw PreconditionError(std::string("weight track ") + to_string(k) + " is not maintained");
    return storage(k);
  }
  std::vector<double>& track_mut(Track k) {
    if (!has_track(k)) throw PreconditionError(std::string("weight track ") + to_string(k) + " is not maintained");
    return storage(k);
  }
  std::span<const double> logw() const { return logw_; }
  std::vector<double>& logw_mut() { return logw_; }

  void set_track(Track k, std::vector<double> v) {
    if (static_cast<int>(v.size()) != size()) throw PreconditionError("weight track length must equal m");
    storage(k) = std::move(v);
    if (k == Track::auxiliary) has_aux_ = true;
    if (k == Track::resampling) has_res_ = true;
  }
  void drop_track(Track k) {
    if (k == Track::auxiliary) { has_aux_ = false; logw_aux_.clear(); }
    if (k == Track::resampling) { has_res_ = false; logw_res_.clear(); }
  }

  // Replace everything with a single layer at time t0.
  void reset(std::vector<Node> layer0, std::vector<double> logw, int t0 = 0) {
    if (layer0.size() != logw.size() || layer0.empty()) throw PreconditionError("population size mismatch");
    layers_.clear();
    layers_.push_back(std::move(layer0));
    first_time_ = t0;
    logw_ = std::move(logw);
    drop_track(Track::auxiliary);
    drop_track(Track::resampling);
  }

  // New frontier; node parents index the current frontier.
  void push_layer(std::vector<Node> next) {
    layers_.push_back(std::move(next));
    if (retain_ > 0)
      while (static_cast<int>(layers_.size()) > retain_) {
        layers_.pop_front();
        ++first_time_;
      }
  }

  // Replace the frontier layer (same time), e.g. after resampling.
  void replace_frontier(std::vector<Node> nodes) { layers_.back() = std::move(nodes); }

  std::vector<Node>& frontier_layer_mut() { return layers_.back(); }

  // Add a node to the stored layer of time s < time(); returns its index.
  int append_node(int s, Node n) {
    if (s >= time()) throw PreconditionError("cannot append to the frontier layer");
    std::vector<Node>& l = layer_mut(s);
    l.push_back(std::move(n));
    return static_cast<int>(l.size()) - 1;
  }

 private:
  const std::vector<Node>& layer(int s) const { return layers_[static_cast<std::size_t>(s - first_time_)]; }
  std::vector<Node>& layer_mut(int s) {
    if (s < first_time_ || s > time()) throw PreconditionError("layer outside stored history");
    return layers_[static_cast<std::size_t>(s - first_time_)];
  }
  bool enabled(Track k) const { return k == Track::auxiliary ? has_aux_ : has_res_; }
  const std::vector<double>& storage(Track k) const {
    return k == Track::concurrent ? logw_ : (k == Track::auxiliary ? logw_aux_ : logw_res_);
  }
  std::vector<double>& storage(Track k) {
    return k == Track::concurrent ? logw_ : (k == Track::auxiliary ? logw_aux_ : logw_res_);
  }

  std::deque<std::vector<Node>> layers_;
  int first_time_ = 0;
  int retain_ = 0;
  std::vector<double> logw_, logw_aux_, logw_res_;
  bool has_aux_ = false, has_res_ = false;
};

}  // namespace lasmc
