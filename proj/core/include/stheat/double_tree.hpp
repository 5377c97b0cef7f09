#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stheat/mother_tree.hpp"
#include "stheat/tree.hpp"

namespace stheat::dtree {

struct NodePair {
  int n0 = -1;
  int n1 = -1;
  friend bool operator==(const NodePair&, const NodePair&) = default;
};

// Finite subset of mother0 x mother1 stored as a persistent array of pairs
// sorted by (key0, key1). Slot i of any overlay vector belongs to nodes()[i].
// Axis-1 fibers are contiguous slot ranges; axis-0 fibers are slot lists
// sorted by key0.
class DoubleTree {
 public:
  DoubleTree() = default;
  // `pairs` must be sorted by (key0, key1) without duplicates.
  DoubleTree(trees::MotherTree& m0, trees::MotherTree& m1, std::vector<NodePair> pairs);

  static DoubleTree from_pairs(trees::MotherTree& m0, trees::MotherTree& m1,
                               std::vector<NodePair> pairs);
  static DoubleTree root_pairs(trees::MotherTree& m0, trees::MotherTree& m1);

  trees::MotherTree& mother(int axis) const { return axis == 0 ? *m0_ : *m1_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::span<const NodePair> nodes() const { return nodes_; }
  const NodePair& node(std::size_t slot) const { return nodes_[slot]; }

  // P_0 in key order; fiber k along axis 1 is slots [fiber1_begin(k), fiber1_end(k)).
  std::span<const int> projection0() const { return proj0_; }
  std::size_t fiber1_begin(std::size_t k) const { return fiber1_begin_[k]; }
  std::size_t fiber1_end(std::size_t k) const { return fiber1_begin_[k + 1]; }
  // axis-1 ids of fiber k, sorted by key1.
  std::span<const int> fiber1_ids(std::size_t k) const {
    return {ids1_.data() + fiber1_begin_[k], fiber1_begin_[k + 1] - fiber1_begin_[k]};
  }

  // P_1 in key order; fiber k along axis 0 is a list of slots sorted by key0.
  std::span<const int> projection1() const { return proj1_; }
  std::span<const int> fiber0_slots(std::size_t k) const {
    return {fiber0_slots_.data() + fiber0_begin_[k], fiber0_begin_[k + 1] - fiber0_begin_[k]};
  }

  // Slot of (n0, n1) or -1 (binary searches).
  std::ptrdiff_t find(int n0, int n1) const;
  bool contains(int n0, int n1) const { return find(n0, n1) >= 0; }

  trees::Tree project(int axis) const;
  // Fiber along `axis` at the other coordinate `other`; empty if absent.
  trees::Tree fiber(int axis, int other) const;

  // Every fiber in both axes is parent-closed.
  bool is_double_tree() const;

 private:
  void build_indices();

  trees::MotherTree* m0_ = nullptr;
  trees::MotherTree* m1_ = nullptr;
  std::vector<NodePair> nodes_;
  std::vector<int> ids1_;
  std::vector<int> proj0_;
  std::vector<std::size_t> fiber1_begin_;
  std::vector<int> proj1_;
  std::vector<std::size_t> fiber0_begin_;
  std::vector<int> fiber0_slots_;
};

// Smallest double-tree containing `pairs`.
DoubleTree close_double_tree(trees::MotherTree& m0, trees::MotherTree& m1,
                             std::vector<NodePair> pairs);

DoubleTree union_of(const DoubleTree& a, const DoubleTree& b);

// Smallest double-tree containing `base` and the slots `marked` of `super`
// (a superset of `base`). Walks upwards from each marked node and stops at
// nodes already taken, so every node of `super` is visited at most twice.
DoubleTree refine_from_marked(const DoubleTree& base, const DoubleTree& super,
                              std::span<const std::size_t> marked);

// Gradedness with respect to a three-point time axis.
int gradedness(const DoubleTree& tree, wavelets::Family time_family);

}  // namespace stheat::dtree
