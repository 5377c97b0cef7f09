#pragma once

#include <functional>
#include <span>
#include <vector>

#include "stheat/mother_tree.hpp"

namespace stheat::trees {

// Finite parent-closed subset of a mother tree, stored in key order
// (which is level order).
struct Tree {
  MotherTree* mother = nullptr;
  std::vector<int> nodes;

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }
};

struct TreeVector {
  Tree tree;
  std::vector<double> values;
};

Tree roots_tree(MotherTree& mother);

// Sort ids by key and drop duplicates.
void normalize(MotherTree& mother, std::vector<int>& nodes);

// Level-ordered traversal; for sorted trees this is the node list itself.
std::vector<int> bfs(const Tree& tree);

// Whether `nodes` is closed under parents (levels >= base_level).
bool is_tree(MotherTree& mother, std::span<const int> nodes, int base_level = 0);

// Smallest superset closed under parents.
std::vector<int> close_under_parents(MotherTree& mother, std::span<const int> nodes);

// Adds every mother node whose parents are in the tree and that satisfies
// `predicate`; throws when a node deeper than max_level would be added.
void deep_refine(Tree& tree, const std::function<bool(int)>& predicate,
                 int max_level = 30);

// Merge of two key-sorted id lists.
std::vector<int> merge_sorted(const MotherTree& mother, std::span<const int> a,
                              std::span<const int> b);

// dst := dst U src, values combined by `combine(dst_value, src_value)` on
// shared nodes and copied otherwise.
void union_into(TreeVector& dst, const TreeVector& src,
                const std::function<double(double, double)>& combine);

}  // namespace stheat::trees
