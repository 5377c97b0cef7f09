#include "stheat/tree.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "stheat/op_counter.hpp"

namespace stheat::trees {

Tree roots_tree(MotherTree& mother) {
  Tree t{&mother, {mother.roots().begin(), mother.roots().end()}};
  normalize(mother, t.nodes);
  return t;
}

void normalize(MotherTree& mother, std::vector<int>& nodes) {
  std::sort(nodes.begin(), nodes.end(),
            [&](int a, int b) { return mother.key(a) < mother.key(b); });
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
}

std::vector<int> bfs(const Tree& tree) {
  count_ops(tree.nodes.size());
  return tree.nodes;
}

bool is_tree(MotherTree& mother, std::span<const int> nodes, int base_level) {
  MotherTree::Lease lease(mother);
  for (int n : nodes) mother.scratch(n) = 1;
  bool ok = true;
  for (int n : nodes) {
    if (mother.level(n) <= base_level) continue;
    for (int p : mother.parents(n))
      if (mother.level(p) >= base_level && mother.scratch(p) != 1) ok = false;
  }
  for (int n : nodes) mother.scratch(n) = -1;
  return ok;
}

std::vector<int> close_under_parents(MotherTree& mother, std::span<const int> nodes) {
  MotherTree::Lease lease(mother);
  std::vector<int> result;
  std::vector<int> stack(nodes.begin(), nodes.end());
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    if (mother.scratch(n) == 1) continue;
    mother.scratch(n) = 1;
    result.push_back(n);
    for (int p : mother.parents(n)) stack.push_back(p);
  }
  for (int n : result) mother.scratch(n) = -1;
  normalize(mother, result);
  return result;
}

void deep_refine(Tree& tree, const std::function<bool(int)>& predicate, int max_level) {
  MotherTree& mother = *tree.mother;
  std::vector<int> added;
  {
    MotherTree::Lease lease(mother);
    for (int n : tree.nodes) mother.scratch(n) = 1;
    std::deque<int> queue(tree.nodes.begin(), tree.nodes.end());
    while (!queue.empty()) {
      const int n = queue.front();
      queue.pop_front();
      for (int c : mother.children(n)) {
        if (mother.scratch(c) == 1) continue;
        bool parents_in = true;
        for (int p : mother.parents(c)) parents_in = parents_in && mother.scratch(p) == 1;
        if (!parents_in || !predicate(c)) continue;
        if (mother.level(c) > max_level) {
          for (int m : tree.nodes) mother.scratch(m) = -1;
          for (int m : added) mother.scratch(m) = -1;
          throw std::length_error("deep_refine exceeded the level cap");
        }
        mother.scratch(c) = 1;
        added.push_back(c);
        queue.push_back(c);
      }
    }
    for (int m : tree.nodes) mother.scratch(m) = -1;
    for (int m : added) mother.scratch(m) = -1;
  }
  tree.nodes.insert(tree.nodes.end(), added.begin(), added.end());
  normalize(mother, tree.nodes);
}

std::vector<int> merge_sorted(const MotherTree& mother, std::span<const int> a,
                              std::span<const int> b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && mother.key(a[i]) < mother.key(b[j]))) {
      out.push_back(a[i++]);
    } else if (i == a.size() || mother.key(b[j]) < mother.key(a[i])) {
      out.push_back(b[j++]);
    } else {
      out.push_back(a[i]);
      ++i;
      ++j;
    }
  }
  count_ops(a.size() + b.size());
  return out;
}

void union_into(TreeVector& dst, const TreeVector& src,
                const std::function<double(double, double)>& combine) {
  if (dst.tree.mother != src.tree.mother)
    throw std::invalid_argument("union of trees over different mother trees");
  const MotherTree& mother = *dst.tree.mother;
  const auto& a = dst.tree.nodes;
  const auto& b = src.tree.nodes;
  std::vector<int> nodes;
  std::vector<double> values;
  nodes.reserve(a.size() + b.size());
  values.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && mother.key(a[i]) < mother.key(b[j]))) {
      nodes.push_back(a[i]);
      values.push_back(dst.values[i++]);
    } else if (i == a.size() || mother.key(b[j]) < mother.key(a[i])) {
      nodes.push_back(b[j]);
      values.push_back(src.values[j++]);
    } else {
      nodes.push_back(a[i]);
      values.push_back(combine(dst.values[i++], src.values[j++]));
    }
  }
  count_ops(a.size() + b.size());
  dst.tree.nodes = std::move(nodes);
  dst.values = std::move(values);
}

}  // namespace stheat::trees
