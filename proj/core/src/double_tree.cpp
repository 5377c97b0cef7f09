#include "stheat/double_tree.hpp"

#include <algorithm>
#include <stdexcept>

#include "stheat/op_counter.hpp"

namespace stheat::dtree {

namespace {

struct PairLess {
  const trees::MotherTree* m0;
  const trees::MotherTree* m1;
  bool operator()(const NodePair& a, const NodePair& b) const {
    const auto ka = m0->key(a.n0), kb = m0->key(b.n0);
    if (ka != kb) return ka < kb;
    return m1->key(a.n1) < m1->key(b.n1);
  }
};

void sort_unique(trees::MotherTree& m0, trees::MotherTree& m1, std::vector<NodePair>& pairs) {
  std::sort(pairs.begin(), pairs.end(), PairLess{&m0, &m1});
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
}

}  // namespace

DoubleTree::DoubleTree(trees::MotherTree& m0, trees::MotherTree& m1, std::vector<NodePair> pairs)
    : m0_(&m0), m1_(&m1), nodes_(std::move(pairs)) {
  build_indices();
}

DoubleTree DoubleTree::from_pairs(trees::MotherTree& m0, trees::MotherTree& m1,
                                  std::vector<NodePair> pairs) {
  sort_unique(m0, m1, pairs);
  return DoubleTree(m0, m1, std::move(pairs));
}

DoubleTree DoubleTree::root_pairs(trees::MotherTree& m0, trees::MotherTree& m1) {
  std::vector<NodePair> pairs;
  for (int a : m0.roots())
    for (int b : m1.roots()) pairs.push_back({a, b});
  return from_pairs(m0, m1, std::move(pairs));
}

void DoubleTree::build_indices() {
  const std::size_t n = nodes_.size();
  ids1_.resize(n);
  proj0_.clear();
  fiber1_begin_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    ids1_[i] = nodes_[i].n1;
    if (i == 0 || nodes_[i].n0 != nodes_[i - 1].n0) {
      if (i > 0 && m0_->key(nodes_[i].n0) <= m0_->key(nodes_[i - 1].n0))
        throw std::invalid_argument("double-tree pairs not sorted");
      proj0_.push_back(nodes_[i].n0);
      fiber1_begin_.push_back(i);
    } else if (m1_->key(nodes_[i].n1) <= m1_->key(nodes_[i - 1].n1)) {
      throw std::invalid_argument("double-tree pairs not sorted");
    }
  }
  fiber1_begin_.push_back(n);

  // P_1 sorted by key: in a double-tree every axis-0 fiber contains a root of
  // mother 0, so P_1 is the union of the fibers at level-0 nodes. Fall back
  // to sorting for inputs that are not double-trees.
  proj1_.clear();
  for (std::size_t k = 0; k < proj0_.size() && m0_->level(proj0_[k]) == 0; ++k)
    proj1_ = trees::merge_sorted(*m1_, proj1_, fiber1_ids(k));
  trees::MotherTree::Lease lease(*m1_);
  for (std::size_t k = 0; k < proj1_.size(); ++k) m1_->scratch(proj1_[k]) = static_cast<int>(k);
  bool complete = true;
  for (int id : ids1_) complete = complete && m1_->scratch(id) >= 0;
  if (!complete) {
    for (int id : proj1_) m1_->scratch(id) = -1;
    proj1_ = ids1_;
    trees::normalize(*m1_, proj1_);
    for (std::size_t k = 0; k < proj1_.size(); ++k) m1_->scratch(proj1_[k]) = static_cast<int>(k);
  }
  fiber0_begin_.assign(proj1_.size() + 1, 0);
  for (int id : ids1_) ++fiber0_begin_[static_cast<std::size_t>(m1_->scratch(id)) + 1];
  for (std::size_t k = 0; k < proj1_.size(); ++k) fiber0_begin_[k + 1] += fiber0_begin_[k];
  fiber0_slots_.resize(n);
  std::vector<std::size_t> fill(fiber0_begin_.begin(), fiber0_begin_.end() - 1);
  for (std::size_t i = 0; i < n; ++i)
    fiber0_slots_[fill[static_cast<std::size_t>(m1_->scratch(ids1_[i]))]++] = static_cast<int>(i);
  for (int id : proj1_) m1_->scratch(id) = -1;
  count_ops(2 * n + proj1_.size());
}

std::ptrdiff_t DoubleTree::find(int n0, int n1) const {
  const auto k0 = m0_->key(n0);
  auto it = std::lower_bound(proj0_.begin(), proj0_.end(), k0,
                             [&](int id, std::uint64_t k) { return m0_->key(id) < k; });
  if (it == proj0_.end() || *it != n0) return -1;
  const std::size_t k = static_cast<std::size_t>(it - proj0_.begin());
  const auto ids = fiber1_ids(k);
  const auto k1 = m1_->key(n1);
  auto jt = std::lower_bound(ids.begin(), ids.end(), k1,
                             [&](int id, std::uint64_t key) { return m1_->key(id) < key; });
  if (jt == ids.end() || *jt != n1) return -1;
  return static_cast<std::ptrdiff_t>(fiber1_begin_[k] + static_cast<std::size_t>(jt - ids.begin()));
}

trees::Tree DoubleTree::project(int axis) const {
  if (axis == 0) return {m0_, proj0_};
  return {m1_, proj1_};
}

trees::Tree DoubleTree::fiber(int axis, int other) const {
  if (axis == 1) {
    const auto& proj = proj0_;
    for (std::size_t k = 0; k < proj.size(); ++k)
      if (proj[k] == other) {
        const auto ids = fiber1_ids(k);
        return {m1_, std::vector<int>(ids.begin(), ids.end())};
      }
    return {m1_, {}};
  }
  for (std::size_t k = 0; k < proj1_.size(); ++k)
    if (proj1_[k] == other) {
      trees::Tree t{m0_, {}};
      for (int s : fiber0_slots(k)) t.nodes.push_back(nodes_[static_cast<std::size_t>(s)].n0);
      return t;
    }
  return {m0_, {}};
}

bool DoubleTree::is_double_tree() const {
  for (const auto& p : nodes_) {
    for (int q : m0_->parents(p.n0))
      if (!contains(q, p.n1)) return false;
    for (int q : m1_->parents(p.n1))
      if (!contains(p.n0, q)) return false;
  }
  return true;
}

DoubleTree close_double_tree(trees::MotherTree& m0, trees::MotherTree& m1,
                             std::vector<NodePair> pairs) {
  // Parents lower the level sum, so sweep buckets of decreasing level sum.
  int top = 0;
  for (const auto& p : pairs) top = std::max(top, m0.level(p.n0) + m1.level(p.n1));
  std::vector<std::vector<NodePair>> buckets(static_cast<std::size_t>(top) + 1);
  for (const auto& p : pairs)
    buckets[static_cast<std::size_t>(m0.level(p.n0) + m1.level(p.n1))].push_back(p);
  std::vector<NodePair> out;
  for (int s = top; s >= 0; --s) {
    auto& b = buckets[static_cast<std::size_t>(s)];
    sort_unique(m0, m1, b);
    for (const auto& p : b) {
      for (int q : m0.parents(p.n0))
        buckets[static_cast<std::size_t>(m0.level(q) + m1.level(p.n1))].push_back({q, p.n1});
      for (int q : m1.parents(p.n1))
        buckets[static_cast<std::size_t>(m0.level(p.n0) + m1.level(q))].push_back({p.n0, q});
    }
    out.insert(out.end(), b.begin(), b.end());
  }
  return DoubleTree::from_pairs(m0, m1, std::move(out));
}

DoubleTree union_of(const DoubleTree& a, const DoubleTree& b) {
  if (&a.mother(0) != &b.mother(0) || &a.mother(1) != &b.mother(1))
    throw std::invalid_argument("double-trees over different mother trees");
  std::vector<NodePair> out;
  out.reserve(a.size() + b.size());
  std::merge(a.nodes().begin(), a.nodes().end(), b.nodes().begin(), b.nodes().end(),
             std::back_inserter(out), PairLess{&a.mother(0), &a.mother(1)});
  out.erase(std::unique(out.begin(), out.end()), out.end());
  count_ops(a.size() + b.size());
  return DoubleTree(a.mother(0), a.mother(1), std::move(out));
}

DoubleTree refine_from_marked(const DoubleTree& base, const DoubleTree& super,
                              std::span<const std::size_t> marked) {
  std::vector<std::uint8_t> taken(super.size(), 0);
  for (const auto& p : base.nodes()) {
    const auto s = super.find(p.n0, p.n1);
    if (s < 0) throw std::invalid_argument("base is not contained in the enlarged double-tree");
    taken[static_cast<std::size_t>(s)] = 1;
  }
  std::vector<std::size_t> stack;
  for (std::size_t j : marked) {
    if (j >= super.size()) throw std::invalid_argument("marked slot outside the double-tree");
    if (taken[j]) continue;
    taken[j] = 1;
    stack.push_back(j);
    while (!stack.empty()) {
      const NodePair p = super.node(stack.back());
      stack.pop_back();
      count_ops();
      auto visit = [&](int n0, int n1) {
        const auto s = super.find(n0, n1);
        if (s < 0) throw std::logic_error("enlarged set is not a double-tree");
        if (!taken[static_cast<std::size_t>(s)]) {
          taken[static_cast<std::size_t>(s)] = 1;
          stack.push_back(static_cast<std::size_t>(s));
        }
      };
      for (int q : super.mother(0).parents(p.n0)) visit(q, p.n1);
      for (int q : super.mother(1).parents(p.n1)) visit(p.n0, q);
    }
  }
  std::vector<NodePair> out;
  for (std::size_t i = 0; i < super.size(); ++i)
    if (taken[i]) out.push_back(super.node(i));
  return DoubleTree(super.mother(0), super.mother(1), std::move(out));
}

int gradedness(const DoubleTree& tree, wavelets::Family time_family) {
  auto& m0 = dynamic_cast<trees::TimeMotherTree&>(tree.mother(0));
  auto& m1 = tree.mother(1);
  int graded = 0;
  for (const auto& p : tree.nodes()) {
    const auto idx = m0.index(p.n0);
    if (idx.level == 0) continue;
    std::vector<int> coarser;
    const auto sup = wavelets::wavelet_support(time_family, idx);
    for (std::int64_t q = 0; q < wavelets::num_wavelets(time_family, idx.level - 1); ++q)
      if (wavelets::wavelet_support(time_family, {idx.level - 1, q}).overlaps(sup))
        coarser.push_back(m0.node({idx.level - 1, q}));
    for (int c : coarser)
      if (!tree.contains(c, p.n1)) graded = std::max(graded, 1);
    // Ancestors of p.n1 by generation distance.
    std::vector<int> layer{p.n1};
    for (int d = 1; !layer.empty(); ++d) {
      std::vector<int> next;
      for (int v : layer)
        for (int q : m1.parents(v)) next.push_back(q);
      trees::normalize(m1, next);
      for (int anc : next)
        for (int c : coarser)
          if (!tree.contains(c, anc)) graded = std::max(graded, d + 1);
      layer = std::move(next);
    }
  }
  return graded;
}

}  // namespace stheat::dtree
