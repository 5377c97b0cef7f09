#include "stheat/mother_tree.hpp"

#include <algorithm>

namespace stheat::trees {

std::span<const int> MotherTree::children(int id) {
  if (child_count_[id] < 0) create_children(id);
  return existing_children(id);
}

std::span<const int> MotherTree::existing_children(int id) const {
  if (child_count_[id] <= 0) return {};
  return {child_data_.data() + child_begin_[id],
          static_cast<std::size_t>(child_count_[id])};
}

int MotherTree::add_node(int level, std::uint64_t key, std::span<const int> parents) {
  if (parents.size() > 2) throw std::logic_error("at most two parents supported");
  const int id = size();
  level_.push_back(level);
  key_.push_back(key);
  std::array<int, 2> p{-1, -1};
  std::copy(parents.begin(), parents.end(), p.begin());
  parents_.push_back(p);
  num_parents_.push_back(static_cast<std::int8_t>(parents.size()));
  child_begin_.push_back(0);
  child_count_.push_back(-1);
  scratch_.push_back(-1);
  return id;
}

void MotherTree::set_children(int id, std::span<const int> children) {
  std::vector<int> sorted(children.begin(), children.end());
  std::sort(sorted.begin(), sorted.end(),
            [this](int a, int b) { return key_[a] < key_[b]; });
  child_begin_[id] = static_cast<int>(child_data_.size());
  child_count_[id] = static_cast<int>(sorted.size());
  child_data_.insert(child_data_.end(), sorted.begin(), sorted.end());
}

wavelets::Family default_family(TimeShape shape) {
  return shape == TimeShape::Pair ? wavelets::Family::Orthonormal
                                  : wavelets::Family::ThreePoint;
}

TimeMotherTree::TimeMotherTree(TimeShape shape) : shape_(shape) {
  add_root(new_node({0, 0}, {}));
  if (shape_ != TimeShape::Unary) add_root(new_node({0, 1}, {}));
}

int TimeMotherTree::new_node(wavelets::TimeIndex index, std::span<const int> parents) {
  index_.push_back(index);
  return add_node(index.level, make_key(index), parents);
}

void TimeMotherTree::create_children(int id) {
  const wavelets::TimeIndex idx = index_[id];
  if (shape_ == TimeShape::Unary) {
    const int parent[1] = {id};
    const int c = new_node({idx.level + 1, 0}, parent);
    const int kids[1] = {c};
    set_children(id, kids);
    return;
  }
  if (idx.level == 0) {
    const std::span<const int> r = roots();
    const int both[2] = {r[0], r[1]};
    std::vector<int> kids;
    kids.push_back(new_node({1, 0}, both));
    if (shape_ == TimeShape::Pair) kids.push_back(new_node({1, 1}, both));
    set_children(r[0], kids);
    set_children(r[1], kids);
    return;
  }
  if (shape_ == TimeShape::Binary) {
    const int parent[1] = {id};
    const int kids[2] = {new_node({idx.level + 1, 2 * idx.pos}, parent),
                         new_node({idx.level + 1, 2 * idx.pos + 1}, parent)};
    set_children(id, kids);
    return;
  }
  // Pair shape: both members of the sibling pair share four children.
  const int mate = idx.pos % 2 == 0 ? id + 1 : id - 1;
  const int pair[2] = {std::min(id, mate), std::max(id, mate)};
  const std::int64_t k = idx.pos / 2;
  int kids[4];
  for (int j = 0; j < 4; ++j) kids[j] = new_node({idx.level + 1, 4 * k + j}, pair);
  set_children(pair[0], kids);
  set_children(pair[1], kids);
}

int TimeMotherTree::node(wavelets::TimeIndex index) {
  if (index.level == 0) {
    if (index.pos < 0 || index.pos >= static_cast<std::int64_t>(roots().size()))
      throw std::out_of_range("invalid root index");
    return roots()[static_cast<std::size_t>(index.pos)];
  }
  wavelets::TimeIndex parent_index{index.level - 1, 0};
  if (shape_ == TimeShape::Binary && index.level >= 2) parent_index.pos = index.pos / 2;
  if (shape_ == TimeShape::Pair && index.level >= 2) parent_index.pos = 2 * (index.pos / 4);
  if (shape_ == TimeShape::Unary && index.pos != 0) throw std::out_of_range("invalid index");
  const int parent = node(parent_index);
  for (int c : children(parent))
    if (index_[c] == index) return c;
  throw std::out_of_range("time index not in mother tree");
}

}  // namespace stheat::trees
