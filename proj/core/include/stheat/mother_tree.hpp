#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "stheat/time_bases.hpp"

namespace stheat::trees {

// Lazily grown index tree with dense integer node ids. Nodes are ordered by
// a level-major sort key; per-node scratch integers support O(1) membership
// tests and must be restored to -1 by whoever sets them.
class MotherTree {
 public:
  virtual ~MotherTree() = default;
  MotherTree() = default;
  MotherTree(const MotherTree&) = delete;
  MotherTree& operator=(const MotherTree&) = delete;

  int size() const { return static_cast<int>(level_.size()); }
  int level(int id) const { return level_[id]; }
  std::uint64_t key(int id) const { return key_[id]; }
  std::span<const int> parents(int id) const {
    return {parents_[id].data(), static_cast<std::size_t>(num_parents_[id])};
  }
  std::span<const int> roots() const { return roots_; }

  std::span<const int> children(int id);
  std::span<const int> existing_children(int id) const;
  bool children_created(int id) const { return child_count_[id] >= 0; }

  int& scratch(int id) { return scratch_[id]; }
  int scratch(int id) const { return scratch_[id]; }

  // Exclusive use of the scratch array; nested acquisition is a logic error.
  class Lease {
   public:
    explicit Lease(MotherTree& tree) : tree_(tree) {
      if (tree_.busy_) throw std::logic_error("mother tree scratch already in use");
      tree_.busy_ = true;
    }
    ~Lease() { tree_.busy_ = false; }
    Lease(const Lease&) = delete;
    Lease& operator=(const Lease&) = delete;

   private:
    MotherTree& tree_;
  };

 protected:
  int add_node(int level, std::uint64_t key, std::span<const int> parents);
  void add_root(int id) { roots_.push_back(id); }
  void set_children(int id, std::span<const int> children);
  virtual void create_children(int id) = 0;

 private:
  std::vector<int> level_;
  std::vector<std::uint64_t> key_;
  std::vector<std::array<int, 2>> parents_;
  std::vector<std::int8_t> num_parents_;
  std::vector<int> child_begin_;
  std::vector<int> child_count_;
  std::vector<int> child_data_;
  std::vector<int> scratch_;
  std::vector<int> roots_;
  bool busy_ = false;
};

// Time index trees. Binary: the three-point / hierarchical-hat index set;
// Pair: the orthonormal index set, where siblings come in pairs.
enum class TimeShape { Binary, Pair, Unary };

class TimeMotherTree final : public MotherTree {
 public:
  explicit TimeMotherTree(TimeShape shape);

  TimeShape shape() const { return shape_; }
  wavelets::TimeIndex index(int id) const { return index_[id]; }
  // Node for a given index, materializing its ancestors (cost O(level)).
  int node(wavelets::TimeIndex index);

  static std::uint64_t make_key(wavelets::TimeIndex index) {
    return (static_cast<std::uint64_t>(index.level) << 48) |
           static_cast<std::uint64_t>(index.pos);
  }

 protected:
  void create_children(int id) override;

 private:
  int new_node(wavelets::TimeIndex index, std::span<const int> parents);

  TimeShape shape_;
  std::vector<wavelets::TimeIndex> index_;
};

wavelets::Family default_family(TimeShape shape);

}  // namespace stheat::trees
