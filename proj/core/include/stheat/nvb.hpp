#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "stheat/mother_tree.hpp"

namespace stheat::space {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Triangle of the (lazily grown) bisection tree. Vertex 2 is the newest
// vertex; the refinement edge is v[0]-v[1]; edge i is opposite v[i].
struct MotherElement {
  std::array<int, 3> v{};
  int gen = 0;
  int parent = -1;
  std::array<int, 2> children{-1, -1};
  // Neighbour of the same generation across each edge; -1 on the boundary,
  // kUnresolved until first asked for.
  std::array<int, 3> neighbor{};
  int midpoint = -1;
  double area = 0.0;

  bool bisected() const { return children[0] >= 0; }
};

inline constexpr int kUnresolved = -2;

// Vertex mother tree for newest vertex bisection. Nodes are vertices; the
// parents of a vertex are the newest vertices of the triangles whose
// refinement edge it bisects. Triangles are created on demand.
class VertexMotherTree final : public trees::MotherTree {
 public:
  // `triangles` list vertex indices with the newest vertex last. The
  // assignment must satisfy the matching condition.
  VertexMotherTree(std::vector<Point> points, std::span<const std::array<int, 3>> triangles);

  static VertexMotherTree unit_square();      // 4 triangles around the centre
  static VertexMotherTree unit_square_two();  // 2 triangles, diagonal (0,0)-(1,1)
  static VertexMotherTree l_shape();          // [-1,1]^2 \ [-1,0]^2, 12 triangles

  Point point(int v) const { return points_[v]; }
  int gen(int v) const { return level(v); }
  bool on_boundary(int v) const { return boundary_[v] != 0; }
  // Endpoints of the edge bisected by v; empty for generation 0.
  std::span<const int> godparents(int v) const {
    return {godparents_[v].data(), gen(v) > 0 ? std::size_t{2} : std::size_t{0}};
  }
  // Integral of the hierarchical hat at v: a third of the area of its
  // support in the uniform partition of generation gen(v).
  double hat_integral(int v) const { return hat_integral_[v]; }

  int num_elements() const { return static_cast<int>(elements_.size()); }
  const MotherElement& element(int e) const { return elements_[e]; }
  std::span<const int> initial_elements() const { return initial_; }

  void bisect(int e);
  int neighbor(int e, int edge);

  static std::uint64_t make_key(int gen, int id) {
    return (static_cast<std::uint64_t>(gen) << 40) | static_cast<std::uint64_t>(id);
  }

 protected:
  void create_children(int v) override;

 private:
  int new_vertex(Point p, int gen, std::span<const int> parents, bool boundary,
                 std::array<int, 2> godparents, double hat_integral);
  int new_element(std::array<int, 3> v, int gen, int parent);
  int child_containing(int e, int a, int b) const;

  std::vector<Point> points_;
  std::vector<std::uint8_t> boundary_;
  std::vector<std::array<int, 2>> godparents_;
  std::vector<double> hat_integral_;
  std::vector<std::vector<int>> patch_;  // elements with newest vertex v and gen(v)
  std::vector<MotherElement> elements_;
  std::vector<int> initial_;
};

// Conforming triangulation given by a vertex tree, with local indices in
// tree order (generation, then creation). `history` holds every triangle
// visited while descending to the leaves, which the multigrid hierarchy uses.
struct Triangulation {
  VertexMotherTree* mother = nullptr;
  std::vector<int> vertices;
  std::vector<std::array<int, 3>> elements;  // local indices, newest last
  std::vector<int> element_ids;
  std::vector<int> history;
  std::vector<std::uint8_t> history_leaf;
  std::vector<std::array<int, 2>> godparents;  // local, {-1,-1} at gen 0
  std::vector<std::array<int, 2>> parents;     // local, -1 where absent
  std::vector<int> gen;
  std::vector<std::uint8_t> boundary;

  std::size_t num_vertices() const { return vertices.size(); }
  int max_gen() const { return gen.empty() ? 0 : gen.back(); }
};

// `vertices` must be a key-sorted vertex tree containing all roots.
Triangulation triangulate(VertexMotherTree& mother, std::span<const int> vertices);

// Smallest parent-closed superset of `vertices` together with the roots,
// sorted by key.
std::vector<int> nvb_closure(VertexMotherTree& mother, std::span<const int> vertices);

// Every vertex of generation <= g (the uniform mesh of generation g).
std::vector<int> uniform_vertices(VertexMotherTree& mother, int g);

// Text dump: "v x y gen" per vertex then "t i j k gen" per triangle.
void dump_mesh(const Triangulation& tri, std::ostream& out);

}  // namespace stheat::space
