#include "stheat/nvb.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include "stheat/op_counter.hpp"
#include "stheat/tree.hpp"

namespace stheat::space {

namespace {

double triangle_area(Point a, Point b, Point c) {
  return 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::pair<int, int> edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

VertexMotherTree::VertexMotherTree(std::vector<Point> points,
                                   std::span<const std::array<int, 3>> triangles) {
  const int n = static_cast<int>(points.size());
  // Edge incidence for neighbours and the boundary.
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edges;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) {
    const auto& tr = triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      for (int v : tr)
        if (v < 0 || v >= n) throw std::invalid_argument("triangle references unknown vertex");
      edges[edge_key(tr[(i + 1) % 3], tr[(i + 2) % 3])].push_back({t, i});
    }
  }
  std::vector<std::uint8_t> boundary(static_cast<std::size_t>(n), 0);
  std::vector<double> star_area(static_cast<std::size_t>(n), 0.0);
  for (const auto& [key, uses] : edges) {
    if (uses.size() > 2) throw std::invalid_argument("non-manifold initial triangulation");
    if (uses.size() == 1) {
      boundary[static_cast<std::size_t>(key.first)] = 1;
      boundary[static_cast<std::size_t>(key.second)] = 1;
    }
  }
  for (const auto& tr : triangles) {
    const double a = triangle_area(points[static_cast<std::size_t>(tr[0])],
                                   points[static_cast<std::size_t>(tr[1])],
                                   points[static_cast<std::size_t>(tr[2])]);
    for (int v : tr) star_area[static_cast<std::size_t>(v)] += a;
  }
  for (int v = 0; v < n; ++v) {
    const int id = new_vertex(points[static_cast<std::size_t>(v)], 0, {},
                              boundary[static_cast<std::size_t>(v)] != 0, {-1, -1},
                              star_area[static_cast<std::size_t>(v)] / 3.0);
    add_root(id);
  }
  for (const auto& tr : triangles) {
    const int e = new_element(tr, 0, -1);
    initial_.push_back(e);
    patch_[static_cast<std::size_t>(tr[2])].push_back(e);
  }
  for (const auto& [key, uses] : edges) {
    for (const auto& [t, i] : uses) {
      int other = -1;
      for (const auto& [t2, i2] : uses)
        if (t2 != t) other = t2;
      elements_[static_cast<std::size_t>(t)].neighbor[static_cast<std::size_t>(i)] = other;
    }
  }
  // Matching condition: refinement edges are shared as refinement edges.
  for (int t = 0; t < static_cast<int>(elements_.size()); ++t) {
    const int nb = elements_[static_cast<std::size_t>(t)].neighbor[2];
    if (nb >= 0 && elements_[static_cast<std::size_t>(nb)].neighbor[2] != t)
      throw std::invalid_argument("newest vertices violate the matching condition");
  }
}

VertexMotherTree VertexMotherTree::unit_square() {
  std::vector<Point> p{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const std::array<int, 3> t[] = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  return VertexMotherTree(std::move(p), t);
}

VertexMotherTree VertexMotherTree::unit_square_two() {
  std::vector<Point> p{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const std::array<int, 3> t[] = {{0, 2, 1}, {2, 0, 3}};
  return VertexMotherTree(std::move(p), t);
}

VertexMotherTree VertexMotherTree::l_shape() {
  // Square corners, then the three square centres.
  std::vector<Point> p{{0, -1}, {1, -1}, {1, 0}, {0, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0},
                       {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
  const std::array<std::array<int, 5>, 3> squares{{{0, 1, 2, 3, 8}, {3, 2, 4, 5, 9}, {7, 3, 5, 6, 10}}};
  std::vector<std::array<int, 3>> t;
  for (const auto& s : squares)
    for (int i = 0; i < 4; ++i) t.push_back({s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>((i + 1) % 4)], s[4]});
  return VertexMotherTree(std::move(p), t);
}

int VertexMotherTree::new_vertex(Point p, int gen, std::span<const int> parents, bool boundary,
                                 std::array<int, 2> godparents, double hat_integral) {
  const int id = add_node(gen, make_key(gen, size()), parents);
  points_.push_back(p);
  boundary_.push_back(boundary ? 1 : 0);
  godparents_.push_back(godparents);
  hat_integral_.push_back(hat_integral);
  patch_.emplace_back();
  return id;
}

int VertexMotherTree::new_element(std::array<int, 3> v, int gen, int parent) {
  MotherElement e;
  e.v = v;
  e.gen = gen;
  e.parent = parent;
  e.neighbor = {kUnresolved, kUnresolved, kUnresolved};
  e.area = triangle_area(points_[static_cast<std::size_t>(v[0])], points_[static_cast<std::size_t>(v[1])],
                         points_[static_cast<std::size_t>(v[2])]);
  elements_.push_back(e);
  return static_cast<int>(elements_.size()) - 1;
}

int VertexMotherTree::child_containing(int e, int a, int b) const {
  for (int c : elements_[static_cast<std::size_t>(e)].children) {
    const auto& v = elements_[static_cast<std::size_t>(c)].v;
    const bool has_a = std::find(v.begin(), v.end(), a) != v.end();
    const bool has_b = std::find(v.begin(), v.end(), b) != v.end();
    if (has_a && has_b) return c;
  }
  throw std::logic_error("inconsistent bisection neighbourhood");
}

void VertexMotherTree::bisect(int e) {
  if (elements_[static_cast<std::size_t>(e)].bisected()) return;
  const int nb = neighbor(e, 2);
  const MotherElement E = elements_[static_cast<std::size_t>(e)];
  if (nb >= 0) {
    const auto& N = elements_[static_cast<std::size_t>(nb)];
    if (edge_key(N.v[0], N.v[1]) != edge_key(E.v[0], E.v[1]))
      throw std::logic_error("matching condition violated");
  }
  std::vector<int> parents{E.v[2]};
  double support = E.area;
  if (nb >= 0) {
    parents.push_back(elements_[static_cast<std::size_t>(nb)].v[2]);
    support += elements_[static_cast<std::size_t>(nb)].area;
  }
  const Point a = points_[static_cast<std::size_t>(E.v[0])];
  const Point b = points_[static_cast<std::size_t>(E.v[1])];
  const int m = new_vertex({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}, E.gen + 1, parents, nb < 0,
                           {E.v[0], E.v[1]}, support / 3.0);
  auto split = [&](int t) {
    const MotherElement T = elements_[static_cast<std::size_t>(t)];
    const int c0 = new_element({T.v[2], T.v[0], m}, T.gen + 1, t);
    const int c1 = new_element({T.v[1], T.v[2], m}, T.gen + 1, t);
    elements_[static_cast<std::size_t>(t)].children = {c0, c1};
    elements_[static_cast<std::size_t>(t)].midpoint = m;
    patch_[static_cast<std::size_t>(m)].push_back(c0);
    patch_[static_cast<std::size_t>(m)].push_back(c1);
  };
  split(e);
  if (nb >= 0) split(nb);
}

int VertexMotherTree::neighbor(int e, int edge) {
  const int cached = elements_[static_cast<std::size_t>(e)].neighbor[static_cast<std::size_t>(edge)];
  if (cached != kUnresolved) return cached;
  const int p = elements_[static_cast<std::size_t>(e)].parent;
  const MotherElement P = elements_[static_cast<std::size_t>(p)];
  const bool first = P.children[0] == e;
  const int m = P.midpoint;
  int result = -1;
  auto across_parent_edge = [&](int parent_edge, int a, int b) {
    const int n = neighbor(p, parent_edge);
    if (n < 0) return -1;
    bisect(n);
    return child_containing(n, a, b);
  };
  // Children are [v2, v0, m] and [v1, v2, m].
  if (first) {
    if (edge == 0) result = across_parent_edge(2, P.v[0], m);
    else if (edge == 1) result = P.children[1];
    else result = across_parent_edge(1, P.v[2], P.v[0]);
  } else {
    if (edge == 0) result = P.children[0];
    else if (edge == 1) result = across_parent_edge(2, P.v[1], m);
    else result = across_parent_edge(0, P.v[1], P.v[2]);
  }
  elements_[static_cast<std::size_t>(e)].neighbor[static_cast<std::size_t>(edge)] = result;
  return result;
}

void VertexMotherTree::create_children(int v) {
  std::vector<int> kids;
  for (std::size_t k = 0; k < patch_[static_cast<std::size_t>(v)].size(); ++k) {
    const int e = patch_[static_cast<std::size_t>(v)][k];
    bisect(e);
    kids.push_back(elements_[static_cast<std::size_t>(e)].midpoint);
  }
  std::sort(kids.begin(), kids.end());
  kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
  set_children(v, kids);
}

Triangulation triangulate(VertexMotherTree& mother, std::span<const int> vertices) {
  Triangulation tri;
  tri.mother = &mother;
  tri.vertices.assign(vertices.begin(), vertices.end());
  const std::size_t n = vertices.size();
  tri.godparents.resize(n);
  tri.parents.resize(n);
  tri.gen.resize(n);
  tri.boundary.resize(n);
  trees::MotherTree::Lease lease(mother);
  for (std::size_t i = 0; i < n; ++i) mother.scratch(vertices[i]) = static_cast<int>(i);
  bool ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    const int v = vertices[i];
    tri.gen[i] = mother.gen(v);
    tri.boundary[i] = mother.on_boundary(v) ? 1 : 0;
    tri.godparents[i] = {-1, -1};
    tri.parents[i] = {-1, -1};
    const auto gp = mother.godparents(v);
    for (std::size_t k = 0; k < gp.size(); ++k) {
      tri.godparents[i][k] = mother.scratch(gp[k]);
      ok = ok && tri.godparents[i][k] >= 0;
    }
    const auto ps = mother.parents(v);
    for (std::size_t k = 0; k < ps.size(); ++k) {
      tri.parents[i][k] = mother.scratch(ps[k]);
      ok = ok && tri.parents[i][k] >= 0;
    }
    if (i > 0 && mother.key(vertices[i - 1]) >= mother.key(v)) ok = false;
  }
  for (int r : mother.roots()) ok = ok && mother.scratch(r) >= 0;
  if (ok) {
    std::vector<int> stack(mother.initial_elements().rbegin(), mother.initial_elements().rend());
    while (!stack.empty()) {
      const int e = stack.back();
      stack.pop_back();
      const MotherElement& E = mother.element(e);
      tri.history.push_back(e);
      if (E.bisected() && mother.scratch(E.midpoint) >= 0) {
        tri.history_leaf.push_back(0);
        stack.push_back(E.children[1]);
        stack.push_back(E.children[0]);
        continue;
      }
      tri.history_leaf.push_back(1);
      tri.elements.push_back({mother.scratch(E.v[0]), mother.scratch(E.v[1]), mother.scratch(E.v[2])});
      tri.element_ids.push_back(e);
    }
  }
  for (int v : vertices) mother.scratch(v) = -1;
  if (!ok) throw std::invalid_argument("vertex set is not a sorted vertex tree");
  count_ops(n + tri.history.size());
  return tri;
}

std::vector<int> nvb_closure(VertexMotherTree& mother, std::span<const int> vertices) {
  std::vector<int> seeds(vertices.begin(), vertices.end());
  seeds.insert(seeds.end(), mother.roots().begin(), mother.roots().end());
  return trees::close_under_parents(mother, seeds);
}

std::vector<int> uniform_vertices(VertexMotherTree& mother, int g) {
  std::vector<int> out(mother.roots().begin(), mother.roots().end());
  std::vector<int> frontier = out;
  for (int level = 1; level <= g; ++level) {
    std::vector<int> next;
    for (int v : frontier)
      for (int c : mother.children(v)) next.push_back(c);
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  trees::normalize(mother, out);
  return out;
}

void dump_mesh(const Triangulation& tri, std::ostream& out) {
  for (std::size_t i = 0; i < tri.vertices.size(); ++i) {
    const Point p = tri.mother->point(tri.vertices[i]);
    out << "v " << p.x << ' ' << p.y << ' ' << tri.gen[i] << '\n';
  }
  for (std::size_t k = 0; k < tri.elements.size(); ++k) {
    const auto& t = tri.elements[k];
    out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << ' '
        << tri.mother->element(tri.element_ids[k]).gen << '\n';
  }
}

}  // namespace stheat::space
