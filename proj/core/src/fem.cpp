#include "stheat/fem.hpp"

#include <stdexcept>

#include "stheat/op_counter.hpp"

namespace stheat::space {

namespace {

double signed_area(Point a, Point b, Point c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

void check_sizes(const Triangulation& tri, std::size_t a, std::size_t b) {
  if (a != tri.num_vertices() || b != tri.num_vertices())
    throw std::invalid_argument("vector length does not match triangulation");
}

}  // namespace

ElementMatrix stiffness_matrix(Point a, Point b, Point c) {
  const double area2 = 2.0 * signed_area(a, b, c);
  // Gradients of the barycentric coordinates, scaled by 2|T|.
  const std::array<std::array<double, 2>, 3> g{{{b.y - c.y, c.x - b.x},
                                                {c.y - a.y, a.x - c.x},
                                                {a.y - b.y, b.x - a.x}}};
  const double scale = 1.0 / (2.0 * std::abs(area2));
  ElementMatrix m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      m[i][j] = scale * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
  return m;
}

ElementMatrix mass_matrix(Point a, Point b, Point c) {
  const double area = std::abs(signed_area(a, b, c));
  ElementMatrix m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
  return m;
}

void apply_nodal(const Triangulation& tri, SpaceForm form, std::span<const double> in,
                 std::span<double> out, BoundaryInput input) {
  const bool keep = input == BoundaryInput::Kept;
  check_sizes(tri, in.size(), out.size());
  std::fill(out.begin(), out.end(), 0.0);
  const VertexMotherTree& mother = *tri.mother;
  for (const auto& t : tri.elements) {
    const Point p0 = mother.point(tri.vertices[static_cast<std::size_t>(t[0])]);
    const Point p1 = mother.point(tri.vertices[static_cast<std::size_t>(t[1])]);
    const Point p2 = mother.point(tri.vertices[static_cast<std::size_t>(t[2])]);
    ElementMatrix m{};
    if (form.stiffness != 0.0) {
      const auto s = stiffness_matrix(p0, p1, p2);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] += form.stiffness * s[i][j];
    }
    if (form.mass != 0.0) {
      const auto s = mass_matrix(p0, p1, p2);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] += form.mass * s[i][j];
    }
    for (int i = 0; i < 3; ++i) {
      const auto vi = static_cast<std::size_t>(t[i]);
      if (tri.boundary[vi]) continue;
      double s = 0.0;
      for (int j = 0; j < 3; ++j) {
        const auto vj = static_cast<std::size_t>(t[j]);
        if (keep || !tri.boundary[vj]) s += m[i][j] * in[vj];
      }
      out[vi] += s;
    }
  }
  count_ops(tri.elements.size());
}

void hb_to_nodal(const Triangulation& tri, std::span<double> v, BoundaryInput input) {
  check_sizes(tri, v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (tri.boundary[i] && input == BoundaryInput::Masked) {
      v[i] = 0.0;
      continue;
    }
    for (int g : tri.godparents[i])
      if (g >= 0) v[i] += 0.5 * v[static_cast<std::size_t>(g)];
  }
  count_ops(v.size());
}

void nodal_to_hb(const Triangulation& tri, std::span<double> v) {
  check_sizes(tri, v.size(), v.size());
  for (std::size_t i = v.size(); i-- > 0;) {
    if (tri.boundary[i]) {
      v[i] = 0.0;
      continue;
    }
    for (int g : tri.godparents[i])
      if (g >= 0) v[i] -= 0.5 * v[static_cast<std::size_t>(g)];
  }
  count_ops(v.size());
}

void nodal_dual_to_hb(const Triangulation& tri, std::span<double> v) {
  check_sizes(tri, v.size(), v.size());
  for (std::size_t i = v.size(); i-- > 0;) {
    if (tri.boundary[i]) {
      v[i] = 0.0;
      continue;
    }
    for (int g : tri.godparents[i])
      if (g >= 0 && !tri.boundary[static_cast<std::size_t>(g)]) v[static_cast<std::size_t>(g)] += 0.5 * v[i];
  }
  count_ops(v.size());
}

void hb_dual_to_nodal(const Triangulation& tri, std::span<double> v) {
  check_sizes(tri, v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (tri.boundary[i]) v[i] = 0.0;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (tri.boundary[i]) continue;
    for (int g : tri.godparents[i])
      if (g >= 0 && !tri.boundary[static_cast<std::size_t>(g)]) v[static_cast<std::size_t>(g)] -= 0.5 * v[i];
  }
  count_ops(v.size());
}

void apply_hb(const Triangulation& tri, SpaceForm form, std::span<const double> in,
              std::span<double> out, BoundaryInput input) {
  std::vector<double> nodal(in.begin(), in.end());
  hb_to_nodal(tri, nodal, input);
  apply_nodal(tri, form, nodal, out, input);
  nodal_dual_to_hb(tri, out);
}

double mass_norm_squared(const Triangulation& tri, std::span<const double> nodal) {
  check_sizes(tri, nodal.size(), nodal.size());
  double sum = 0.0;
  for (const auto& t : tri.elements) {
    const auto m = mass_matrix(tri.mother->point(tri.vertices[static_cast<std::size_t>(t[0])]),
                               tri.mother->point(tri.vertices[static_cast<std::size_t>(t[1])]),
                               tri.mother->point(tri.vertices[static_cast<std::size_t>(t[2])]));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        sum += nodal[static_cast<std::size_t>(t[i])] * m[i][j] * nodal[static_cast<std::size_t>(t[j])];
  }
  count_ops(tri.elements.size());
  return sum;
}

namespace {

// Weights w such that psi_hat(nu) = psi(nu) - sum_p w_p psi(p) over the
// interior parents p of nu.
template <class Visit>
void for_each_parent_weight(const Triangulation& tri, std::size_t i, Visit&& visit) {
  if (tri.gen[i] == 0 || tri.boundary[i]) return;
  int count = 0;
  for (int p : tri.parents[i])
    if (p >= 0 && !tri.boundary[static_cast<std::size_t>(p)]) ++count;
  if (count == 0) return;
  const double own = tri.mother->hat_integral(tri.vertices[i]);
  for (int p : tri.parents[i]) {
    if (p < 0 || tri.boundary[static_cast<std::size_t>(p)]) continue;
    const double w = own / (tri.mother->hat_integral(tri.vertices[static_cast<std::size_t>(p)]) * count);
    visit(static_cast<std::size_t>(p), w);
  }
}

}  // namespace

void modified_to_hb(const Triangulation& tri, std::span<double> v) {
  check_sizes(tri, v.size(), v.size());
  // Parents precede children: an ascending sweep reads each coefficient
  // before any child has touched it.
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (tri.boundary[i]) {
      v[i] = 0.0;
      continue;
    }
    const double d = v[i];
    for_each_parent_weight(tri, i, [&](std::size_t p, double w) { v[p] -= w * d; });
  }
  count_ops(v.size());
}

void hb_to_modified(const Triangulation& tri, std::span<double> v) {
  check_sizes(tri, v.size(), v.size());
  for (std::size_t i = v.size(); i-- > 0;) {
    if (tri.boundary[i]) {
      v[i] = 0.0;
      continue;
    }
    const double d = v[i];
    for_each_parent_weight(tri, i, [&](std::size_t p, double w) { v[p] += w * d; });
  }
  count_ops(v.size());
}

void hb_dual_to_modified(const Triangulation& tri, std::span<double> v) {
  check_sizes(tri, v.size(), v.size());
  // Children have larger indices; sweep downwards so parents are unchanged
  // when read.
  for (std::size_t i = v.size(); i-- > 0;) {
    if (tri.boundary[i]) {
      v[i] = 0.0;
      continue;
    }
    double s = v[i];
    for_each_parent_weight(tri, i, [&](std::size_t p, double w) { s -= w * v[p]; });
    v[i] = s;
  }
  count_ops(v.size());
}

}  // namespace stheat::space
