#pragma once

#include <array>
#include <span>
#include <vector>

#include "stheat/nvb.hpp"

namespace stheat::space {

using ElementMatrix = std::array<std::array<double, 3>, 3>;

ElementMatrix stiffness_matrix(Point a, Point b, Point c);
ElementMatrix mass_matrix(Point a, Point b, Point c);

// Weights of a combination stiffness * A_x + mass * M_x.
struct SpaceForm {
  double stiffness = 1.0;
  double mass = 0.0;
};

inline constexpr SpaceForm kStiffness{1.0, 0.0};
inline constexpr SpaceForm kMass{0.0, 1.0};

// Whether boundary entries of an input take part (interpolants of data that
// need not vanish on the boundary) or are treated as zero.
enum class BoundaryInput { Masked, Kept };

// out = (form Phi)(Phi) in over the nodal basis. Vectors are indexed by local
// vertex; boundary entries of `out` are zero.
void apply_nodal(const Triangulation& tri, SpaceForm form, std::span<const double> in,
                 std::span<double> out, BoundaryInput input = BoundaryInput::Masked);

// In-place basis changes over local vertices (boundary entries set to zero).
// hierarchical coefficients -> nodal values (T).
void hb_to_nodal(const Triangulation& tri, std::span<double> v,
                 BoundaryInput input = BoundaryInput::Masked);
// nodal values -> hierarchical coefficients (T^-1).
void nodal_to_hb(const Triangulation& tri, std::span<double> v);
// functional on the nodal basis -> functional on the hierarchical basis (T^T).
void nodal_dual_to_hb(const Triangulation& tri, std::span<double> v);
// functional on the hierarchical basis -> functional on the nodal basis (T^-T).
void hb_dual_to_nodal(const Triangulation& tri, std::span<double> v);

// out = (form Psi)(Psi) in on the hierarchical basis.
void apply_hb(const Triangulation& tri, SpaceForm form, std::span<const double> in,
              std::span<double> out, BoundaryInput input = BoundaryInput::Masked);

// Squared L2 norm of the function with the given (unmasked) nodal values.
double mass_norm_squared(const Triangulation& tri, std::span<const double> nodal);

// Modified hierarchical basis: each non-root hat is corrected by multiples of
// its interior parents so that it has (up to the parent weights) zero mean.
// modified coefficients -> hierarchical coefficients.
void modified_to_hb(const Triangulation& tri, std::span<double> v);
void hb_to_modified(const Triangulation& tri, std::span<double> v);
// functional on the hierarchical basis -> functional on the modified basis.
void hb_dual_to_modified(const Triangulation& tri, std::span<double> v);

// Hierarchical interpolation weights: f(nu) - (f(g1) + f(g2)) / 2.
template <class F>
std::vector<double> hb_interpolate(const Triangulation& tri, F&& f) {
  std::vector<double> out(tri.num_vertices(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (tri.boundary[i]) continue;
    const Point p = tri.mother->point(tri.vertices[i]);
    double v = f(p.x, p.y);
    for (int g : tri.mother->godparents(tri.vertices[i])) {
      const Point q = tri.mother->point(g);
      v -= 0.5 * f(q.x, q.y);
    }
    out[i] = v;
  }
  return out;
}

}  // namespace stheat::space
