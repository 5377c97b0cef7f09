#include "stheat/time_bases.hpp"

#include <cmath>
#include <stdexcept>

namespace stheat::wavelets {

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);

std::int64_t pow2(int level) { return std::int64_t{1} << level; }

void require_valid(Family family, TimeIndex index) {
  if (!is_valid(family, index)) throw std::out_of_range("invalid time index");
}

// Level-1 orthonormal wavelets on [0,1], evaluated with the branch chosen by
// `branch` (so one-sided limits at u = 1/2 are available).
double ortho_level1(std::int64_t pos, double u, double branch) {
  if (pos == 0) return branch < 0.5 ? 1.0 - 6.0 * u : 5.0 - 6.0 * u;
  return branch < 0.5 ? kSqrt3 * (1.0 - 4.0 * u) : kSqrt3 * (4.0 * u - 3.0);
}

// Nodal values of a three-point wavelet at level-|index| grid points.
double threepoint_nodal(TimeIndex index, std::int64_t node) {
  for (const auto& e : threepoint_mask(index))
    if (e.pos == node) return e.coeff;
  return 0.0;
}

// Piecewise-linear wavelet value at t, picking the linear branch of the
// element containing `branch`.
double direct_value(Family family, TimeIndex index, double t, double branch) {
  const int l = index.level;
  if (l == 0) {
    if (family == Family::Orthonormal)
      return index.pos == 0 ? 1.0 : kSqrt3 * (2.0 * t - 1.0);
    return index.pos == 0 ? 1.0 - t : t;
  }
  const double scale = static_cast<double>(pow2(l));
  if (family == Family::HierarchicalHat) {
    const double center = static_cast<double>(2 * index.pos + 1) / scale;
    return std::max(0.0, 1.0 - std::abs(t - center) * scale);
  }
  if (family == Family::ThreePoint) {
    auto node = static_cast<std::int64_t>(std::floor(branch * scale));
    node = std::min(node, pow2(l) - 1);
    const double s = t * scale - static_cast<double>(node);
    return (1.0 - s) * threepoint_nodal(index, node) +
           s * threepoint_nodal(index, node + 1);
  }
  const double half = static_cast<double>(pow2(l - 1));
  const std::int64_t k = index.pos / 2;
  const double u = t * half - static_cast<double>(k);
  const double ub = branch * half - static_cast<double>(k);
  if (ub < 0.0 || ub >= 1.0) return 0.0;
  return std::sqrt(half) * ortho_level1(index.pos % 2, u, ub);
}

}  // namespace

ScalingKind scaling_kind(Family family) {
  return family == Family::Orthonormal ? ScalingKind::DiscontinuousLinear
                                       : ScalingKind::ContinuousHat;
}

Interval Interval::at_level(int finer) const {
  const int shift = finer - level;
  return {left << shift, right << shift, finer};
}

bool Interval::overlaps(const Interval& other) const {
  const int l = std::max(level, other.level);
  const Interval a = at_level(l), b = other.at_level(l);
  return std::max(a.left, b.left) < std::min(a.right, b.right);
}

double Interval::lo() const { return std::ldexp(static_cast<double>(left), -level); }
double Interval::hi() const { return std::ldexp(static_cast<double>(right), -level); }

void Mask::push(std::int64_t pos, double coeff) {
  if (size_ == data_.size()) throw std::logic_error("mask overflow");
  data_[size_++] = {pos, coeff};
}

std::int64_t num_wavelets(Family family, int level) {
  if (level == 0) return 2;
  return family == Family::Orthonormal ? pow2(level) : pow2(level - 1);
}

std::int64_t num_scalings(ScalingKind kind, int level) {
  return kind == ScalingKind::ContinuousHat ? pow2(level) + 1 : pow2(level + 1);
}

bool is_valid(Family family, TimeIndex index) {
  return index.level >= 0 && index.level < 62 && index.pos >= 0 &&
         index.pos < num_wavelets(family, index.level);
}

Mask threepoint_mask(TimeIndex index) {
  require_valid(Family::ThreePoint, index);
  Mask m;
  const int l = index.level;
  if (l == 0) {
    m.push(index.pos, 1.0);
    return m;
  }
  if (l == 1) {
    m.push(0, -kSqrt2);
    m.push(1, kSqrt2);
    m.push(2, -kSqrt2);
    return m;
  }
  const double c = std::ldexp(1.0, l / 2) * (l % 2 ? kSqrt2 : 1.0);
  const std::int64_t n = index.pos;
  const std::int64_t last = pow2(l - 1) - 1;
  if (n == 0) {
    m.push(0, -c);
    m.push(1, c);
    m.push(2, -0.5 * c);
  } else if (n == last) {
    m.push(2 * n, -0.5 * c);
    m.push(2 * n + 1, c);
    m.push(2 * n + 2, -c);
  } else {
    m.push(2 * n, -0.5 * c);
    m.push(2 * n + 1, c);
    m.push(2 * n + 2, -0.5 * c);
  }
  return m;
}

Mask ortho_mask(TimeIndex index) {
  require_valid(Family::Orthonormal, index);
  Mask m;
  const int l = index.level;
  if (l == 0) {
    m.push(index.pos, 1.0);
    return m;
  }
  const double c = std::sqrt(std::ldexp(1.0, l - 1));
  const std::int64_t k = index.pos / 2;
  if (index.pos % 2 == 0) {
    m.push(4 * k, -0.5 * c);
    m.push(4 * k + 1, -0.5 * kSqrt3 * c);
    m.push(4 * k + 2, 0.5 * c);
    m.push(4 * k + 3, -0.5 * kSqrt3 * c);
  } else {
    m.push(4 * k + 1, -c);
    m.push(4 * k + 3, c);
  }
  return m;
}

Mask hat_mask(TimeIndex index) {
  require_valid(Family::HierarchicalHat, index);
  Mask m;
  m.push(index.level == 0 ? index.pos : 2 * index.pos + 1, 1.0);
  return m;
}

Mask wavelet_mask(Family family, TimeIndex index) {
  switch (family) {
    case Family::ThreePoint: return threepoint_mask(index);
    case Family::Orthonormal: return ortho_mask(index);
    case Family::HierarchicalHat: return hat_mask(index);
  }
  throw std::logic_error("unknown family");
}

Mask scaling_refinement(ScalingKind kind, int level, std::int64_t coarse_pos) {
  Mask m;
  if (kind == ScalingKind::ContinuousHat) {
    const std::int64_t last = pow2(level);
    if (2 * coarse_pos - 1 >= 0) m.push(2 * coarse_pos - 1, 0.5);
    m.push(2 * coarse_pos, 1.0);
    if (2 * coarse_pos + 1 <= last) m.push(2 * coarse_pos + 1, 0.5);
    return m;
  }
  const std::int64_t k = coarse_pos / 2;
  if (coarse_pos % 2 == 0) {
    m.push(4 * k, 1.0);
    m.push(4 * k + 2, 1.0);
  } else {
    m.push(4 * k, -0.5 * kSqrt3);
    m.push(4 * k + 1, 0.5);
    m.push(4 * k + 2, 0.5 * kSqrt3);
    m.push(4 * k + 3, 0.5);
  }
  return m;
}

Interval wavelet_support(Family family, TimeIndex index) {
  require_valid(family, index);
  const int l = index.level;
  if (l == 0) return {0, 1, 0};
  switch (family) {
    case Family::ThreePoint:
      return {std::max<std::int64_t>(0, 2 * index.pos - 1),
              std::min(pow2(l), 2 * index.pos + 3), l};
    case Family::HierarchicalHat:
      return {2 * index.pos, 2 * index.pos + 2, l};
    case Family::Orthonormal: {
      const std::int64_t k = index.pos / 2;
      return {2 * k, 2 * k + 2, l};
    }
  }
  throw std::logic_error("unknown family");
}

Interval scaling_support(ScalingKind kind, TimeIndex index) {
  if (kind == ScalingKind::ContinuousHat)
    return {std::max<std::int64_t>(0, index.pos - 1),
            std::min(pow2(index.level), index.pos + 1), index.level};
  return {index.pos / 2, index.pos / 2 + 1, index.level};
}

double evaluate_scaling(ScalingKind kind, TimeIndex index, double t) {
  if (t < 0.0 || t > 1.0) throw std::domain_error("t outside [0,1]");
  const double scale = std::ldexp(1.0, index.level);
  if (kind == ScalingKind::ContinuousHat)
    return std::max(0.0, 1.0 - std::abs(t * scale - static_cast<double>(index.pos)));
  auto element = static_cast<std::int64_t>(std::floor(t * scale));
  element = std::min(element, pow2(index.level) - 1);
  if (element != index.pos / 2) return 0.0;
  const double s = t * scale - static_cast<double>(element);
  return index.pos % 2 == 0 ? 1.0 : kSqrt3 * (2.0 * s - 1.0);
}

double evaluate(Family family, TimeIndex index, double t) {
  if (t < 0.0 || t > 1.0) throw std::domain_error("t outside [0,1]");
  const ScalingKind kind = scaling_kind(family);
  double value = 0.0;
  for (const auto& e : wavelet_mask(family, index))
    value += e.coeff * evaluate_scaling(kind, {index.level, e.pos}, t);
  return value;
}

std::vector<TimeIndex> parents(Family family, TimeIndex index) {
  require_valid(family, index);
  const int l = index.level;
  if (l == 0) return {};
  if (l == 1) return {{0, 0}, {0, 1}};
  if (family == Family::Orthonormal) {
    const std::int64_t k = (index.pos / 2) / 2;
    return {{l - 1, 2 * k}, {l - 1, 2 * k + 1}};
  }
  return {{l - 1, index.pos / 2}};
}

std::vector<TimeIndex> children(Family family, TimeIndex index) {
  require_valid(family, index);
  const int l = index.level;
  if (family == Family::Orthonormal) {
    if (l == 0) return {{1, 0}, {1, 1}};
    const std::int64_t k = index.pos / 2;
    return {{l + 1, 4 * k}, {l + 1, 4 * k + 1}, {l + 1, 4 * k + 2}, {l + 1, 4 * k + 3}};
  }
  if (l == 0) return {{1, 0}};
  return {{l + 1, 2 * index.pos}, {l + 1, 2 * index.pos + 1}};
}

double hat_dual(TimeIndex index, const std::function<double(double)>& f) {
  require_valid(Family::HierarchicalHat, index);
  if (index.level == 0) return f(static_cast<double>(index.pos));
  const double h = std::ldexp(1.0, -index.level);
  const double left = static_cast<double>(2 * index.pos) * h;
  return f(left + h) - 0.5 * (f(left) + f(left + 2 * h));
}

LinearPiece scaling_piece(ScalingKind kind, std::int64_t pos, std::int64_t element) {
  if (kind == ScalingKind::ContinuousHat) {
    if (element == pos - 1) return {0.0, 1.0};
    if (element == pos) return {1.0, -1.0};
    return {};
  }
  if (element != pos / 2) return {};
  return pos % 2 == 0 ? LinearPiece{1.0, 0.0} : LinearPiece{-kSqrt3, 2.0 * kSqrt3};
}

LinearPiece wavelet_piece(Family family, TimeIndex index, int level,
                          std::int64_t element) {
  require_valid(family, index);
  const double h = std::ldexp(1.0, -level);
  const double left = static_cast<double>(element) * h;
  const double mid = left + 0.5 * h;
  const double a = direct_value(family, index, left, mid);
  const double b = direct_value(family, index, left + h, mid);
  return {a, b - a};
}

}  // namespace stheat::wavelets
