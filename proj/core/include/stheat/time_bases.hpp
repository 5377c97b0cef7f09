#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace stheat::wavelets {

enum class Family { ThreePoint, Orthonormal, HierarchicalHat };

// Continuous nodal hats (positions 0..2^l) or discontinuous linears
// (position 2k: constant on element k, 2k+1: sqrt3(2s-1) on element k).
enum class ScalingKind { ContinuousHat, DiscontinuousLinear };

ScalingKind scaling_kind(Family family);

struct TimeIndex {
  int level = 0;
  std::int64_t pos = 0;
  auto operator<=>(const TimeIndex&) const = default;
};

// Closed interval [left, right] * 2^-level with integer endpoints.
struct Interval {
  std::int64_t left = 0;
  std::int64_t right = 0;
  int level = 0;

  Interval at_level(int finer) const;  // finer >= level
  bool overlaps(const Interval& other) const;  // positive measure
  double lo() const;
  double hi() const;
};

struct MaskEntry {
  std::int64_t pos;
  double coeff;
};

class Mask {
 public:
  void push(std::int64_t pos, double coeff);
  std::span<const MaskEntry> entries() const { return {data_.data(), size_}; }
  const MaskEntry* begin() const { return data_.data(); }
  const MaskEntry* end() const { return data_.data() + size_; }
  std::size_t size() const { return size_; }

 private:
  std::array<MaskEntry, 4> data_{};
  std::size_t size_ = 0;
};

bool is_valid(Family family, TimeIndex index);
std::int64_t num_wavelets(Family family, int level);
std::int64_t num_scalings(ScalingKind kind, int level);

// Wavelet expressed in the level-|index| scaling basis of its family.
Mask wavelet_mask(Family family, TimeIndex index);
Mask threepoint_mask(TimeIndex index);
Mask ortho_mask(TimeIndex index);
Mask hat_mask(TimeIndex index);

// Coarse scaling function (level-1, pos) in terms of level `level` scalings.
Mask scaling_refinement(ScalingKind kind, int level, std::int64_t coarse_pos);

Interval wavelet_support(Family family, TimeIndex index);
Interval scaling_support(ScalingKind kind, TimeIndex index);

double evaluate(Family family, TimeIndex index, double t);
double evaluate_scaling(ScalingKind kind, TimeIndex index, double t);

std::vector<TimeIndex> parents(Family family, TimeIndex index);
std::vector<TimeIndex> children(Family family, TimeIndex index);

double hat_dual(TimeIndex index, const std::function<double(double)>& f);

// Restriction of a function to one element, as a + b*s with s in [0,1].
struct LinearPiece {
  double a = 0.0;
  double b = 0.0;
  double at(double s) const { return a + b * s; }
};

LinearPiece scaling_piece(ScalingKind kind, std::int64_t pos,
                          std::int64_t element);

// Direct closed-form restriction of a wavelet to element `element` of the
// uniform level-`level` grid (level >= |index|); independent of masks.
LinearPiece wavelet_piece(Family family, TimeIndex index, int level,
                          std::int64_t element);

}  // namespace stheat::wavelets
