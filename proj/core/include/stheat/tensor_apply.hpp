#pragma once

#include <span>

#include "stheat/double_tree.hpp"
#include "stheat/fem.hpp"
#include "stheat/time_matvec.hpp"

namespace stheat::dtree {

// Operator along axis 1, applied to one fiber: out = A in (overwrites).
// Ids are key-sorted trees of the respective mother trees.
class FiberOperator {
 public:
  virtual ~FiberOperator() = default;
  virtual void apply(std::span<const int> in_ids, std::span<const double> in,
                     std::span<const int> out_ids, std::span<double> out) const = 0;
};

class TimeFiberOperator final : public FiberOperator {
 public:
  TimeFiberOperator(matvec::TimeOperator op, const trees::TimeMotherTree& in_mother,
                    const trees::TimeMotherTree& out_mother)
      : op_(op), in_mother_(&in_mother), out_mother_(&out_mother) {}
  void apply(std::span<const int> in_ids, std::span<const double> in,
             std::span<const int> out_ids, std::span<double> out) const override;

 private:
  matvec::TimeOperator op_;
  const trees::TimeMotherTree* in_mother_;
  const trees::TimeMotherTree* out_mother_;
};

// Hierarchical-basis Galerkin matrix of a space form, evaluated on the
// triangulation of the union of both vertex trees (roots added).
class SpaceFiberOperator final : public FiberOperator {
 public:
  SpaceFiberOperator(space::VertexMotherTree& mother, space::SpaceForm form,
                     space::BoundaryInput input = space::BoundaryInput::Masked)
      : mother_(&mother), form_(form), input_(input) {}
  void apply(std::span<const int> in_ids, std::span<const double> in,
             std::span<const int> out_ids, std::span<double> out) const override;

 private:
  space::VertexMotherTree* mother_;
  space::SpaceForm form_;
  space::BoundaryInput input_;
};

// Auxiliary double-trees for applying an operator from `in` to `out`.
// Axis 0 of both must be time mother trees; the families decide supports.
DoubleTree generate_sigma(const DoubleTree& out, const DoubleTree& in,
                          wavelets::Family out_family, wavelets::Family in_family);
DoubleTree generate_theta(const DoubleTree& out, const DoubleTree& in,
                          wavelets::Family out_family, wavelets::Family in_family);

struct TensorPlan {
  DoubleTree sigma;
  DoubleTree theta;
};

TensorPlan make_plan(const DoubleTree& out, const DoubleTree& in, wavelets::Family out_family,
                     wavelets::Family in_family);

// out += R_out (A0 x A1) I_in in, with A0 = time_op (trial family on `in`,
// test family on `out`) and A1 = fiber_op.
void apply_tensor(const TensorPlan& plan, const matvec::TimeOperator& time_op,
                  const FiberOperator& fiber_op, const DoubleTree& in,
                  std::span<const double> in_values, const DoubleTree& out,
                  std::span<double> out_values);

}  // namespace stheat::dtree
