#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stheat/time_bases.hpp"

namespace stheat::matvec {

using wavelets::Family;
using wavelets::TimeIndex;

// Local bilinear forms on I = [0,1], written as (A u)(v) for trial u, test v.
enum class TimeForm {
  Mass,                 // int u v
  Derivative,           // int u' v
  DerivativeTransposed, // int u v'
  Trace,                // u(0) v(0)
};

TimeForm adjoint(TimeForm form);

struct TimeOperator {
  TimeForm form = TimeForm::Mass;
  Family trial = Family::ThreePoint;
  Family test = Family::ThreePoint;
};

TimeOperator adjoint(const TimeOperator& op);

// Contribution of one element of the level-`level` grid to (A phi)(phi_test)
// for the given restrictions of trial and test functions to that element.
double element_value(TimeForm form, int level, std::int64_t element,
                     wavelets::LinearPiece trial, wavelets::LinearPiece test);

// Flags the test scalings at level-1 (positions) whose support meets the
// union of supports of the given trial wavelets at `level`.
std::vector<bool> construct_pib(Family test, Family trial, int level,
                                std::span<const std::int64_t> test_scalings,
                                std::span<const std::int64_t> trial_wavelets);

// e = (A Phi|_trial)(Phi_test|_test) d on one level; positions sorted.
std::vector<double> apply_single_scale(const TimeOperator& op, int level,
                                       std::span<const std::int64_t> trial_pos,
                                       std::span<const double> d,
                                       std::span<const std::int64_t> test_pos);

enum class Part { Full, Upper, Lower };

// General entry with single-scale inputs at level-1 (Full/Upper use both
// test scalings and the trial scalings; Lower ignores test scalings).
// Trees hold wavelets of levels >= level, sorted by (level, pos).
struct EvalResult {
  std::vector<double> e;  // on test scalings
  std::vector<double> f;  // on test wavelets
};

EvalResult eval_recursive(const TimeOperator& op, Part part, int level,
                          std::span<const std::int64_t> test_scalings,
                          std::span<const TimeIndex> test_tree,
                          std::span<const std::int64_t> trial_scalings,
                          std::span<const double> d,
                          std::span<const TimeIndex> trial_tree,
                          std::span<const double> c);

// Top-level application on whole trees (sorted by level, then position):
// out = [(A psi_in)(psi_out)] restricted to the requested level part, where
// Upper keeps |out| <= |in| and Lower keeps |out| > |in|.
void apply(const TimeOperator& op, Part part, std::span<const TimeIndex> in_tree,
           std::span<const double> in_values, std::span<const TimeIndex> out_tree,
           std::span<double> out_values);

}  // namespace stheat::matvec
