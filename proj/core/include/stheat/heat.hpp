#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stheat/double_tree.hpp"
#include "stheat/multigrid.hpp"
#include "stheat/tensor_apply.hpp"

namespace stheat::heat {

enum class Domain { UnitSquare, LShape };

// Data of u_t - Laplace u = g on (0,1) x domain, u = 0 on the boundary,
// u(0) = u0.
struct Problem {
  std::string name;
  Domain domain = Domain::UnitSquare;
  std::function<double(double, double, double)> g;
  std::function<double(double, double)> u0;
  std::function<double(double, double, double)> exact;  // empty if unknown
};

// "smooth", "moving-peak", "cylinder" or "singular".
Problem make_problem(std::string_view name);
std::span<const std::string_view> problem_names();

// The three index trees of the discretization: trial time (three-point),
// test time (orthonormal) and space (newest vertex bisection).
struct MotherTrees {
  explicit MotherTrees(Domain domain);
  trees::TimeMotherTree trial{trees::TimeShape::Binary};
  trees::TimeMotherTree test{trees::TimeShape::Pair};
  space::VertexMotherTree space;
};

inline constexpr wavelets::Family kTrialFamily = wavelets::Family::ThreePoint;
inline constexpr wavelets::Family kTestFamily = wavelets::Family::Orthonormal;
inline constexpr wavelets::Family kDataFamily = wavelets::Family::HierarchicalHat;

// Adds the time children and the space descendants up to two generations
// of every pair, then closes.
dtree::DoubleTree enlarge(const dtree::DoubleTree& x);

// Test pairs (mu, nu) with |mu| = |lambda| and overlapping supports for some
// (lambda, nu) of `x`, closed to a double-tree over (test time, space).
dtree::DoubleTree derive_test_set(const dtree::DoubleTree& x, trees::TimeMotherTree& test);

// Initial trial set: the root pairs, enlarged once.
dtree::DoubleTree initial_trial_set(MotherTrees& trees);

// 1 for pairs whose space vertex is interior.
std::vector<std::uint8_t> interior_mask(const dtree::DoubleTree& t);

// Slot in `super` of every node of `sub` (a subset with the same mothers).
std::vector<std::size_t> embed_slots(const dtree::DoubleTree& sub, const dtree::DoubleTree& super);

// Estimator weight of a pair with the given time level and vertex generation:
// 1 / sqrt(1 + 4^(level - gen)).
double estimator_scale(int time_level, int space_gen);

enum class Preconditioner { Multigrid, DenseInverse };

struct EstimatorOutput {
  std::vector<std::size_t> slots;  // into the enlarged set, not in the trial set
  std::vector<double> values;
  double norm = 0.0;
};

// Everything that depends on one trial set: the enlarged and test sets,
// tensor plans, fiber preconditioners and the right-hand side.
class Discretization {
 public:
  Discretization(MotherTrees& trees, dtree::DoubleTree x, const Problem& problem,
                 int mg_cycles = 2, Preconditioner preconditioner = Preconditioner::Multigrid);
  Discretization(const Discretization&) = delete;
  Discretization& operator=(const Discretization&) = delete;

  const dtree::DoubleTree& x() const { return x_; }
  const dtree::DoubleTree& xbar() const { return xbar_; }
  const dtree::DoubleTree& y() const { return y_; }
  std::size_t dim_x() const { return dim(x_mask_); }
  std::size_t dim_xbar() const { return dim(xbar_mask_); }
  std::size_t dim_y() const { return dim(y_mask_); }
  std::span<const std::uint8_t> x_mask() const { return x_mask_; }

  // y = B v (v on x, y on the test set), out = B' y (on x or xbar).
  void apply_b(std::span<const double> v, std::span<double> y) const;
  void apply_bt_x(std::span<const double> y, std::span<double> out) const;
  void apply_bt_xbar(std::span<const double> y, std::span<double> out) const;
  // out = gamma0' gamma0 v from x to x.
  void apply_gamma0(std::span<const double> v, std::span<double> out) const;
  void apply_ky(std::span<double> y) const;
  void apply_kx(std::span<double> v) const;

  // out = S v on x (Schur operator of the trial set).
  void apply_schur(std::span<const double> v, std::span<double> out) const;

  std::span<const double> rhs() const { return f_x_; }
  // t for the zero iterate: sqrt(g_Y' K_Y g_Y + |u0|^2).
  double initial_error_bound() const { return initial_bound_; }

  // Two-level residual of v over the enlarged set minus the trial set.
  EstimatorOutput estimate(std::span<const double> v) const;

 private:
  static std::size_t dim(const std::vector<std::uint8_t>& mask);
  void build_preconditioners();
  void build_rhs(const Problem& problem);
  void mask(std::span<double> v, const std::vector<std::uint8_t>& m) const;

  // Preconditioner of one space fiber; fibers with equal vertex sets and
  // forms share one.
  struct FiberSolver {
    std::vector<std::size_t> local;  // local vertex of each fiber slot
    std::unique_ptr<space::Triangulation> tri;
    std::unique_ptr<space::Multigrid> mg;
    std::vector<std::size_t> interior;  // fiber positions of interior vertices
    Eigen::MatrixXd dense;              // DenseInverse mode
  };
  struct SpaceBlock {
    std::size_t begin = 0;  // slot range of the fiber
    std::size_t end = 0;
    std::shared_ptr<const FiberSolver> solver;
  };
  std::shared_ptr<const FiberSolver> make_solver(std::span<const int> ids, space::SpaceForm form,
                                                 bool with_stiffness) const;
  std::vector<SpaceBlock> make_blocks(const dtree::DoubleTree& t, bool sandwich) const;
  void apply_block(const SpaceBlock& b, std::span<double> v, bool sandwich) const;

  MotherTrees* trees_;
  int mg_cycles_;
  Preconditioner preconditioner_;
  dtree::DoubleTree x_, xbar_, y_;
  std::vector<std::uint8_t> x_mask_, xbar_mask_, y_mask_;
  std::vector<std::size_t> x_in_xbar_;
  dtree::TensorPlan plan_y_x_, plan_x_y_, plan_xbar_y_, plan_x_x_, plan_xbar_x_;
  std::vector<SpaceBlock> ky_blocks_, kx_blocks_;
  std::vector<double> f_xbar_, f_x_;
  double initial_bound_ = 0.0;
};

struct PcgResult {
  int iterations = 0;
  double beta = 0.0;  // sqrt of the preconditioned residual norm
};

// PCG for S u = f from the given start, until sqrt(r' K r) <= target.
PcgResult pcg(const Discretization& d, std::span<double> u, double target, int max_iterations = 1000);

// Smallest set whose squared mass reaches theta^2 of the total; ties are
// broken by position. Returns positions into `values`.
std::vector<std::size_t> dorfler_mark(std::span<const double> values, double theta);

struct LoopOptions {
  double theta = 0.5;
  double xi = 0.5;
  std::size_t max_dofs = 10000;
  int mg_cycles = 2;
  int max_iterations = 1000;
  int max_inner = 100;
  Preconditioner preconditioner = Preconditioner::Multigrid;
};

struct IterationRecord {
  int iteration = 0;
  std::size_t dim_x = 0, dim_xbar = 0, dim_y = 0;
  double residual_norm = 0.0;
  double beta = 0.0;
  int pcg_iters = 0;
  double solve_ms = 0.0, estimate_ms = 0.0, mark_ms = 0.0, refine_ms = 0.0;
  std::uint64_t opcount_solve = 0, opcount_estimate = 0;
};

// Called after Mark in every iteration with the record and the current
// discretization and iterate; returning false stops the loop. refine_ms is
// still zero at that point and is filled in on the returned records.
using LoopObserver =
    std::function<bool(const IterationRecord&, const Discretization&, std::span<const double>)>;

std::vector<IterationRecord> adaptive_loop(const Problem& problem, const LoopOptions& options,
                                           const LoopObserver& observer = {});

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const IterationRecord& r);

}  // namespace stheat::heat
