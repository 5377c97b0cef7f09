#pragma once

#include <Eigen/Cholesky>
#include <span>
#include <vector>

#include "stheat/fem.hpp"

namespace stheat::space {

// Multiplicative V-cycle on the nodal basis of a triangulation. Level k
// smooths over the interior vertices of generation k and their godparents
// (forward Gauss-Seidel going down, reverse going up) with the level-k
// stencils; level 0 is solved exactly.
class Multigrid {
 public:
  Multigrid(const Triangulation& tri, SpaceForm form);

  // u = MG(rhs), one cycle from a zero initial guess.
  void vcycle(std::span<const double> rhs, std::span<double> u) const;
  // `cycles` residual-corrected V-cycles starting from zero.
  void solve(std::span<const double> rhs, std::span<double> u, int cycles) const;

  const Triangulation& triangulation() const { return *tri_; }
  SpaceForm form() const { return form_; }
  int levels() const { return static_cast<int>(level_begin_.size()) - 1; }

 private:
  struct Row {
    int vertex;
    double diag;
    int begin;
    int end;
  };

  const Triangulation* tri_;
  SpaceForm form_;
  std::vector<Row> rows_;             // level 1 rows, then level 2, ...
  std::vector<int> level_begin_;      // index into rows_, size L+1
  std::vector<int> cols_;
  std::vector<double> vals_;
  std::vector<int> new_begin_;        // index into new_vertices_, size L+2
  std::vector<int> new_vertices_;     // interior vertices sorted by generation
  std::vector<int> coarse_dofs_;
  Eigen::LLT<Eigen::MatrixXd> coarse_;
};

// Hierarchical-basis preconditioner T^-1 MG T^-T with `cycles` V-cycles.
void precondition_hb(const Multigrid& mg, std::span<double> v, int cycles);

}  // namespace stheat::space
