#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dtree_test_util.hpp"
#include "stheat/heat.hpp"
#include "time_oracle.hpp"

namespace stheat::testutil {

inline std::vector<wavelets::TimeIndex> time_indices(const dtree::DoubleTree& t) {
  const auto& m = dynamic_cast<const trees::TimeMotherTree&>(t.mother(0));
  std::vector<wavelets::TimeIndex> out;
  for (int id : t.projection0()) out.push_back(m.index(id));
  return out;
}

inline std::vector<int> space_ids(const dtree::DoubleTree& t) {
  return {t.projection1().begin(), t.projection1().end()};
}

// Dense matrix of A0 x A1 from `in` to `out` (all slots).
inline Eigen::MatrixXd kron(const dtree::DoubleTree& in, const dtree::DoubleTree& out, const Eigen::MatrixXd& a0,
                     const Eigen::MatrixXd& a1) {
  const auto in0 = positions(in.projection0()), in1 = positions(in.projection1());
  const auto out0 = positions(out.projection0()),
             out1 = positions(out.projection1());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(out.size()), static_cast<Eigen::Index>(in.size()));
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < in.size(); ++j) {
      const auto o = out.node(i), p = in.node(j);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          a0(out0.at(o.n0), in0.at(p.n0)) * a1(out1.at(o.n1), in1.at(p.n1));
    }
  return m;
}

inline std::vector<Eigen::Index> interior(const dtree::DoubleTree& t) {
  std::vector<Eigen::Index> out;
  const auto m = heat::interior_mask(t);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i]) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

struct DenseSystem {
  Eigen::MatrixXd b;      // interior Y x interior X
  Eigen::MatrixXd gamma;  // interior X x interior X
  Eigen::MatrixXd ay;     // block diagonal A_x over interior Y
};

inline DenseSystem dense_system(heat::MotherTrees& trees, const heat::Discretization& d) {
  const auto& x = d.x();
  const auto& y = d.y();
  const auto tx = time_indices(x), ty = time_indices(y);
  const auto sx = space_ids(x), sy = space_ids(y);
  const auto mx = dense_space(trees.space, space::kMass, sx, sy);
  const auto ax = dense_space(trees.space, space::kStiffness, sx, sy);
  const auto dt = dense_time({matvec::TimeForm::Derivative, heat::kTrialFamily, heat::kTestFamily}, tx, ty);
  const auto mt = dense_time({matvec::TimeForm::Mass, heat::kTrialFamily, heat::kTestFamily}, tx, ty);
  const auto gt = dense_time({matvec::TimeForm::Trace, heat::kTrialFamily, heat::kTrialFamily}, tx, tx);
  const auto mxx = dense_space(trees.space, space::kMass, sx, sx);
  const auto ayy = dense_space(trees.space, space::kStiffness, sy, sy);

  const auto ix = interior(x), iy = interior(y);
  const Eigen::MatrixXd b = kron(x, y, dt, mx) + kron(x, y, mt, ax);
  const Eigen::MatrixXd g = kron(x, x, gt, mxx);
  DenseSystem out;
  out.b = b(iy, ix);
  out.gamma = g(ix, ix);
  const auto py1 = positions(y.projection1());
  out.ay = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(iy.size()), static_cast<Eigen::Index>(iy.size()));
  for (std::size_t i = 0; i < iy.size(); ++i)
    for (std::size_t j = 0; j < iy.size(); ++j) {
      const auto p = y.node(static_cast<std::size_t>(iy[i])), q = y.node(static_cast<std::size_t>(iy[j]));
      if (p.n0 == q.n0)
        out.ay(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ayy(py1.at(p.n1), py1.at(q.n1));
    }
  return out;
}

// Direct solve of the Schur system built from the dense operators with exact
// block inverses, on the interior trial slots.
inline Eigen::VectorXd dense_schur_solution(heat::MotherTrees& trees, const heat::Discretization& d) {
  const auto dense = dense_system(trees, d);
  const Eigen::MatrixXd s = dense.b.transpose() * dense.ay.llt().solve(dense.b) + dense.gamma;
  const auto ix = interior(d.x());
  Eigen::VectorXd f(static_cast<Eigen::Index>(ix.size()));
  for (std::size_t i = 0; i < ix.size(); ++i)
    f[static_cast<Eigen::Index>(i)] = d.rhs()[static_cast<std::size_t>(ix[i])];
  return s.llt().solve(f);
}

}  // namespace stheat::testutil
