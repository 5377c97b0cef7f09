#pragma once

#include <Eigen/Dense>
#include <map>
#include <random>
#include <vector>

#include "stheat/double_tree.hpp"
#include "stheat/fem.hpp"
#include "stheat/tree.hpp"

namespace stheat::testutil {

// Random double-tree: repeatedly add a child (along a random axis) of a
// random pair, then close under parents.
inline dtree::DoubleTree random_double_tree(trees::MotherTree& m0, trees::MotherTree& m1,
                                            std::mt19937& rng, int additions, int max0, int max1) {
  std::vector<dtree::NodePair> pairs;
  for (int a : m0.roots())
    for (int b : m1.roots()) pairs.push_back({a, b});
  std::bernoulli_distribution axis(0.5);
  for (int k = 0; k < additions; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
    const auto p = pairs[pick(rng)];
    const bool first = axis(rng);
    trees::MotherTree& m = first ? m0 : m1;
    const int id = first ? p.n0 : p.n1;
    if (m.level(id) >= (first ? max0 : max1)) continue;
    const auto kids = m.children(id);
    if (kids.empty()) continue;
    std::uniform_int_distribution<std::size_t> pk(0, kids.size() - 1);
    const int c = kids[pk(rng)];
    pairs.push_back(first ? dtree::NodePair{c, p.n1} : dtree::NodePair{p.n0, c});
  }
  return dtree::close_double_tree(m0, m1, std::move(pairs));
}

// Dense hierarchical-basis Galerkin matrix between vertex lists, computed
// on the triangulation of the closure of both.
inline Eigen::MatrixXd dense_space(space::VertexMotherTree& mother, space::SpaceForm form,
                                   const std::vector<int>& in, const std::vector<int>& out) {
  std::vector<int> all = in;
  all.insert(all.end(), out.begin(), out.end());
  all = space::nvb_closure(mother, all);
  const auto tri = space::triangulate(mother, all);
  std::map<int, std::size_t> local;
  for (std::size_t i = 0; i < tri.vertices.size(); ++i) local[tri.vertices[i]] = i;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(out.size()), static_cast<Eigen::Index>(in.size()));
  std::vector<double> x(all.size()), y(all.size());
  for (std::size_t j = 0; j < in.size(); ++j) {
    std::fill(x.begin(), x.end(), 0.0);
    x[local.at(in[j])] = 1.0;
    space::apply_hb(tri, form, x, y);
    for (std::size_t i = 0; i < out.size(); ++i)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = y[local.at(out[i])];
  }
  return m;
}

// Position of every id of a key-sorted list.
inline std::map<int, Eigen::Index> positions(std::span<const int> ids) {
  std::map<int, Eigen::Index> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = static_cast<Eigen::Index>(i);
  return out;
}

// out_i = sum_j A0(out_i, in_j) A1(out_i, in_j) c_j with the 1D matrices
// indexed by the projections of the two double-trees.
inline Eigen::VectorXd dense_tensor(const dtree::DoubleTree& in, const Eigen::VectorXd& c,
                                    const dtree::DoubleTree& out, const Eigen::MatrixXd& a0,
                                    const Eigen::MatrixXd& a1) {
  const auto in0 = positions(in.projection0()), in1 = positions(in.projection1());
  const auto out0 = positions(out.projection0()), out1 = positions(out.projection1());
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out.size()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto o = out.node(i);
    double s = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      const auto p = in.node(j);
      s += a0(out0.at(o.n0), in0.at(p.n0)) * a1(out1.at(o.n1), in1.at(p.n1)) *
           c(static_cast<Eigen::Index>(j));
    }
    r(static_cast<Eigen::Index>(i)) = s;
  }
  return r;
}

inline double rel_max_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

}  // namespace stheat::testutil
