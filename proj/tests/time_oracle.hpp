#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "stheat/time_matvec.hpp"

namespace stheat::testutil {

// Dense reference (A psi_in[j])(psi_out[i]) by elementwise quadrature on the
// finest common grid.
inline Eigen::MatrixXd dense_time(const matvec::TimeOperator& op,
                                  const std::vector<wavelets::TimeIndex>& in,
                                  const std::vector<wavelets::TimeIndex>& out) {
  int level = 0;
  for (const auto& i : in) level = std::max(level, i.level);
  for (const auto& i : out) level = std::max(level, i.level);
  const std::int64_t n = std::int64_t{1} << level;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out.size()),
                                            static_cast<Eigen::Index>(in.size()));
  for (std::size_t j = 0; j < in.size(); ++j) {
    const auto sj = wavelets::wavelet_support(op.trial, in[j]).at_level(level);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto si = wavelets::wavelet_support(op.test, out[i]).at_level(level);
      const std::int64_t lo = std::max(si.left, sj.left), hi = std::min(si.right, sj.right);
      double s = 0.0;
      for (std::int64_t e = std::max<std::int64_t>(lo, 0); e < std::min(hi, n); ++e)
        s += matvec::element_value(op.form, level, e,
                                   wavelets::wavelet_piece(op.trial, in[j], level, e),
                                   wavelets::wavelet_piece(op.test, out[i], level, e));
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
    }
  }
  return m;
}

}  // namespace stheat::testutil
