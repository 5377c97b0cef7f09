#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <chrono>
#include <random>

#include "stheat/time_matvec.hpp"
#include "stheat/tree.hpp"
#include "time_oracle.hpp"

using namespace stheat;
using namespace stheat::matvec;
using wavelets::Family;
using wavelets::TimeIndex;

namespace {

trees::TimeShape shape_of(Family f) {
  return f == Family::Orthonormal ? trees::TimeShape::Pair : trees::TimeShape::Binary;
}

std::vector<TimeIndex> random_index_tree(Family family, std::mt19937& rng, int max_level) {
  trees::TimeMotherTree mother(shape_of(family));
  trees::Tree t = trees::roots_tree(mother);
  std::uniform_real_distribution<double> pd(0.3, 0.95);
  const double p = pd(rng);
  std::bernoulli_distribution coin(p);
  trees::deep_refine(t, [&](int id) { return mother.level(id) <= max_level && coin(rng); },
                     max_level + 1);
  std::vector<TimeIndex> out;
  for (int n : t.nodes) out.push_back(mother.index(n));
  return out;
}

Eigen::MatrixXd dense(const TimeOperator& op, const std::vector<TimeIndex>& in,
                      const std::vector<TimeIndex>& out) {
  return testutil::dense_time(op, in, out);
}

Eigen::MatrixXd part_of(const Eigen::MatrixXd& full, Part part, const std::vector<TimeIndex>& in,
                        const std::vector<TimeIndex>& out) {
  Eigen::MatrixXd m = full;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const int lo = out[static_cast<std::size_t>(i)].level, li = in[static_cast<std::size_t>(j)].level;
      const bool upper = lo <= li;
      if ((part == Part::Upper && !upper) || (part == Part::Lower && upper)) m(i, j) = 0.0;
    }
  return m;
}

Eigen::VectorXd run(const TimeOperator& op, Part part, const std::vector<TimeIndex>& in,
                    const Eigen::VectorXd& c, const std::vector<TimeIndex>& out) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(out.size()));
  apply(op, part, in, {c.data(), static_cast<std::size_t>(c.size())}, out,
        {r.data(), static_cast<std::size_t>(r.size())});
  return r;
}

double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

struct Case {
  TimeForm form;
  Family trial, test;
};

class RandomTreeOracle : public ::testing::TestWithParam<Case> {};

}  // namespace

TEST(SingleScale, LevelOneHatMass) {
  const std::vector<std::int64_t> pos{0, 1, 2};
  const std::vector<double> d{1.0, 0.0, 0.0};
  const auto e = apply_single_scale({TimeForm::Mass, Family::ThreePoint, Family::ThreePoint}, 1,
                                    pos, d, pos);
  ASSERT_EQ(e.size(), 3u);
  // h/6 * [2, 1] with h = 1/2.
  EXPECT_NEAR(e[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(e[1], 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(e[2], 0.0, 1e-15);
}

TEST(ConstructPib, RootsMeetFirstWavelet) {
  const std::vector<std::int64_t> scal{0, 1}, wav{0};
  const auto b = construct_pib(Family::ThreePoint, Family::ThreePoint, 1, scal, wav);
  EXPECT_EQ(b, (std::vector<bool>{true, true}));
}

TEST(ConstructPib, DisjointSupportIsExcluded) {
  // Level-2 hats at 0 and 4 against the orthonormal level-3 wavelet at pos 0
  // (support [0,1/4]): only the hat centred at 0 meets it.
  const std::vector<std::int64_t> scal{0, 4}, wav{0};
  const auto b = construct_pib(Family::ThreePoint, Family::Orthonormal, 3, scal, wav);
  EXPECT_EQ(b, (std::vector<bool>{true, false}));
}

TEST(Adjoint, SwapsFamiliesAndForm) {
  const TimeOperator op{TimeForm::Derivative, Family::ThreePoint, Family::Orthonormal};
  const TimeOperator adj = adjoint(op);
  EXPECT_EQ(adj.form, TimeForm::DerivativeTransposed);
  EXPECT_EQ(adj.trial, Family::Orthonormal);
  EXPECT_EQ(adj.test, Family::ThreePoint);
}

TEST_P(RandomTreeOracle, MatchesDenseForFiftyPairs) {
  const Case cs = GetParam();
  const TimeOperator op{cs.form, cs.trial, cs.test};
  std::mt19937 rng(1234 + static_cast<int>(cs.form) * 31 + static_cast<int>(cs.test) * 7 +
                   static_cast<int>(cs.trial));
  std::normal_distribution<double> gauss;
  const auto t0 = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_index_tree(cs.trial, rng, 2 + trial % 6);
    const auto out = random_index_tree(cs.test, rng, 2 + (trial * 7) % 6);
    Eigen::VectorXd c(static_cast<Eigen::Index>(in.size()));
    for (auto& v : c) v = gauss(rng);
    const Eigen::MatrixXd a = dense(op, in, out);
    const Eigen::VectorXd full = run(op, Part::Full, in, c, out);
    const Eigen::VectorXd upper = run(op, Part::Upper, in, c, out);
    const Eigen::VectorXd lower = run(op, Part::Lower, in, c, out);
    const Eigen::VectorXd want = a * c;
    EXPECT_LE(rel_err(full, want), 1e-12) << "trial " << trial;
    const Eigen::VectorXd want_u = part_of(a, Part::Upper, in, out) * c;
    const Eigen::VectorXd want_l = part_of(a, Part::Lower, in, out) * c;
    const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
    EXPECT_LE((upper - want_u).cwiseAbs().maxCoeff() / scale, 1e-12) << "trial " << trial;
    EXPECT_LE((lower - want_l).cwiseAbs().maxCoeff() / scale, 1e-12) << "trial " << trial;
    EXPECT_LE((upper + lower - full).cwiseAbs().maxCoeff() / scale, 1e-12) << "trial " << trial;

    // The adjoint operator realises the transposed matrix.
    Eigen::VectorXd y(static_cast<Eigen::Index>(out.size()));
    for (auto& v : y) v = gauss(rng);
    const Eigen::VectorXd back = run(adjoint(op), Part::Full, out, y, in);
    EXPECT_LE(rel_err(back, a.transpose() * y), 1e-12) << "trial " << trial;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 60.0);
}

INSTANTIATE_TEST_SUITE_P(
    Forms, RandomTreeOracle,
    ::testing::Values(Case{TimeForm::Mass, Family::ThreePoint, Family::ThreePoint},
                      Case{TimeForm::Mass, Family::ThreePoint, Family::Orthonormal},
                      Case{TimeForm::Mass, Family::Orthonormal, Family::ThreePoint},
                      Case{TimeForm::Mass, Family::HierarchicalHat, Family::Orthonormal},
                      Case{TimeForm::Derivative, Family::ThreePoint, Family::Orthonormal},
                      Case{TimeForm::Derivative, Family::ThreePoint, Family::ThreePoint},
                      Case{TimeForm::DerivativeTransposed, Family::Orthonormal, Family::ThreePoint},
                      Case{TimeForm::Trace, Family::ThreePoint, Family::ThreePoint},
                      Case{TimeForm::Trace, Family::Orthonormal, Family::HierarchicalHat}));

TEST(GradedTrees, DeepLocalRefinementMatchesDense) {
  std::mt19937 rng(99);
  std::normal_distribution<double> gauss;
  for (Family trial : {Family::ThreePoint, Family::Orthonormal}) {
    for (Family test : {Family::ThreePoint, Family::Orthonormal}) {
      for (TimeForm form : {TimeForm::Mass, TimeForm::Derivative, TimeForm::Trace}) {
        const TimeOperator op{form, trial, test};
        auto graded = [&](Family f, double focus, int depth) {
          trees::TimeMotherTree mother(shape_of(f));
          trees::Tree t = trees::roots_tree(mother);
          trees::deep_refine(t, [&](int id) {
            const auto s = wavelets::wavelet_support(f, mother.index(id));
            return mother.level(id) <= depth && s.lo() <= focus && focus <= s.hi();
          }, depth + 1);
          std::vector<TimeIndex> out;
          for (int n : t.nodes) out.push_back(mother.index(n));
          return out;
        };
        const auto in = graded(trial, 0.0, 13);
        const auto out = graded(test, 0.3, 11);
        Eigen::VectorXd c(static_cast<Eigen::Index>(in.size()));
        for (auto& v : c) v = gauss(rng);
        const Eigen::VectorXd want = dense(op, in, out) * c;
        EXPECT_LE(rel_err(run(op, Part::Full, in, c, out), want), 1e-12);
      }
    }
  }
}
