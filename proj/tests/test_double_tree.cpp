#include <gtest/gtest.h>

#include <set>

#include "dtree_test_util.hpp"
#include "stheat/op_counter.hpp"
#include "stheat/tensor_apply.hpp"
#include "time_oracle.hpp"

using namespace stheat;
using dtree::DoubleTree;
using dtree::NodePair;
using matvec::TimeForm;
using matvec::TimeOperator;
using trees::TimeMotherTree;
using trees::TimeShape;
using wavelets::Family;
using wavelets::TimeIndex;

namespace {

std::vector<TimeIndex> time_indices(const TimeMotherTree& m, std::span<const int> ids) {
  std::vector<TimeIndex> out;
  for (int id : ids) out.push_back(m.index(id));
  return out;
}

std::set<std::pair<int, int>> as_set(const DoubleTree& t) {
  std::set<std::pair<int, int>> s;
  for (const auto& p : t.nodes()) s.insert({p.n0, p.n1});
  return s;
}

Eigen::VectorXd random_vector(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = u(rng);
  return v;
}

Eigen::VectorXd run(const dtree::TensorPlan& plan, const TimeOperator& op0,
                    const dtree::FiberOperator& op1, const DoubleTree& in,
                    const Eigen::VectorXd& c, const DoubleTree& out) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out.size()));
  dtree::apply_tensor(plan, op0, op1, in, {c.data(), in.size()}, out, {r.data(), out.size()});
  return r;
}

// A small incomplete double-tree over the three-point tree.
struct SampleDoubleTree {
  TimeMotherTree m0{TimeShape::Binary};
  TimeMotherTree m1{TimeShape::Binary};
  DoubleTree tree;
  SampleDoubleTree() {
    const std::vector<TimeIndex> xs{{0, 0}, {0, 1}, {1, 0}, {2, 1}, {3, 3}};
    const std::vector<TimeIndex> ys{{0, 0}, {0, 1}, {1, 0}, {2, 0}};
    std::vector<NodePair> pairs;
    for (const auto& x : xs)
      for (const auto& y : ys)
        if (!(x == TimeIndex{3, 3} && y == TimeIndex{2, 0})) pairs.push_back({m0.node(x), m1.node(y)});
    tree = DoubleTree::from_pairs(m0, m1, pairs);
  }
};

}  // namespace

TEST(DoubleTree, RootsOnlyProjectionsAreRootSets) {
  TimeMotherTree m0(TimeShape::Binary);
  auto sq = space::VertexMotherTree::unit_square();
  const auto t = DoubleTree::root_pairs(m0, sq);
  EXPECT_EQ(t.size(), 2u * 5u);
  EXPECT_TRUE(t.is_double_tree());
  auto r0 = std::vector<int>(m0.roots().begin(), m0.roots().end());
  auto r1 = std::vector<int>(sq.roots().begin(), sq.roots().end());
  trees::normalize(m0, r0);
  trees::normalize(sq, r1);
  EXPECT_EQ(t.project(0).nodes, r0);
  EXPECT_EQ(t.project(1).nodes, r1);
  for (int a : r0) EXPECT_EQ(t.fiber(1, a).nodes, r1);
  for (int b : r1) EXPECT_EQ(t.fiber(0, b).nodes, r0);
}

TEST(DoubleTree, SampleProjectionAndFiber) {
  SampleDoubleTree f;
  EXPECT_TRUE(f.tree.is_double_tree());
  EXPECT_EQ(time_indices(f.m0, f.tree.projection0()),
            (std::vector<TimeIndex>{{0, 0}, {0, 1}, {1, 0}, {2, 1}, {3, 3}}));
  EXPECT_EQ(time_indices(f.m1, f.tree.projection1()),
            (std::vector<TimeIndex>{{0, 0}, {0, 1}, {1, 0}, {2, 0}}));
  const auto brown = f.tree.fiber(0, f.m1.node({2, 0}));
  EXPECT_EQ(time_indices(f.m0, brown.nodes),
            (std::vector<TimeIndex>{{0, 0}, {0, 1}, {1, 0}, {2, 1}}));
  EXPECT_TRUE(f.tree.fiber(0, f.m1.node({3, 0})).empty());
}

TEST(DoubleTree, FindAndUnsortedInputRejected) {
  SampleDoubleTree f;
  EXPECT_GE(f.tree.find(f.m0.node({3, 3}), f.m1.node({1, 0})), 0);
  EXPECT_EQ(f.tree.find(f.m0.node({3, 3}), f.m1.node({2, 0})), -1);
  std::vector<NodePair> bad{f.tree.node(1), f.tree.node(0)};
  EXPECT_THROW(DoubleTree(f.m0, f.m1, bad), std::invalid_argument);
}

TEST(DoubleTree, ClosureIsSmallestDoubleTree) {
  TimeMotherTree m0(TimeShape::Binary), m1(TimeShape::Binary);
  const auto t = dtree::close_double_tree(m0, m1, {{m0.node({2, 1}), m1.node({1, 0})}});
  EXPECT_TRUE(t.is_double_tree());
  // (2,1) -> (1,0) -> both roots; times (1,0) -> both roots: 4 x 3 pairs.
  EXPECT_EQ(t.size(), 12u);
}

TEST(DoubleTree, RandomTreesAreValidAndFibersConsistent) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    TimeMotherTree m0(TimeShape::Binary);
    auto sq = space::VertexMotherTree::unit_square();
    const auto t = testutil::random_double_tree(m0, sq, rng, 150, 5, 6);
    ASSERT_TRUE(t.is_double_tree());
    std::size_t total = 0;
    for (std::size_t k = 0; k < t.projection1().size(); ++k) {
      const auto slots = t.fiber0_slots(k);
      total += slots.size();
      for (std::size_t i = 0; i < slots.size(); ++i) {
        EXPECT_EQ(t.node(static_cast<std::size_t>(slots[i])).n1, t.projection1()[k]);
        if (i > 0)
          EXPECT_LT(m0.key(t.node(static_cast<std::size_t>(slots[i - 1])).n0),
                    m0.key(t.node(static_cast<std::size_t>(slots[i])).n0));
      }
      EXPECT_TRUE(trees::is_tree(m0, t.fiber(0, t.projection1()[k]).nodes));
    }
    EXPECT_EQ(total, t.size());
    for (std::size_t k = 0; k < t.projection0().size(); ++k) {
      const auto ids = t.fiber1_ids(k);
      EXPECT_TRUE(trees::is_tree(sq, std::vector<int>(ids.begin(), ids.end())));
    }
  }
}

TEST(DoubleTree, UnionContainsBoth) {
  std::mt19937 rng(5);
  TimeMotherTree m0(TimeShape::Binary), m1(TimeShape::Pair);
  const auto a = testutil::random_double_tree(m0, m1, rng, 40, 4, 4);
  const auto b = testutil::random_double_tree(m0, m1, rng, 40, 4, 4);
  const auto u = dtree::union_of(a, b);
  auto want = as_set(a);
  for (const auto& p : as_set(b)) want.insert(p);
  EXPECT_EQ(as_set(u), want);
  EXPECT_TRUE(u.is_double_tree());
}

// Unary mother trees; pairs given as (level0, level1).
TEST(RefineFromMarked, UnaryInstance) {
  TimeMotherTree m0(TimeShape::Unary), m1(TimeShape::Unary);
  auto make = [&](std::vector<std::pair<int, int>> xy) {
    std::vector<NodePair> p;
    for (auto [x, y] : xy) p.push_back({m0.node({x, 0}), m1.node({y, 0})});
    return DoubleTree::from_pairs(m0, m1, p);
  };
  const std::vector<std::pair<int, int>> base{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 0},
                                              {3, 0}, {2, 1}, {0, 2}, {1, 2}};
  auto enlarged = base;
  for (auto p : std::vector<std::pair<int, int>>{{0, 3}, {1, 3}, {2, 2}, {3, 2}, {3, 1}, {4, 1}, {4, 0}, {5, 0}})
    enlarged.push_back(p);
  const auto delta = make(base);
  const auto under = make(enlarged);
  ASSERT_TRUE(delta.is_double_tree());
  ASSERT_TRUE(under.is_double_tree());
  std::vector<std::size_t> marked{static_cast<std::size_t>(under.find(m0.node({3, 0}), m1.node({2, 0}))),
                                  static_cast<std::size_t>(under.find(m0.node({5, 0}), m1.node({0, 0})))};
  const auto refined = dtree::refine_from_marked(delta, under, marked);
  auto want = base;
  for (auto p : std::vector<std::pair<int, int>>{{2, 2}, {3, 1}, {3, 2}, {4, 0}, {5, 0}}) want.push_back(p);
  EXPECT_EQ(as_set(refined), as_set(make(want)));
  EXPECT_TRUE(refined.is_double_tree());
}

TEST(RefineFromMarked, EmptyAndFullMarking) {
  std::mt19937 rng(3);
  TimeMotherTree m0(TimeShape::Binary);
  auto sq = space::VertexMotherTree::unit_square();
  const auto small = testutil::random_double_tree(m0, sq, rng, 30, 3, 4);
  const auto big = dtree::union_of(small, testutil::random_double_tree(m0, sq, rng, 80, 4, 5));
  EXPECT_EQ(as_set(dtree::refine_from_marked(small, big, {})), as_set(small));
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < big.size(); ++i)
    if (!small.contains(big.node(i).n0, big.node(i).n1)) all.push_back(i);
  EXPECT_EQ(as_set(dtree::refine_from_marked(small, big, all)), as_set(big));
  EXPECT_THROW(dtree::refine_from_marked(big, small, {}), std::invalid_argument);
}

TEST(RefineFromMarked, VisitsEachNodeAtMostTwice) {
  std::mt19937 rng(8);
  TimeMotherTree m0(TimeShape::Binary);
  auto sq = space::VertexMotherTree::unit_square();
  const auto small = testutil::random_double_tree(m0, sq, rng, 100, 4, 5);
  const auto big = dtree::union_of(small, testutil::random_double_tree(m0, sq, rng, 400, 6, 7));
  std::vector<std::size_t> marked;
  for (std::size_t i = 0; i < big.size(); ++i) marked.push_back(i);
  reset_op_count();
  const auto r = dtree::refine_from_marked(small, big, marked);
  const auto total = op_count();
  reset_op_count();
  DoubleTree copy(m0, sq, std::vector<NodePair>(r.nodes().begin(), r.nodes().end()));
  EXPECT_LE(total - op_count(), 2 * big.size());
  EXPECT_EQ(r.size(), big.size());
}

TEST(Gradedness, Examples) {
  TimeMotherTree m0(TimeShape::Binary);
  auto sq = space::VertexMotherTree::unit_square();
  EXPECT_EQ(dtree::gradedness(DoubleTree::root_pairs(m0, sq), Family::ThreePoint), 0);

  // Full tensor of uniform trees.
  std::vector<NodePair> full;
  for (int l = 0; l <= 3; ++l)
    for (std::int64_t n = 0; n < wavelets::num_wavelets(Family::ThreePoint, l); ++n)
      for (int v : space::uniform_vertices(sq, 3)) full.push_back({m0.node({l, n}), v});
  EXPECT_EQ(dtree::gradedness(DoubleTree::from_pairs(m0, sq, full), Family::ThreePoint), 0);

  // (3,1) overlaps both level-2 wavelets but its tree parent is (2,0) only.
  int nu = -1;
  for (int v : space::uniform_vertices(sq, 1))
    if (sq.gen(v) == 1) nu = v;
  ASSERT_GE(nu, 0);
  auto pairs = std::vector<NodePair>{{m0.node({3, 1}), nu}};
  const auto lone = dtree::close_double_tree(m0, sq, pairs);
  ASSERT_FALSE(lone.contains(m0.node({2, 1}), nu));
  // Missing (2,1) at nu and at its parent: only distance 2 is vacuous.
  EXPECT_EQ(dtree::gradedness(lone, Family::ThreePoint), 2);
  for (int r : sq.roots()) pairs.push_back({m0.node({2, 1}), r});
  EXPECT_EQ(dtree::gradedness(dtree::close_double_tree(m0, sq, pairs), Family::ThreePoint), 1);
}

// Brute-force evaluation of the set definitions of Sigma and Theta.
TEST(SigmaTheta, MatchSetDefinitions) {
  std::mt19937 rng(21);
  double worst_sigma = 0.0, worst_theta = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    TimeMotherTree trial_tree(TimeShape::Binary), test_tree(TimeShape::Pair);
    auto sq = space::VertexMotherTree::unit_square();
    const auto in = testutil::random_double_tree(trial_tree, sq, rng, 120, 5, 5);
    const auto out = testutil::random_double_tree(test_tree, sq, rng, 120, 5, 5);
    const auto sigma = dtree::generate_sigma(out, in, Family::Orthonormal, Family::ThreePoint);
    const auto theta = dtree::generate_theta(out, in, Family::Orthonormal, Family::ThreePoint);
    std::set<std::pair<int, int>> want_sigma, want_theta;
    for (int lam : in.projection0()) {
      const auto li = trial_tree.index(lam);
      const auto ls = wavelets::wavelet_support(Family::ThreePoint, li);
      for (const auto& p : out.nodes()) {
        const auto mi = test_tree.index(p.n0);
        if (mi.level == li.level + 1 && wavelets::wavelet_support(Family::Orthonormal, mi).overlaps(ls))
          want_sigma.insert({lam, p.n1});
      }
    }
    for (const auto& p : in.nodes()) {
      const auto gi = trial_tree.index(p.n0);
      const auto gs = wavelets::wavelet_support(Family::ThreePoint, gi);
      for (int mu : out.projection0()) {
        const auto mi = test_tree.index(mu);
        if (mi.level == gi.level && wavelets::wavelet_support(Family::Orthonormal, mi).overlaps(gs))
          want_theta.insert({mu, p.n1});
      }
    }
    EXPECT_EQ(as_set(sigma), want_sigma);
    EXPECT_EQ(as_set(theta), want_theta);
    EXPECT_TRUE(sigma.is_double_tree());
    EXPECT_TRUE(theta.is_double_tree());
    worst_sigma = std::max(worst_sigma, static_cast<double>(sigma.size()) / static_cast<double>(out.size()));
    worst_theta = std::max(worst_theta, static_cast<double>(theta.size()) / static_cast<double>(in.size()));
  }
  RecordProperty("max_sigma_ratio", std::to_string(worst_sigma));
  RecordProperty("max_theta_ratio", std::to_string(worst_theta));
  EXPECT_LE(worst_sigma, 10.0);
  EXPECT_LE(worst_theta, 10.0);
}

TEST(SigmaTheta, RootPairsOnly) {
  TimeMotherTree m0(TimeShape::Binary);
  TimeMotherTree m1(TimeShape::Binary);
  const auto t = DoubleTree::root_pairs(m0, m1);
  EXPECT_TRUE(dtree::generate_sigma(t, t, Family::ThreePoint, Family::ThreePoint).empty());
  EXPECT_EQ(as_set(dtree::generate_theta(t, t, Family::ThreePoint, Family::ThreePoint)), as_set(t));
}

TEST(SigmaTheta, UniformLevelTwoSizeBound) {
  TimeMotherTree m0(TimeShape::Binary), m1(TimeShape::Pair), sp(TimeShape::Binary);
  std::vector<NodePair> a, b;
  for (int l = 0; l <= 2; ++l) {
    for (std::int64_t n = 0; n < wavelets::num_wavelets(Family::ThreePoint, l); ++n)
      for (int k = 0; k <= 2; ++k)
        for (std::int64_t q = 0; q < wavelets::num_wavelets(Family::ThreePoint, k); ++q)
          a.push_back({m0.node({l, n}), sp.node({k, q})});
    for (std::int64_t n = 0; n < wavelets::num_wavelets(Family::Orthonormal, l); ++n)
      for (int k = 0; k <= 2; ++k)
        for (std::int64_t q = 0; q < wavelets::num_wavelets(Family::ThreePoint, k); ++q)
          b.push_back({m1.node({l, n}), sp.node({k, q})});
  }
  const auto in = DoubleTree::from_pairs(m0, sp, a);
  const auto out = DoubleTree::from_pairs(m1, sp, b);
  const auto sigma = dtree::generate_sigma(out, in, Family::Orthonormal, Family::ThreePoint);
  EXPECT_LE(sigma.size(), 3 * out.size());
}

TEST(ApplyTensor, ZeroInputGivesZero) {
  std::mt19937 rng(2);
  TimeMotherTree m0(TimeShape::Binary);
  auto sq = space::VertexMotherTree::unit_square();
  const auto t = testutil::random_double_tree(m0, sq, rng, 60, 4, 4);
  const TimeOperator op{TimeForm::Mass, Family::ThreePoint, Family::ThreePoint};
  const auto plan = dtree::make_plan(t, t, op.test, op.trial);
  const dtree::SpaceFiberOperator a1(sq, space::kStiffness);
  const Eigen::VectorXd r = run(plan, op, a1, t, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(t.size())), t);
  EXPECT_EQ(r.cwiseAbs().maxCoeff(), 0.0);
}

struct TimeTimeCase {
  TimeForm form;
  Family trial;
  Family test;
  const char* name;
};

class ApplyTensorTimeTime : public ::testing::TestWithParam<TimeTimeCase> {};

TEST_P(ApplyTensorTimeTime, MatchesDenseKronecker) {
  const auto c = GetParam();
  std::mt19937 rng(100 + static_cast<int>(c.form));
  auto shape = [](Family f) { return f == Family::Orthonormal ? TimeShape::Pair : TimeShape::Binary; };
  for (int trial = 0; trial < 20; ++trial) {
    TimeMotherTree in0(shape(c.trial)), out0(shape(c.test)), ax1(TimeShape::Binary);
    const auto in = testutil::random_double_tree(in0, ax1, rng, 90, 3, 3);
    const auto out = testutil::random_double_tree(out0, ax1, rng, 90, 3, 3);
    const TimeOperator op0{c.form, c.trial, c.test};
    const TimeOperator op1{TimeForm::Mass, Family::ThreePoint, Family::ThreePoint};
    const dtree::TimeFiberOperator a1(op1, ax1, ax1);
    const auto plan = dtree::make_plan(out, in, c.test, c.trial);
    const Eigen::VectorXd x = random_vector(in.size(), rng);
    const auto a0d = testutil::dense_time(op0, time_indices(in0, in.projection0()),
                                         time_indices(out0, out.projection0()));
    const auto a1d = testutil::dense_time(op1, time_indices(ax1, in.projection1()),
                                         time_indices(ax1, out.projection1()));
    const auto want = testutil::dense_tensor(in, x, out, a0d, a1d);
    EXPECT_LT(testutil::rel_max_err(run(plan, op0, a1, in, x, out), want), 1e-12) << "trial " << trial;
  }
}

INSTANTIATE_TEST_SUITE_P(
    Forms, ApplyTensorTimeTime,
    ::testing::Values(TimeTimeCase{TimeForm::Mass, Family::ThreePoint, Family::Orthonormal, "MassToOrtho"},
                      TimeTimeCase{TimeForm::Derivative, Family::ThreePoint, Family::Orthonormal, "DerivToOrtho"},
                      TimeTimeCase{TimeForm::Mass, Family::ThreePoint, Family::ThreePoint, "MassSame"},
                      TimeTimeCase{TimeForm::DerivativeTransposed, Family::Orthonormal, Family::ThreePoint,
                                   "DerivTransposedFromOrtho"},
                      TimeTimeCase{TimeForm::Trace, Family::ThreePoint, Family::ThreePoint, "Trace"}),
    [](const auto& info) { return std::string(info.param.name); });

struct TimeSpaceCase {
  TimeForm form;
  Family trial;
  Family test;
  space::SpaceForm space_form;
  const char* name;
};

class ApplyTensorTimeSpace : public ::testing::TestWithParam<TimeSpaceCase> {};

TEST_P(ApplyTensorTimeSpace, MatchesDenseOracle) {
  const auto c = GetParam();
  std::mt19937 rng(7);
  auto shape = [](Family f) { return f == Family::Orthonormal ? TimeShape::Pair : TimeShape::Binary; };
  for (int trial = 0; trial < 20; ++trial) {
    TimeMotherTree in0(shape(c.trial)), out0(shape(c.test));
    auto mesh = trial % 2 == 0 ? space::VertexMotherTree::unit_square()
                               : space::VertexMotherTree::l_shape();
    const auto in = testutil::random_double_tree(in0, mesh, rng, 110, 4, 5);
    const auto out = testutil::random_double_tree(out0, mesh, rng, 110, 4, 5);
    const TimeOperator op0{c.form, c.trial, c.test};
    const dtree::SpaceFiberOperator a1(mesh, c.space_form);
    const auto plan = dtree::make_plan(out, in, c.test, c.trial);
    const Eigen::VectorXd x = random_vector(in.size(), rng);
    const auto p1in = in.project(1).nodes, p1out = out.project(1).nodes;
    const auto want = testutil::dense_tensor(
        in, x, out,
        testutil::dense_time(op0, time_indices(in0, in.projection0()), time_indices(out0, out.projection0())),
        testutil::dense_space(mesh, c.space_form, p1in, p1out));
    EXPECT_LT(testutil::rel_max_err(run(plan, op0, a1, in, x, out), want), 1e-12) << "trial " << trial;
  }
}

INSTANTIATE_TEST_SUITE_P(
    Forms, ApplyTensorTimeSpace,
    ::testing::Values(
        TimeSpaceCase{TimeForm::Mass, Family::ThreePoint, Family::Orthonormal, space::kMass, "MtMx"},
        TimeSpaceCase{TimeForm::Derivative, Family::ThreePoint, Family::Orthonormal, space::kMass, "DtMx"},
        TimeSpaceCase{TimeForm::Trace, Family::ThreePoint, Family::ThreePoint, space::kMass, "GtMx"},
        TimeSpaceCase{TimeForm::Mass, Family::ThreePoint, Family::Orthonormal, space::kStiffness, "MtAx"}),
    [](const auto& info) { return std::string(info.param.name); });
