#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "stheat/heat.hpp"
#include "stheat/op_counter.hpp"

namespace stheat::heat {

using dtree::DoubleTree;
using dtree::NodePair;
using matvec::TimeForm;
using matvec::TimeOperator;
using space::VertexMotherTree;
using trees::TimeMotherTree;

namespace {

TimeMotherTree& time_tree(const DoubleTree& t) { return dynamic_cast<TimeMotherTree&>(t.mother(0)); }
VertexMotherTree& space_tree(const DoubleTree& t) {
  return dynamic_cast<VertexMotherTree&>(t.mother(1));
}

std::vector<int> with_roots(VertexMotherTree& mother, std::span<const int> ids) {
  std::vector<int> roots(mother.roots().begin(), mother.roots().end());
  trees::normalize(mother, roots);
  return trees::merge_sorted(mother, roots, ids);
}

// Local triangulation index of every entry of the sorted subset `ids`.
std::vector<std::size_t> locate(std::span<const int> verts, std::span<const int> ids) {
  std::vector<std::size_t> out(ids.size());
  for (std::size_t i = 0, j = 0; i < ids.size(); ++i) {
    while (verts[j] != ids[i]) ++j;
    out[i] = j;
  }
  return out;
}

std::vector<int> copy(std::span<const int> s) { return {s.begin(), s.end()}; }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  count_ops(a.size());
  return s;
}

}  // namespace

DoubleTree enlarge(const DoubleTree& x) {
  auto& m0 = x.mother(0);
  auto& m1 = x.mother(1);
  std::vector<NodePair> pairs(x.nodes().begin(), x.nodes().end());
  for (const auto& p : x.nodes()) {
    // Creating children may reallocate the child storage, so copy first.
    for (int c : copy(m0.children(p.n0))) pairs.push_back({c, p.n1});
    for (int c : copy(m1.children(p.n1))) {
      pairs.push_back({p.n0, c});
      for (int cc : copy(m1.children(c))) pairs.push_back({p.n0, cc});
    }
  }
  return dtree::close_double_tree(m0, m1, std::move(pairs));
}

DoubleTree derive_test_set(const DoubleTree& x, TimeMotherTree& test) {
  const auto& trial = time_tree(x);
  std::vector<NodePair> pairs;
  std::vector<int> candidates;
  for (std::size_t k = 0; k < x.projection0().size(); ++k) {
    const auto idx = trial.index(x.projection0()[k]);
    const auto sup = wavelets::wavelet_support(kTrialFamily, idx);
    candidates.clear();
    if (idx.level == 0) {
      candidates = {test.node({0, 0}), test.node({0, 1})};
    } else {
      // Test wavelets of level l come in pairs sharing the support of a
      // dyadic interval of length 2^(1-l).
      const double cells = std::ldexp(1.0, idx.level - 1);
      const auto last = static_cast<std::int64_t>(cells) - 1;
      const auto lo = std::clamp(static_cast<std::int64_t>(std::floor(sup.lo() * cells)) - 1,
                                 std::int64_t{0}, last);
      const auto hi = std::clamp(static_cast<std::int64_t>(std::ceil(sup.hi() * cells)), std::int64_t{0},
                                 last);
      for (auto c = lo; c <= hi; ++c) {
        const wavelets::TimeIndex mu{idx.level, 2 * c};
        if (!wavelets::wavelet_support(kTestFamily, mu).overlaps(sup)) continue;
        candidates.push_back(test.node(mu));
        candidates.push_back(test.node({idx.level, 2 * c + 1}));
      }
    }
    for (int mu : candidates)
      for (int nu : x.fiber1_ids(k)) pairs.push_back({mu, nu});
  }
  return dtree::close_double_tree(test, x.mother(1), std::move(pairs));
}

DoubleTree initial_trial_set(MotherTrees& trees) {
  return enlarge(DoubleTree::root_pairs(trees.trial, trees.space));
}

std::vector<std::uint8_t> interior_mask(const DoubleTree& t) {
  const auto& space = space_tree(t);
  std::vector<std::uint8_t> m(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) m[i] = space.on_boundary(t.node(i).n1) ? 0 : 1;
  return m;
}

std::vector<std::size_t> embed_slots(const DoubleTree& sub, const DoubleTree& super) {
  const auto& m0 = super.mother(0);
  const auto& m1 = super.mother(1);
  auto less = [&](const NodePair& a, const NodePair& b) {
    const auto ka = m0.key(a.n0), kb = m0.key(b.n0);
    return ka != kb ? ka < kb : m1.key(a.n1) < m1.key(b.n1);
  };
  std::vector<std::size_t> out(sub.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < sub.size(); ++i) {
    while (j < super.size() && less(super.node(j), sub.node(i))) ++j;
    if (j == super.size() || !(super.node(j) == sub.node(i)))
      throw std::invalid_argument("not a subset");
    out[i] = j;
  }
  count_ops(sub.size() + super.size());
  return out;
}

Discretization::Discretization(MotherTrees& trees, DoubleTree x, const Problem& problem, int mg_cycles,
                               Preconditioner preconditioner)
    : trees_(&trees),
      mg_cycles_(mg_cycles),
      preconditioner_(preconditioner),
      x_(std::move(x)),
      xbar_(enlarge(x_)),
      y_(derive_test_set(xbar_, trees.test)) {
  x_mask_ = interior_mask(x_);
  xbar_mask_ = interior_mask(xbar_);
  y_mask_ = interior_mask(y_);
  x_in_xbar_ = embed_slots(x_, xbar_);
  plan_y_x_ = dtree::make_plan(y_, x_, kTestFamily, kTrialFamily);
  plan_x_y_ = dtree::make_plan(x_, y_, kTrialFamily, kTestFamily);
  plan_xbar_y_ = dtree::make_plan(xbar_, y_, kTrialFamily, kTestFamily);
  plan_x_x_ = dtree::make_plan(x_, x_, kTrialFamily, kTrialFamily);
  plan_xbar_x_ = dtree::make_plan(xbar_, x_, kTrialFamily, kTrialFamily);
  build_preconditioners();
  build_rhs(problem);
}

std::size_t Discretization::dim(const std::vector<std::uint8_t>& mask) {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

void Discretization::mask(std::span<double> v, const std::vector<std::uint8_t>& m) const {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!m[i]) v[i] = 0.0;
}

void Discretization::apply_b(std::span<const double> v, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  const dtree::SpaceFiberOperator mass(trees_->space, space::kMass);
  const dtree::SpaceFiberOperator stiff(trees_->space, space::kStiffness);
  dtree::apply_tensor(plan_y_x_, {TimeForm::Derivative, kTrialFamily, kTestFamily}, mass, x_, v, y_,
                      y);
  dtree::apply_tensor(plan_y_x_, {TimeForm::Mass, kTrialFamily, kTestFamily}, stiff, x_, v, y_, y);
  mask(y, y_mask_);
}

namespace {

void apply_bt(const dtree::TensorPlan& plan, space::VertexMotherTree& space, const DoubleTree& y,
              std::span<const double> yv, const DoubleTree& out, std::span<double> outv) {
  std::fill(outv.begin(), outv.end(), 0.0);
  const dtree::SpaceFiberOperator mass(space, space::kMass);
  const dtree::SpaceFiberOperator stiff(space, space::kStiffness);
  dtree::apply_tensor(plan, matvec::adjoint({TimeForm::Derivative, kTrialFamily, kTestFamily}), mass,
                      y, yv, out, outv);
  dtree::apply_tensor(plan, matvec::adjoint({TimeForm::Mass, kTrialFamily, kTestFamily}), stiff, y,
                      yv, out, outv);
}

}  // namespace

void Discretization::apply_bt_x(std::span<const double> y, std::span<double> out) const {
  apply_bt(plan_x_y_, trees_->space, y_, y, x_, out);
  mask(out, x_mask_);
}

void Discretization::apply_bt_xbar(std::span<const double> y, std::span<double> out) const {
  apply_bt(plan_xbar_y_, trees_->space, y_, y, xbar_, out);
  mask(out, xbar_mask_);
}

void Discretization::apply_gamma0(std::span<const double> v, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const dtree::SpaceFiberOperator mass(trees_->space, space::kMass);
  dtree::apply_tensor(plan_x_x_, {TimeForm::Trace, kTrialFamily, kTrialFamily}, mass, x_, v, x_, out);
  mask(out, x_mask_);
}

std::shared_ptr<const Discretization::FiberSolver> Discretization::make_solver(
    std::span<const int> ids, space::SpaceForm form, bool with_stiffness) const {
  auto b = std::make_shared<FiberSolver>();
  const auto verts = with_roots(trees_->space, ids);
  b->tri = std::make_unique<space::Triangulation>(space::triangulate(trees_->space, verts));
  b->local = locate(verts, ids);
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (!trees_->space.on_boundary(ids[i])) b->interior.push_back(i);
  if (preconditioner_ == Preconditioner::Multigrid) {
    b->mg = std::make_unique<space::Multigrid>(*b->tri, form);
    return b;
  }
  // Exact inverse of the fiber Galerkin matrix (without the added roots).
  const auto n = static_cast<Eigen::Index>(b->interior.size());
  const std::size_t nv = b->tri->num_vertices();
  auto galerkin = [&](space::SpaceForm f) {
    Eigen::MatrixXd a(n, n);
    std::vector<double> e(nv), col(nv);
    for (Eigen::Index j = 0; j < n; ++j) {
      std::fill(e.begin(), e.end(), 0.0);
      e[b->local[b->interior[static_cast<std::size_t>(j)]]] = 1.0;
      space::apply_hb(*b->tri, f, e, col);
      for (Eigen::Index i = 0; i < n; ++i)
        a(i, j) = col[b->local[b->interior[static_cast<std::size_t>(i)]]];
    }
    return a;
  };
  const Eigen::MatrixXd inv = galerkin(form).llt().solve(Eigen::MatrixXd::Identity(n, n));
  b->dense = with_stiffness ? Eigen::MatrixXd(inv * galerkin(space::kStiffness) * inv) : inv;
  return b;
}

// K_Y blocks (sandwich = false) use the stiffness form on every fiber; K_X
// blocks use A + 2^level M and are applied as K A K.
std::vector<Discretization::SpaceBlock> Discretization::make_blocks(const DoubleTree& t,
                                                                    bool sandwich) const {
  std::vector<SpaceBlock> blocks;
  const auto& time = dynamic_cast<const trees::TimeMotherTree&>(t.mother(0));
  std::map<std::pair<int, std::vector<int>>, std::shared_ptr<const FiberSolver>> seen;
  for (std::size_t k = 0; k < t.projection0().size(); ++k) {
    const auto ids = t.fiber1_ids(k);
    const int level = sandwich ? time.level(t.projection0()[k]) : 0;
    auto& solver = seen[{level, std::vector<int>(ids.begin(), ids.end())}];
    if (!solver)
      solver = make_solver(ids, sandwich ? space::SpaceForm{1.0, std::ldexp(1.0, level)} : space::kStiffness,
                           sandwich);
    blocks.push_back({t.fiber1_begin(k), t.fiber1_end(k), solver});
  }
  return blocks;
}

void Discretization::build_preconditioners() {
  ky_blocks_ = make_blocks(y_, false);
  kx_blocks_ = make_blocks(x_, true);
}

void Discretization::apply_block(const SpaceBlock& block, std::span<double> v, bool sandwich) const {
  const auto fiber = v.subspan(block.begin, block.end - block.begin);
  const FiberSolver& b = *block.solver;
  if (preconditioner_ == Preconditioner::DenseInverse) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(b.interior.size()));
    for (std::size_t i = 0; i < b.interior.size(); ++i) w[static_cast<Eigen::Index>(i)] = fiber[b.interior[i]];
    const Eigen::VectorXd r = b.dense * w;
    std::fill(fiber.begin(), fiber.end(), 0.0);
    for (std::size_t i = 0; i < b.interior.size(); ++i) fiber[b.interior[i]] = r[static_cast<Eigen::Index>(i)];
    count_ops(b.interior.size() * b.interior.size());
    return;
  }
  std::vector<double> l(b.tri->num_vertices(), 0.0);
  for (std::size_t i = 0; i < fiber.size(); ++i) l[b.local[i]] = fiber[i];
  space::precondition_hb(*b.mg, l, mg_cycles_);
  if (sandwich) {
    std::vector<double> tmp(l.size());
    space::apply_hb(*b.tri, space::kStiffness, l, tmp);
    l.swap(tmp);
    space::precondition_hb(*b.mg, l, mg_cycles_);
  }
  for (std::size_t i = 0; i < fiber.size(); ++i) fiber[i] = l[b.local[i]];
  count_ops(l.size());
}

void Discretization::apply_ky(std::span<double> y) const {
  for (const auto& b : ky_blocks_) apply_block(b, y, false);
  mask(y, y_mask_);
}

void Discretization::apply_kx(std::span<double> v) const {
  for (const auto& b : kx_blocks_) apply_block(b, v, true);
  mask(v, x_mask_);
}

void Discretization::apply_schur(std::span<const double> v, std::span<double> out) const {
  std::vector<double> y(y_.size());
  apply_b(v, y);
  apply_ky(y);
  apply_bt_x(y, out);
  std::vector<double> trace(x_.size());
  apply_gamma0(v, trace);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += trace[i];
  count_ops(out.size());
}

void Discretization::build_rhs(const Problem& problem) {
  auto& space = trees_->space;
  const auto& trial = trees_->trial;

  // Interpolant of g in (time hats) x (space hierarchical hats), boundary
  // vertices included.
  std::vector<double> g(xbar_.size());
  for (std::size_t i = 0; i < xbar_.size(); ++i) {
    const auto [n0, n1] = xbar_.node(i);
    const auto p = space.point(n1);
    const auto gps = space.godparents(n1);
    g[i] = wavelets::hat_dual(trial.index(n0), [&](double t) {
      double v = problem.g(t, p.x, p.y);
      for (int q : gps) {
        const auto pq = space.point(q);
        v -= 0.5 * problem.g(t, pq.x, pq.y);
      }
      return v;
    });
  }
  std::vector<double> gy(y_.size(), 0.0);
  {
    const auto plan = dtree::make_plan(y_, xbar_, kTestFamily, kDataFamily);
    const dtree::SpaceFiberOperator mass(space, space::kMass, space::BoundaryInput::Kept);
    dtree::apply_tensor(plan, {TimeForm::Mass, kDataFamily, kTestFamily}, mass, xbar_, g, y_, gy);
    mask(gy, y_mask_);
  }
  std::vector<double> h = gy;
  apply_ky(h);

  // Mass functional of the nodal interpolant of u0 on the space projection.
  const auto p1 = xbar_.projection1();
  const auto tri = space::triangulate(space, p1);
  std::vector<double> nodal(tri.num_vertices()), w(tri.num_vertices());
  for (std::size_t i = 0; i < nodal.size(); ++i) {
    const auto p = space.point(tri.vertices[i]);
    nodal[i] = problem.u0(p.x, p.y);
  }
  space::apply_nodal(tri, space::kMass, nodal, w, space::BoundaryInput::Kept);
  space::nodal_dual_to_hb(tri, w);
  const double u0_sq = space::mass_norm_squared(tri, nodal);

  initial_bound_ = std::sqrt(std::max(dot(gy, h), 0.0) + u0_sq);

  f_xbar_.assign(xbar_.size(), 0.0);
  apply_bt_xbar(h, f_xbar_);
  {
    trees::MotherTree::Lease lease(space);
    for (std::size_t k = 0; k < p1.size(); ++k) space.scratch(p1[k]) = static_cast<int>(k);
    for (std::size_t i = 0; i < xbar_.size(); ++i) {
      if (!xbar_mask_[i]) continue;
      const auto [n0, n1] = xbar_.node(i);
      const double at_zero = wavelets::evaluate(kTrialFamily, trial.index(n0), 0.0);
      if (at_zero != 0.0) f_xbar_[i] += at_zero * w[static_cast<std::size_t>(space.scratch(n1))];
    }
    for (int id : p1) space.scratch(id) = -1;
  }
  f_x_.resize(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) f_x_[i] = f_xbar_[x_in_xbar_[i]];
  mask(f_x_, x_mask_);
}

double estimator_scale(int time_level, int space_gen) {
  return 1.0 / std::sqrt(1.0 + std::ldexp(1.0, 2 * (time_level - space_gen)));
}

EstimatorOutput Discretization::estimate(std::span<const double> v) const {
  std::vector<double> y(y_.size());
  apply_b(v, y);
  apply_ky(y);
  std::vector<double> res(xbar_.size());
  apply_bt_xbar(y, res);
  {
    const dtree::SpaceFiberOperator mass(trees_->space, space::kMass);
    dtree::apply_tensor(plan_xbar_x_, {TimeForm::Trace, kTrialFamily, kTrialFamily}, mass, x_, v,
                        xbar_, res);
  }
  for (std::size_t i = 0; i < res.size(); ++i) res[i] = xbar_mask_[i] ? f_xbar_[i] - res[i] : 0.0;
  count_ops(res.size());

  std::vector<std::uint8_t> in_x(xbar_.size(), 0);
  for (std::size_t s : x_in_xbar_) in_x[s] = 1;

  auto& space = trees_->space;
  const auto& trial = trees_->trial;
  EstimatorOutput out;
  double sum = 0.0;
  for (std::size_t k = 0; k < xbar_.projection0().size(); ++k) {
    const auto ids = xbar_.fiber1_ids(k);
    const auto verts = with_roots(space, ids);
    const auto tri = space::triangulate(space, verts);
    const auto local = locate(verts, ids);
    std::vector<double> l(verts.size(), 0.0);
    const std::size_t begin = xbar_.fiber1_begin(k);
    for (std::size_t i = 0; i < ids.size(); ++i) l[local[i]] = res[begin + i];
    space::hb_dual_to_modified(tri, l);
    const int level = trial.level(xbar_.projection0()[k]);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::size_t s = begin + i;
      if (in_x[s] || !xbar_mask_[s]) continue;
      const double value = estimator_scale(level, space.gen(ids[i])) * l[local[i]];
      out.slots.push_back(s);
      out.values.push_back(value);
      sum += value * value;
    }
    count_ops(verts.size());
  }
  out.norm = std::sqrt(sum);
  return out;
}

PcgResult pcg(const Discretization& d, std::span<double> u, double target, int max_iterations) {
  const std::size_t n = u.size();
  std::vector<double> r(n), z(n), p(n), q(n);
  d.apply_schur(u, q);
  const auto f = d.rhs();
  for (std::size_t i = 0; i < n; ++i) r[i] = f[i] - q[i];
  z = r;
  d.apply_kx(z);
  double rz = dot(r, z);
  p = z;
  PcgResult result;
  while (std::sqrt(std::max(rz, 0.0)) > target && result.iterations < max_iterations) {
    d.apply_schur(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    z = r;
    d.apply_kx(z);
    const double rz_new = dot(r, z);
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + (rz_new / rz) * p[i];
    count_ops(3 * n);
    rz = rz_new;
    ++result.iterations;
  }
  if (!std::isfinite(rz)) throw std::runtime_error("PCG diverged");
  result.beta = std::sqrt(std::max(rz, 0.0));
  return result;
}

}  // namespace stheat::heat
