#include "stheat/tensor_apply.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "stheat/op_counter.hpp"

namespace stheat::dtree {

using wavelets::Family;
using wavelets::TimeIndex;

namespace {

const trees::TimeMotherTree& time_mother(const DoubleTree& t) {
  const auto* m = dynamic_cast<const trees::TimeMotherTree*>(&t.mother(0));
  if (m == nullptr) throw std::invalid_argument("axis 0 must be a time index tree");
  return *m;
}

// Slices of a key-sorted list of time nodes per level.
struct LevelSlices {
  std::vector<TimeIndex> index;
  std::vector<std::size_t> begin;  // begin[l] .. begin[l+1]

  LevelSlices(const trees::TimeMotherTree& m, std::span<const int> nodes) {
    index.reserve(nodes.size());
    for (int id : nodes) index.push_back(m.index(id));
    const int top = index.empty() ? 0 : index.back().level + 1;
    begin.assign(static_cast<std::size_t>(top) + 2, 0);
    for (const auto& i : index) ++begin[static_cast<std::size_t>(i.level) + 1];
    for (std::size_t l = 1; l < begin.size(); ++l) begin[l] += begin[l - 1];
  }
  int levels() const { return static_cast<int>(begin.size()) - 1; }
  std::size_t lo(int l) const {
    return l < levels() ? begin[static_cast<std::size_t>(l)] : index.size();
  }
  std::size_t hi(int l) const {
    return l < levels() ? begin[static_cast<std::size_t>(l) + 1] : index.size();
  }
};

// For each entry of a[a_lo, a_hi) (one level, sorted), the range of b[b_lo,
// b_hi) (one level, sorted) with overlapping support. Supports are monotone
// in position on a level, so two pointers suffice.
void overlap_ranges(Family fa, std::span<const TimeIndex> a, Family fb,
                    std::span<const TimeIndex> b, std::size_t b_offset,
                    std::span<std::pair<std::size_t, std::size_t>> ranges) {
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto sa = wavelets::wavelet_support(fa, a[i]);
    while (lo < b.size() && wavelets::wavelet_support(fb, b[lo]).hi() <= sa.lo()) ++lo;
    hi = std::max(hi, lo);
    while (hi < b.size() && wavelets::wavelet_support(fb, b[hi]).lo() < sa.hi()) ++hi;
    ranges[i] = {b_offset + lo, b_offset + hi};
  }
  count_ops(a.size() + b.size());
}

}  // namespace

void TimeFiberOperator::apply(std::span<const int> in_ids, std::span<const double> in,
                              std::span<const int> out_ids, std::span<double> out) const {
  std::vector<TimeIndex> a, b;
  a.reserve(in_ids.size());
  b.reserve(out_ids.size());
  for (int id : in_ids) a.push_back(in_mother_->index(id));
  for (int id : out_ids) b.push_back(out_mother_->index(id));
  matvec::apply(op_, matvec::Part::Full, a, in, b, out);
}

void SpaceFiberOperator::apply(std::span<const int> in_ids, std::span<const double> in,
                               std::span<const int> out_ids, std::span<double> out) const {
  std::vector<int> roots(mother_->roots().begin(), mother_->roots().end());
  trees::normalize(*mother_, roots);
  auto verts = trees::merge_sorted(*mother_, trees::merge_sorted(*mother_, roots, in_ids), out_ids);
  const space::Triangulation tri = space::triangulate(*mother_, verts);
  std::vector<double> x(verts.size(), 0.0), y(verts.size());
  for (std::size_t i = 0, j = 0; i < in_ids.size(); ++i) {
    while (verts[j] != in_ids[i]) ++j;
    x[j] = in[i];
  }
  space::apply_hb(tri, form_, x, y, input_);
  for (std::size_t i = 0, j = 0; i < out_ids.size(); ++i) {
    while (verts[j] != out_ids[i]) ++j;
    out[i] = y[j];
  }
  count_ops(in_ids.size() + out_ids.size());
}

DoubleTree generate_sigma(const DoubleTree& out, const DoubleTree& in, Family out_family,
                          Family in_family) {
  const auto& tin = time_mother(in);
  const auto& tout = time_mother(out);
  const LevelSlices p(tin, in.projection0());
  const LevelSlices q(tout, out.projection0());
  std::vector<std::pair<std::size_t, std::size_t>> ranges(p.index.size());
  for (int l = 0; l < p.levels(); ++l) {
    const std::span<const TimeIndex> a(p.index.data() + p.lo(l), p.hi(l) - p.lo(l));
    const std::span<const TimeIndex> b(q.index.data() + q.lo(l + 1), q.hi(l + 1) - q.lo(l + 1));
    overlap_ranges(in_family, a, out_family, b, q.lo(l + 1),
                   std::span(ranges).subspan(p.lo(l), a.size()));
  }
  std::vector<NodePair> pairs;
  std::vector<int> fiber;
  for (std::size_t k = 0; k < p.index.size(); ++k) {
    fiber.clear();
    for (std::size_t j = ranges[k].first; j < ranges[k].second; ++j)
      fiber = trees::merge_sorted(out.mother(1), fiber, out.fiber1_ids(j));
    const int lambda = in.projection0()[k];
    for (int nu : fiber) pairs.push_back({lambda, nu});
  }
  count_ops(pairs.size());
  return DoubleTree(in.mother(0), out.mother(1), std::move(pairs));
}

DoubleTree generate_theta(const DoubleTree& out, const DoubleTree& in, Family out_family,
                          Family in_family) {
  const auto& tin = time_mother(in);
  const auto& tout = time_mother(out);
  const LevelSlices p(tin, in.projection0());
  const LevelSlices q(tout, out.projection0());
  std::vector<std::pair<std::size_t, std::size_t>> ranges(p.index.size());
  for (int l = 0; l < p.levels(); ++l) {
    const std::span<const TimeIndex> a(p.index.data() + p.lo(l), p.hi(l) - p.lo(l));
    const std::span<const TimeIndex> b(q.index.data() + q.lo(l), q.hi(l) - q.lo(l));
    overlap_ranges(in_family, a, out_family, b, q.lo(l),
                   std::span(ranges).subspan(p.lo(l), a.size()));
  }
  // Projection index of the axis-0 coordinate of every slot of `in`.
  std::vector<std::size_t> slot_k(in.size());
  for (std::size_t k = 0; k < in.projection0().size(); ++k)
    for (std::size_t s = in.fiber1_begin(k); s < in.fiber1_end(k); ++s) slot_k[s] = k;

  // (index into P_0 out, axis-1 node) with axis-1 nodes in key order.
  std::vector<std::pair<std::size_t, int>> entries;
  for (std::size_t m = 0; m < in.projection1().size(); ++m) {
    const int nu = in.projection1()[m];
    std::size_t next = 0;  // first candidate not yet emitted for this nu
    for (int s : in.fiber0_slots(m)) {
      const auto [lo, hi] = ranges[slot_k[static_cast<std::size_t>(s)]];
      for (std::size_t j = std::max(lo, next); j < hi; ++j) entries.push_back({j, nu});
      next = std::max(next, hi);
    }
  }
  // Stable counting sort by the axis-0 coordinate.
  std::vector<std::size_t> begin(q.index.size() + 1, 0);
  for (const auto& e : entries) ++begin[e.first + 1];
  for (std::size_t j = 0; j < q.index.size(); ++j) begin[j + 1] += begin[j];
  std::vector<NodePair> pairs(entries.size());
  for (const auto& e : entries) pairs[begin[e.first]++] = {out.projection0()[e.first], e.second};
  count_ops(2 * entries.size() + in.size() + q.index.size());
  return DoubleTree(out.mother(0), in.mother(1), std::move(pairs));
}

TensorPlan make_plan(const DoubleTree& out, const DoubleTree& in, Family out_family,
                     Family in_family) {
  return {generate_sigma(out, in, out_family, in_family),
          generate_theta(out, in, out_family, in_family)};
}

namespace {

std::vector<TimeIndex> fiber0_indices(const DoubleTree& t, std::size_t m) {
  const auto& tm = time_mother(t);
  std::vector<TimeIndex> out;
  out.reserve(t.fiber0_slots(m).size());
  for (int s : t.fiber0_slots(m)) out.push_back(tm.index(t.node(static_cast<std::size_t>(s)).n0));
  return out;
}

// Calls f(i, j) for matching entries of two key-sorted id lists.
template <class F>
void for_common(const trees::MotherTree& mother, std::span<const int> a, std::span<const int> b,
                F&& f) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      f(i++, j++);
    } else if (mother.key(a[i]) < mother.key(b[j])) {
      ++i;
    } else {
      ++j;
    }
  }
  count_ops(a.size() + b.size());
}

}  // namespace

void apply_tensor(const TensorPlan& plan, const matvec::TimeOperator& time_op,
                  const FiberOperator& fiber_op, const DoubleTree& in,
                  std::span<const double> in_values, const DoubleTree& out,
                  std::span<double> out_values) {
  if (in_values.size() != in.size() || out_values.size() != out.size())
    throw std::invalid_argument("vector does not match its double-tree");
  const DoubleTree& sigma = plan.sigma;
  const DoubleTree& theta = plan.theta;
  std::vector<double> s(sigma.size(), 0.0), t(theta.size(), 0.0);
  std::vector<double> buf_in, buf_out;

  // s = (Id x A1) c on the axis-1 fibers of Sigma.
  for_common(in.mother(0), in.projection0(), sigma.projection0(), [&](std::size_t i, std::size_t j) {
    const auto b = in.fiber1_begin(i);
    const auto sb = sigma.fiber1_begin(j);
    fiber_op.apply(in.fiber1_ids(i), in_values.subspan(b, in.fiber1_end(i) - b), sigma.fiber1_ids(j),
                   std::span(s).subspan(sb, sigma.fiber1_end(j) - sb));
  });

  // out += (L0 x Id) s on the axis-0 fibers of out.
  for_common(out.mother(1), sigma.projection1(), out.projection1(), [&](std::size_t i, std::size_t j) {
    const auto src = sigma.fiber0_slots(i);
    const auto dst = out.fiber0_slots(j);
    buf_in.resize(src.size());
    buf_out.resize(dst.size());
    for (std::size_t k = 0; k < src.size(); ++k) buf_in[k] = s[static_cast<std::size_t>(src[k])];
    matvec::apply(time_op, matvec::Part::Lower, fiber0_indices(sigma, i), buf_in,
                  fiber0_indices(out, j), buf_out);
    for (std::size_t k = 0; k < dst.size(); ++k) out_values[static_cast<std::size_t>(dst[k])] += buf_out[k];
  });

  // t = (U0 x Id) c on the axis-0 fibers of Theta.
  for_common(in.mother(1), in.projection1(), theta.projection1(), [&](std::size_t i, std::size_t j) {
    const auto src = in.fiber0_slots(i);
    const auto dst = theta.fiber0_slots(j);
    buf_in.resize(src.size());
    buf_out.resize(dst.size());
    for (std::size_t k = 0; k < src.size(); ++k) buf_in[k] = in_values[static_cast<std::size_t>(src[k])];
    matvec::apply(time_op, matvec::Part::Upper, fiber0_indices(in, i), buf_in,
                  fiber0_indices(theta, j), buf_out);
    for (std::size_t k = 0; k < dst.size(); ++k) t[static_cast<std::size_t>(dst[k])] = buf_out[k];
  });

  // out += (Id x A1) t on the axis-1 fibers of out.
  for_common(out.mother(0), theta.projection0(), out.projection0(), [&](std::size_t i, std::size_t j) {
    const auto tb = theta.fiber1_begin(i);
    const auto ob = out.fiber1_begin(j);
    buf_out.resize(out.fiber1_end(j) - ob);
    fiber_op.apply(theta.fiber1_ids(i), std::span<const double>(t).subspan(tb, theta.fiber1_end(i) - tb),
                   out.fiber1_ids(j), buf_out);
    for (std::size_t k = 0; k < buf_out.size(); ++k) out_values[ob + k] += buf_out[k];
  });
}

}  // namespace stheat::dtree
