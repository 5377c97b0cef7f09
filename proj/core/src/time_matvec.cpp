#include "stheat/time_matvec.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>
#include <utility>

#include "stheat/op_counter.hpp"

namespace stheat::matvec {

using wavelets::Interval;
using wavelets::LinearPiece;
using wavelets::ScalingKind;

namespace {

using Iv = std::pair<std::int64_t, std::int64_t>;

struct LevelSet {
  std::vector<std::int64_t> pos;
  std::vector<double> val;
};

void add_to_union(std::vector<Iv>& u, Iv iv) {
  if (!u.empty() && iv.first <= u.back().second)
    u.back().second = std::max(u.back().second, iv.second);
  else
    u.push_back(iv);
}

std::vector<Iv> merge_unions(const std::vector<Iv>& a, const std::vector<Iv>& b) {
  std::vector<Iv> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first <= b[j].first))
      add_to_union(out, a[i++]);
    else
      add_to_union(out, b[j++]);
  }
  count_ops(a.size() + b.size());
  return out;
}

// Candidates must have nondecreasing left endpoints.
std::vector<bool> overlap_flags(const std::vector<Iv>& candidates, const std::vector<Iv>& u) {
  std::vector<bool> flags(candidates.size(), false);
  std::size_t j = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    while (j < u.size() && u[j].second <= candidates[i].first) ++j;
    flags[i] = j < u.size() && u[j].first < candidates[i].second;
  }
  count_ops(candidates.size() + u.size());
  return flags;
}

Iv scaling_iv_fine(ScalingKind kind, int coarse_level, std::int64_t pos) {
  const Interval s = wavelets::scaling_support(kind, {coarse_level, pos}).at_level(coarse_level + 1);
  return {s.left, s.right};
}

std::vector<Iv> wavelet_union(Family family, std::span<const TimeIndex> wavelets_at_level) {
  std::vector<Iv> u;
  for (const auto& w : wavelets_at_level) {
    const Interval s = wavelets::wavelet_support(family, w);
    add_to_union(u, {s.left, s.right});
  }
  count_ops(wavelets_at_level.size());
  return u;
}

// Insert near the back of a sorted list; masks of consecutive sorted inputs
// only reach back a bounded distance, so this is O(1) amortized.
void accumulate(LevelSet& s, std::int64_t pos, double v) {
  std::size_t i = s.pos.size();
  while (i > 0 && s.pos[i - 1] > pos) --i;
  if (i > 0 && s.pos[i - 1] == pos) {
    s.val[i - 1] += v;
    return;
  }
  s.pos.insert(s.pos.begin() + static_cast<std::ptrdiff_t>(i), pos);
  s.val.insert(s.val.begin() + static_cast<std::ptrdiff_t>(i), v);
}

void accumulate_pos(std::vector<std::int64_t>& s, std::int64_t pos) {
  std::size_t i = s.size();
  while (i > 0 && s[i - 1] > pos) --i;
  if (i > 0 && s[i - 1] == pos) return;
  s.insert(s.begin() + static_cast<std::ptrdiff_t>(i), pos);
}

LevelSet merge_add(const LevelSet& a, const LevelSet& b) {
  LevelSet out;
  out.pos.reserve(a.pos.size() + b.pos.size());
  out.val.reserve(a.pos.size() + b.pos.size());
  std::size_t i = 0, j = 0;
  while (i < a.pos.size() || j < b.pos.size()) {
    if (j == b.pos.size() || (i < a.pos.size() && a.pos[i] < b.pos[j])) {
      out.pos.push_back(a.pos[i]);
      out.val.push_back(a.val[i++]);
    } else if (i == a.pos.size() || b.pos[j] < a.pos[i]) {
      out.pos.push_back(b.pos[j]);
      out.val.push_back(b.val[j++]);
    } else {
      out.pos.push_back(a.pos[i]);
      out.val.push_back(a.val[i++] + b.val[j++]);
    }
  }
  count_ops(a.pos.size() + b.pos.size());
  return out;
}

std::vector<std::int64_t> merge_pos(const std::vector<std::int64_t>& a,
                                    const std::vector<std::int64_t>& b) {
  std::vector<std::int64_t> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  count_ops(a.size() + b.size());
  return out;
}

// Lookup in a sorted array with queries that move forward up to a bounded
// backtrack.
class Cursor {
 public:
  explicit Cursor(std::span<const std::int64_t> keys) : keys_(keys) {}
  std::ptrdiff_t find(std::int64_t p) {
    while (i_ < keys_.size() && keys_[i_] < p) ++i_;
    while (i_ > 0 && keys_[i_ - 1] >= p) --i_;
    count_ops();
    return (i_ < keys_.size() && keys_[i_] == p) ? static_cast<std::ptrdiff_t>(i_) : -1;
  }

 private:
  std::span<const std::int64_t> keys_;
  std::size_t i_ = 0;
};

// First index in a (level,pos)-sorted tree with level >= l.
std::size_t level_begin(std::span<const TimeIndex> tree, std::size_t from, int l) {
  while (from < tree.size() && tree[from].level < l) ++from;
  return from;
}

}  // namespace

TimeForm adjoint(TimeForm form) {
  switch (form) {
    case TimeForm::Derivative: return TimeForm::DerivativeTransposed;
    case TimeForm::DerivativeTransposed: return TimeForm::Derivative;
    default: return form;
  }
}

TimeOperator adjoint(const TimeOperator& op) {
  return {adjoint(op.form), op.test, op.trial};
}

double element_value(TimeForm form, int level, std::int64_t element, LinearPiece u,
                     LinearPiece v) {
  switch (form) {
    case TimeForm::Mass:
      return std::ldexp(1.0, -level) *
             (u.a * v.a + 0.5 * (u.a * v.b + u.b * v.a) + u.b * v.b / 3.0);
    case TimeForm::Derivative: return u.b * (v.a + 0.5 * v.b);
    case TimeForm::DerivativeTransposed: return v.b * (u.a + 0.5 * u.b);
    case TimeForm::Trace: return element == 0 ? u.a * v.a : 0.0;
  }
  return 0.0;
}

std::vector<bool> construct_pib(Family test, Family trial, int level,
                                std::span<const std::int64_t> test_scalings,
                                std::span<const std::int64_t> trial_wavelets) {
  std::vector<TimeIndex> w;
  w.reserve(trial_wavelets.size());
  for (auto p : trial_wavelets) w.push_back({level, p});
  const auto u = wavelet_union(trial, w);
  std::vector<Iv> cands;
  cands.reserve(test_scalings.size());
  const ScalingKind kind = wavelets::scaling_kind(test);
  for (auto p : test_scalings) cands.push_back(scaling_iv_fine(kind, level - 1, p));
  return overlap_flags(cands, u);
}

std::vector<double> apply_single_scale(const TimeOperator& op, int level,
                                       std::span<const std::int64_t> trial_pos,
                                       std::span<const double> d,
                                       std::span<const std::int64_t> test_pos) {
  const ScalingKind trial_kind = wavelets::scaling_kind(op.trial);
  const ScalingKind test_kind = wavelets::scaling_kind(op.test);
  std::vector<double> e(test_pos.size(), 0.0);
  Cursor cursor(trial_pos);
  for (std::size_t j = 0; j < test_pos.size(); ++j) {
    const Interval sup = wavelets::scaling_support(test_kind, {level, test_pos[j]});
    double sum = 0.0;
    for (std::int64_t el = sup.left; el < sup.right; ++el) {
      const LinearPiece v = wavelets::scaling_piece(test_kind, test_pos[j], el);
      const std::int64_t first = trial_kind == ScalingKind::ContinuousHat ? el : 2 * el;
      for (std::int64_t cand = first; cand < first + 2; ++cand) {
        const auto k = cursor.find(cand);
        if (k < 0) continue;
        const LinearPiece u = wavelets::scaling_piece(trial_kind, cand, el);
        sum += d[static_cast<std::size_t>(k)] * element_value(op.form, level, el, u, v);
      }
    }
    e[j] = sum;
  }
  return e;
}

namespace {

struct Frame {
  int level = 0;
  std::vector<std::int64_t> test_pi;
  LevelSet trial_pi;
  std::vector<bool> test_b;
  std::vector<std::int64_t> next_test;
  std::size_t test_begin = 0, test_end = 0;  // test wavelets at this level
  std::vector<double> e;
};

// p^T e_next for each coarse position (mask into the next level).
double restrict_coarse(ScalingKind kind, int level, std::int64_t coarse, Cursor& cursor,
                       const std::vector<double>& e_next) {
  double s = 0.0;
  for (const auto& m : wavelets::scaling_refinement(kind, level, coarse)) {
    const auto k = cursor.find(m.pos);
    if (k >= 0) s += m.coeff * e_next[static_cast<std::size_t>(k)];
  }
  return s;
}

double restrict_wavelet(Family family, TimeIndex w, Cursor& cursor,
                        const std::vector<double>& e_next) {
  double s = 0.0;
  for (const auto& m : wavelets::wavelet_mask(family, w)) {
    const auto k = cursor.find(m.pos);
    if (k >= 0) s += m.coeff * e_next[static_cast<std::size_t>(k)];
  }
  return s;
}

LevelSet prolong(const TimeOperator& op, int level, const LevelSet& coarse,
                 const std::vector<bool>* keep) {
  const ScalingKind kind = wavelets::scaling_kind(op.trial);
  LevelSet out;
  for (std::size_t i = 0; i < coarse.pos.size(); ++i) {
    if (keep && !(*keep)[i]) continue;
    for (const auto& m : wavelets::scaling_refinement(kind, level, coarse.pos[i]))
      accumulate(out, m.pos, m.coeff * coarse.val[i]);
  }
  count_ops(coarse.pos.size());
  return out;
}

LevelSet wavelets_to_scaling(Family family, std::span<const TimeIndex> w,
                             std::span<const double> c) {
  LevelSet out;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (const auto& m : wavelets::wavelet_mask(family, w[i]))
      accumulate(out, m.pos, m.coeff * c[i]);
  count_ops(w.size());
  return out;
}

}  // namespace

EvalResult eval_recursive(const TimeOperator& op, Part part, int level,
                          std::span<const std::int64_t> test_scalings,
                          std::span<const TimeIndex> test_tree,
                          std::span<const std::int64_t> trial_scalings,
                          std::span<const double> d,
                          std::span<const TimeIndex> trial_tree,
                          std::span<const double> c) {
  if (level < 1) throw std::invalid_argument("eval starts at level >= 1");
  for (const auto& t : test_tree)
    if (t.level < level) throw std::invalid_argument("test tree below start level");
  for (const auto& t : trial_tree)
    if (t.level < level) throw std::invalid_argument("trial tree below start level");

  const ScalingKind test_kind = wavelets::scaling_kind(op.test);
  EvalResult result;
  result.e.assign(test_scalings.size(), 0.0);
  result.f.assign(test_tree.size(), 0.0);

  std::vector<Frame> frames;
  std::vector<std::int64_t> cur_test(test_scalings.begin(), test_scalings.end());
  LevelSet cur_trial{{trial_scalings.begin(), trial_scalings.end()}, {d.begin(), d.end()}};
  std::size_t tb = 0, cb = 0;
  for (int l = level;; ++l) {
    tb = level_begin(test_tree, tb, l);
    cb = level_begin(trial_tree, cb, l);
    const bool deeper_test = tb < test_tree.size();
    if (part == Part::Lower ? !deeper_test : (cur_test.empty() && !deeper_test)) break;
    const std::size_t te = level_begin(test_tree, tb, l + 1);
    const std::size_t ce = level_begin(trial_tree, cb, l + 1);
    const auto test_w = test_tree.subspan(tb, te - tb);
    const auto trial_w = trial_tree.subspan(cb, ce - cb);
    const auto trial_c = c.subspan(cb, ce - cb);

    Frame fr;
    fr.level = l;
    fr.test_begin = tb;
    fr.test_end = te;
    const LevelSet qc = wavelets_to_scaling(op.trial, trial_w, trial_c);
    LevelSet next_trial;

    if (part == Part::Lower) {
      const auto u_test = wavelet_union(op.test, test_w);
      std::vector<Iv> cands;
      for (auto p : cur_trial.pos)
        cands.push_back(scaling_iv_fine(wavelets::scaling_kind(op.trial), l - 1, p));
      const auto trial_b = overlap_flags(cands, u_test);
      const LevelSet pd = prolong(op, l, cur_trial, &trial_b);
      std::vector<std::int64_t> next_test;
      for (const auto& w : test_w)
        for (const auto& m : wavelets::wavelet_mask(op.test, w))
          accumulate_pos(next_test, m.pos);
      const auto e_next = apply_single_scale(op, l, pd.pos, pd.val, next_test);
      Cursor cursor(next_test);
      for (std::size_t i = tb; i < te; ++i)
        result.f[i] = restrict_wavelet(op.test, test_tree[i], cursor, e_next);
      cur_trial = merge_add(pd, qc);
      continue;
    }

    const auto u_trial = wavelet_union(op.trial, trial_w);
    std::vector<Iv> test_cands;
    for (auto p : cur_test) test_cands.push_back(scaling_iv_fine(test_kind, l - 1, p));
    fr.test_b = overlap_flags(test_cands, u_trial);

    std::vector<std::int64_t> from_scalings, from_wavelets;
    for (std::size_t i = 0; i < cur_test.size(); ++i) {
      if (!fr.test_b[i]) continue;
      for (const auto& m : wavelets::scaling_refinement(test_kind, l, cur_test[i]))
        accumulate_pos(from_scalings, m.pos);
    }
    for (const auto& w : test_w)
      for (const auto& m : wavelets::wavelet_mask(op.test, w))
        accumulate_pos(from_wavelets, m.pos);
    fr.next_test = merge_pos(from_scalings, from_wavelets);

    if (part == Part::Full) {
      std::vector<Iv> test_b_union;
      for (std::size_t i = 0; i < cur_test.size(); ++i)
        if (fr.test_b[i]) add_to_union(test_b_union, test_cands[i]);
      const auto u_test = merge_unions(wavelet_union(op.test, test_w), test_b_union);
      std::vector<Iv> cands;
      for (auto p : cur_trial.pos)
        cands.push_back(scaling_iv_fine(wavelets::scaling_kind(op.trial), l - 1, p));
      const auto trial_b = overlap_flags(cands, u_test);
      next_trial = merge_add(prolong(op, l, cur_trial, &trial_b), qc);
    } else {
      next_trial = qc;
    }

    fr.test_pi = std::move(cur_test);
    fr.trial_pi = std::move(cur_trial);
    cur_test = fr.next_test;
    cur_trial = std::move(next_trial);
    frames.push_back(std::move(fr));
  }
  if (part == Part::Lower) return result;

  for (std::size_t k = frames.size(); k-- > 0;) {
    Frame& fr = frames[k];
    static const std::vector<double> kEmpty;
    const std::vector<double>& e_next = k + 1 < frames.size() ? frames[k + 1].e : kEmpty;
    fr.e.assign(fr.test_pi.size(), 0.0);

    std::vector<std::int64_t> direct;
    std::vector<std::size_t> direct_at;
    for (std::size_t i = 0; i < fr.test_pi.size(); ++i) {
      if (part == Part::Upper || !fr.test_b[i]) {
        direct.push_back(fr.test_pi[i]);
        direct_at.push_back(i);
      }
    }
    const auto ss = apply_single_scale(op, fr.level - 1, fr.trial_pi.pos, fr.trial_pi.val, direct);
    for (std::size_t j = 0; j < direct.size(); ++j) fr.e[direct_at[j]] = ss[j];

    if (!e_next.empty()) {
      Cursor cursor(fr.next_test);
      for (std::size_t i = 0; i < fr.test_pi.size(); ++i)
        if (fr.test_b[i])
          fr.e[i] += restrict_coarse(test_kind, fr.level, fr.test_pi[i], cursor, e_next);
      Cursor wcursor(fr.next_test);
      for (std::size_t i = fr.test_begin; i < fr.test_end; ++i)
        result.f[i] = restrict_wavelet(op.test, test_tree[i], wcursor, e_next);
    }
    if (k + 1 < frames.size()) frames[k + 1].e.clear();
  }
  if (!frames.empty()) result.e = std::move(frames[0].e);
  return result;
}

void apply(const TimeOperator& op, Part part, std::span<const TimeIndex> in_tree,
           std::span<const double> in_values, std::span<const TimeIndex> out_tree,
           std::span<double> out_values) {
  if (in_tree.size() != in_values.size() || out_tree.size() != out_values.size())
    throw std::invalid_argument("tree/value size mismatch");
  const std::size_t in0 = level_begin(in_tree, 0, 1);
  const std::size_t out0 = level_begin(out_tree, 0, 1);
  std::vector<std::int64_t> trial_scalings, test_scalings;
  for (std::size_t i = 0; i < in0; ++i) trial_scalings.push_back(in_tree[i].pos);
  for (std::size_t i = 0; i < out0; ++i) test_scalings.push_back(out_tree[i].pos);
  const auto res = eval_recursive(op, part, 1, test_scalings, out_tree.subspan(out0),
                                  trial_scalings, in_values.subspan(0, in0),
                                  in_tree.subspan(in0), in_values.subspan(in0));
  for (std::size_t i = 0; i < out0; ++i)
    out_values[i] = part == Part::Lower ? 0.0 : res.e[i];
  for (std::size_t i = out0; i < out_tree.size(); ++i) out_values[i] = res.f[i - out0];
}

}  // namespace stheat::matvec
