#include "stheat/multigrid.hpp"

#include <algorithm>
#include <stdexcept>

#include "stheat/op_counter.hpp"

namespace stheat::space {

namespace {

ElementMatrix combined(const Triangulation& tri, const MotherElement& e, SpaceForm form) {
  const VertexMotherTree& m = *tri.mother;
  const Point a = m.point(e.v[0]), b = m.point(e.v[1]), c = m.point(e.v[2]);
  ElementMatrix out{};
  if (form.stiffness != 0.0) {
    const auto s = stiffness_matrix(a, b, c);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[i][j] += form.stiffness * s[i][j];
  }
  if (form.mass != 0.0) {
    const auto s = mass_matrix(a, b, c);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[i][j] += form.mass * s[i][j];
  }
  return out;
}

}  // namespace

Multigrid::Multigrid(const Triangulation& tri, SpaceForm form) : tri_(&tri), form_(form) {
  const std::size_t n = tri.num_vertices();
  const int levels = tri.max_gen();
  VertexMotherTree& mother = *tri.mother;

  // Local vertex index of every history element vertex.
  trees::MotherTree::Lease lease(mother);
  for (std::size_t i = 0; i < n; ++i) mother.scratch(tri.vertices[i]) = static_cast<int>(i);
  const std::size_t h = tri.history.size();
  std::vector<std::array<int, 3>> local(h);
  std::vector<int> hgen(h);
  int max_hgen = 0;
  for (std::size_t k = 0; k < h; ++k) {
    const MotherElement& e = mother.element(tri.history[k]);
    for (int i = 0; i < 3; ++i) local[k][static_cast<std::size_t>(i)] = mother.scratch(e.v[static_cast<std::size_t>(i)]);
    hgen[k] = e.gen;
    max_hgen = std::max(max_hgen, e.gen);
  }
  for (std::size_t i = 0; i < n; ++i) mother.scratch(tri.vertices[i]) = -1;

  // Position of each history element's parent within the history.
  std::vector<int> hparent(h, -1);
  {
    std::vector<int> first_child_of(h, -1);
    // History is a preorder traversal; a non-leaf is directly followed by its
    // first child, and the second child follows the first child's subtree.
    std::vector<int> stack;
    for (std::size_t k = 0; k < h; ++k) {
      while (!stack.empty() && hgen[static_cast<std::size_t>(stack.back())] >= hgen[k]) stack.pop_back();
      if (!stack.empty() && hgen[static_cast<std::size_t>(stack.back())] == hgen[k] - 1)
        hparent[k] = stack.back();
      if (!tri.history_leaf[k]) stack.push_back(static_cast<int>(k));
    }
  }

  // Incidence lists ordered by element generation (counting sort).
  std::vector<int> inc_begin(n + 1, 0);
  for (std::size_t k = 0; k < h; ++k)
    for (int v : local[k]) ++inc_begin[static_cast<std::size_t>(v) + 1];
  for (std::size_t i = 0; i < n; ++i) inc_begin[i + 1] += inc_begin[i];
  std::vector<int> by_gen_begin(static_cast<std::size_t>(max_hgen) + 2, 0);
  for (std::size_t k = 0; k < h; ++k) ++by_gen_begin[static_cast<std::size_t>(hgen[k]) + 1];
  for (int g = 0; g <= max_hgen; ++g) by_gen_begin[static_cast<std::size_t>(g) + 1] += by_gen_begin[static_cast<std::size_t>(g)];
  std::vector<int> order(h);
  {
    std::vector<int> fill(by_gen_begin.begin(), by_gen_begin.end() - 1);
    for (std::size_t k = 0; k < h; ++k) order[static_cast<std::size_t>(fill[static_cast<std::size_t>(hgen[k])]++)] = static_cast<int>(k);
  }
  std::vector<int> incidence(static_cast<std::size_t>(inc_begin[n]));
  {
    std::vector<int> fill(inc_begin.begin(), inc_begin.end() - 1);
    for (int k : order)
      for (int v : local[static_cast<std::size_t>(k)]) incidence[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++)] = k;
  }

  // Coarse problem on the generation-0 elements.
  std::vector<int> coarse_index(n, -1);
  for (std::size_t i = 0; i < n && tri.gen[i] == 0; ++i)
    if (!tri.boundary[i]) {
      coarse_index[i] = static_cast<int>(coarse_dofs_.size());
      coarse_dofs_.push_back(static_cast<int>(i));
    }
  Eigen::MatrixXd coarse = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(coarse_dofs_.size()),
                                                 static_cast<Eigen::Index>(coarse_dofs_.size()));
  for (std::size_t k = 0; k < h; ++k) {
    if (hgen[k] != 0) continue;
    const ElementMatrix m = combined(tri, mother.element(tri.history[k]), form);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int a = coarse_index[static_cast<std::size_t>(local[k][static_cast<std::size_t>(i)])];
        const int b = coarse_index[static_cast<std::size_t>(local[k][static_cast<std::size_t>(j)])];
        if (a >= 0 && b >= 0) coarse(a, b) += m[i][j];
      }
  }
  if (!coarse_dofs_.empty()) {
    coarse_.compute(coarse);
    if (coarse_.info() != Eigen::Success) throw std::runtime_error("singular coarse matrix");
  }

  // Interior vertices grouped by generation (already in tree order).
  new_begin_.assign(static_cast<std::size_t>(levels) + 2, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (tri.boundary[i] || tri.gen[i] == 0) continue;
    new_vertices_.push_back(static_cast<int>(i));
    ++new_begin_[static_cast<std::size_t>(tri.gen[i]) + 1];
  }
  for (int g = 0; g <= levels; ++g) new_begin_[static_cast<std::size_t>(g) + 1] += new_begin_[static_cast<std::size_t>(g)];

  // Level stencils. The star of a vertex (elements of the level-k mesh
  // containing it) is advanced lazily through its incidence list.
  std::vector<int> cursor(inc_begin.begin(), inc_begin.end() - 1);
  std::vector<std::vector<int>> star(n);
  std::vector<int> mark(n, -1);
  std::vector<int> smooth;
  level_begin_.push_back(0);
  std::size_t all_begin = 0;
  for (int k = 1; k <= levels; ++k) {
    // All new vertices of generation k, including boundary ones, give M_k.
    smooth.clear();
    while (all_begin < n && tri.gen[all_begin] < k) ++all_begin;
    for (std::size_t i = all_begin; i < n && tri.gen[i] == k; ++i) {
      auto add = [&](int v) {
        if (v < 0 || tri.boundary[static_cast<std::size_t>(v)] || mark[static_cast<std::size_t>(v)] == k) return;
        mark[static_cast<std::size_t>(v)] = k;
        smooth.push_back(v);
      };
      add(static_cast<int>(i));
      for (int g : tri.godparents[i]) add(g);
    }
    std::sort(smooth.begin(), smooth.end());
    for (int v : smooth) {
      auto& s = star[static_cast<std::size_t>(v)];
      int& c = cursor[static_cast<std::size_t>(v)];
      while (c < inc_begin[static_cast<std::size_t>(v) + 1] &&
             hgen[static_cast<std::size_t>(incidence[static_cast<std::size_t>(c)])] <= k) {
        const int e = incidence[static_cast<std::size_t>(c++)];
        const int p = hparent[static_cast<std::size_t>(e)];
        if (p >= 0) {
          auto it = std::find(s.begin(), s.end(), p);
          if (it != s.end()) s.erase(it);
        }
        s.push_back(e);
      }
      Row row{v, 0.0, static_cast<int>(cols_.size()), 0};
      for (int e : s) {
        const ElementMatrix m = combined(tri, mother.element(tri.history[static_cast<std::size_t>(e)]), form);
        const auto& lv = local[static_cast<std::size_t>(e)];
        int me = 0;
        while (lv[static_cast<std::size_t>(me)] != v) ++me;
        for (int j = 0; j < 3; ++j) {
          const int w = lv[static_cast<std::size_t>(j)];
          if (tri.boundary[static_cast<std::size_t>(w)]) continue;
          const double a = m[me][j];
          if (w == v) {
            row.diag += a;
            continue;
          }
          int pos = row.begin;
          while (pos < static_cast<int>(cols_.size()) && cols_[static_cast<std::size_t>(pos)] != w) ++pos;
          if (pos == static_cast<int>(cols_.size())) {
            cols_.push_back(w);
            vals_.push_back(a);
          } else {
            vals_[static_cast<std::size_t>(pos)] += a;
          }
        }
      }
      row.end = static_cast<int>(cols_.size());
      rows_.push_back(row);
    }
    level_begin_.push_back(static_cast<int>(rows_.size()));
  }
  count_ops(h + rows_.size() + cols_.size());
}

void Multigrid::vcycle(std::span<const double> rhs, std::span<double> u) const {
  const Triangulation& tri = *tri_;
  const std::size_t n = tri.num_vertices();
  if (rhs.size() != n || u.size() != n) throw std::invalid_argument("multigrid vector length");
  std::vector<double> r(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i)
    if (tri.boundary[i]) r[i] = 0.0;
  std::vector<double> rk(rows_.size()), ek(rows_.size());
  const int levels = this->levels();
  for (int k = levels; k >= 1; --k) {
    for (int q = level_begin_[static_cast<std::size_t>(k) - 1]; q < level_begin_[static_cast<std::size_t>(k)]; ++q) {
      const Row& row = rows_[static_cast<std::size_t>(q)];
      const double res = r[static_cast<std::size_t>(row.vertex)];
      const double e = res / row.diag;
      rk[static_cast<std::size_t>(q)] = res;
      ek[static_cast<std::size_t>(q)] = e;
      r[static_cast<std::size_t>(row.vertex)] -= e * row.diag;
      for (int j = row.begin; j < row.end; ++j)
        r[static_cast<std::size_t>(cols_[static_cast<std::size_t>(j)])] -= e * vals_[static_cast<std::size_t>(j)];
    }
    // r := P_k^T r.
    for (int q = new_begin_[static_cast<std::size_t>(k)]; q < new_begin_[static_cast<std::size_t>(k) + 1]; ++q) {
      const auto v = static_cast<std::size_t>(new_vertices_[static_cast<std::size_t>(q)]);
      for (int g : tri.godparents[v])
        if (!tri.boundary[static_cast<std::size_t>(g)]) r[static_cast<std::size_t>(g)] += 0.5 * r[v];
    }
  }
  std::fill(u.begin(), u.end(), 0.0);
  if (!coarse_dofs_.empty()) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(coarse_dofs_.size()));
    for (std::size_t i = 0; i < coarse_dofs_.size(); ++i) b(static_cast<Eigen::Index>(i)) = r[static_cast<std::size_t>(coarse_dofs_[i])];
    const Eigen::VectorXd x = coarse_.solve(b);
    for (std::size_t i = 0; i < coarse_dofs_.size(); ++i) u[static_cast<std::size_t>(coarse_dofs_[i])] = x(static_cast<Eigen::Index>(i));
  }
  for (int k = 1; k <= levels; ++k) {
    for (int q = new_begin_[static_cast<std::size_t>(k)]; q < new_begin_[static_cast<std::size_t>(k) + 1]; ++q) {
      const auto v = static_cast<std::size_t>(new_vertices_[static_cast<std::size_t>(q)]);
      double s = 0.0;
      for (int g : tri.godparents[v]) s += 0.5 * u[static_cast<std::size_t>(g)];
      u[v] = s;
    }
    for (int q = level_begin_[static_cast<std::size_t>(k)]; q-- > level_begin_[static_cast<std::size_t>(k) - 1];) {
      const Row& row = rows_[static_cast<std::size_t>(q)];
      const auto v = static_cast<std::size_t>(row.vertex);
      u[v] += ek[static_cast<std::size_t>(q)];
      double au = row.diag * u[v];
      for (int j = row.begin; j < row.end; ++j)
        au += vals_[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(cols_[static_cast<std::size_t>(j)])];
      u[v] += (rk[static_cast<std::size_t>(q)] - au) / row.diag;
    }
  }
  count_ops(n + 2 * cols_.size());
}

void Multigrid::solve(std::span<const double> rhs, std::span<double> u, int cycles) const {
  const std::size_t n = tri_->num_vertices();
  std::fill(u.begin(), u.end(), 0.0);
  if (cycles <= 0) return;
  vcycle(rhs, u);
  std::vector<double> res(n), au(n), corr(n);
  for (int c = 1; c < cycles; ++c) {
    apply_nodal(*tri_, form_, u, au);
    for (std::size_t i = 0; i < n; ++i) res[i] = rhs[i] - au[i];
    vcycle(res, corr);
    for (std::size_t i = 0; i < n; ++i) u[i] += corr[i];
  }
}

void precondition_hb(const Multigrid& mg, std::span<double> v, int cycles) {
  const Triangulation& tri = mg.triangulation();
  hb_dual_to_nodal(tri, v);
  std::vector<double> u(v.size());
  mg.solve(v, u, cycles);
  std::copy(u.begin(), u.end(), v.begin());
  nodal_to_hb(tri, v);
}

}  // namespace stheat::space
