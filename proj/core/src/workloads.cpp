#include "stheat/workloads.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "stheat/op_counter.hpp"
#include "stheat/tensor_apply.hpp"

namespace stheat::workloads {

using wavelets::TimeIndex;

namespace {

std::vector<int> uniform_time_nodes(trees::TimeMotherTree& mother, int level) {
  std::vector<int> out(mother.roots().begin(), mother.roots().end());
  std::vector<int> frontier = out;
  for (int l = 1; l <= level; ++l) {
    std::vector<int> next;
    for (int n : frontier) {
      const auto kids = mother.children(n);
      next.insert(next.end(), kids.begin(), kids.end());
    }
    trees::normalize(mother, next);
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  trees::normalize(mother, out);
  return out;
}

std::vector<TimeIndex> indices(const trees::TimeMotherTree& mother, std::span<const int> nodes) {
  std::vector<TimeIndex> out;
  out.reserve(nodes.size());
  for (int n : nodes) out.push_back(mother.index(n));
  return out;
}

using Clock = std::chrono::steady_clock;

std::vector<double> random_values(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

template <class F>
KernelSample measure(std::string kernel, std::string tree, std::size_t size, F&& run) {
  const auto ops = op_count();
  const auto start = Clock::now();
  run();
  KernelSample s{std::move(kernel), std::move(tree), size, op_count() - ops, 0.0};
  s.ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return s;
}

void time_kernels(std::vector<KernelSample>& out, const std::string& tree,
                  std::span<const TimeIndex> idx, std::mt19937& rng) {
  using matvec::Part;
  using matvec::TimeForm;
  const auto in = random_values(idx.size(), rng);
  std::vector<double> res(idx.size());
  const matvec::TimeOperator mass{TimeForm::Mass, wavelets::Family::ThreePoint,
                                  wavelets::Family::ThreePoint};
  const matvec::TimeOperator deriv{TimeForm::Derivative, wavelets::Family::ThreePoint,
                                   wavelets::Family::Orthonormal};
  out.push_back(measure("eval-full", tree, idx.size(),
                        [&] { matvec::apply(mass, Part::Full, idx, in, idx, res); }));
  out.push_back(measure("eval-upper", tree, idx.size(),
                        [&] { matvec::apply(mass, Part::Upper, idx, in, idx, res); }));
  out.push_back(measure("eval-lower", tree, idx.size(),
                        [&] { matvec::apply(deriv, Part::Lower, idx, in, idx, res); }));
}

void tensor_kernel(std::vector<KernelSample>& out, const std::string& tree,
                   const dtree::DoubleTree& t, space::VertexMotherTree& space, std::mt19937& rng) {
  const auto in = random_values(t.size(), rng);
  std::vector<double> res(t.size(), 0.0);
  const dtree::SpaceFiberOperator stiff(space, space::kStiffness);
  const matvec::TimeOperator mass{matvec::TimeForm::Mass, wavelets::Family::ThreePoint,
                                  wavelets::Family::ThreePoint};
  out.push_back(measure("apply-tensor", tree, t.size(), [&] {
    const auto plan = dtree::make_plan(t, t, wavelets::Family::ThreePoint, wavelets::Family::ThreePoint);
    dtree::apply_tensor(plan, mass, stiff, t, in, t, res);
  }));
}

}  // namespace

std::vector<TimeIndex> uniform_time_tree(trees::TimeMotherTree& mother, int level) {
  return indices(mother, uniform_time_nodes(mother, level));
}

std::vector<TimeIndex> graded_time_tree(trees::TimeMotherTree& mother, wavelets::Family family,
                                        double width, int max_level) {
  constexpr double point = 1.0 / 3.0;
  trees::Tree tree = trees::roots_tree(mother);
  trees::deep_refine(
      tree,
      [&](int id) {
        const auto idx = mother.index(id);
        if (idx.level > max_level) return false;
        const auto sup = wavelets::wavelet_support(family, idx);
        const double dist = std::max({0.0, sup.lo() - point, point - sup.hi()});
        return dist <= width * std::ldexp(1.0, -idx.level);
      },
      max_level + 1);
  return indices(mother, tree.nodes);
}

dtree::DoubleTree uniform_double_tree(trees::TimeMotherTree& time, space::VertexMotherTree& space,
                                      int time_level, int space_gen) {
  const auto t = uniform_time_nodes(time, time_level);
  auto s = space::uniform_vertices(space, space_gen);
  trees::normalize(space, s);
  std::vector<dtree::NodePair> pairs;
  pairs.reserve(t.size() * s.size());
  for (int a : t)
    for (int b : s) pairs.push_back({a, b});
  return dtree::DoubleTree(time, space, std::move(pairs));
}

dtree::DoubleTree graded_double_tree(trees::TimeMotherTree& time, space::VertexMotherTree& space,
                                     int level) {
  const auto t = uniform_time_nodes(time, level / 2);
  auto s = space::uniform_vertices(space, level);
  trees::normalize(space, s);
  std::vector<dtree::NodePair> pairs;
  for (int a : t)
    for (int b : s) {
      if (2 * time.level(a) + space.gen(b) > level) break;
      pairs.push_back({a, b});
    }
  return dtree::DoubleTree(time, space, std::move(pairs));
}


std::vector<KernelSample> kernel_bench(std::size_t min_size, std::size_t max_size, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<KernelSample> out;
  auto in_range = [&](std::size_t n) { return n >= min_size && n <= max_size; };
  {
    trees::TimeMotherTree mother(trees::TimeShape::Binary);
    for (int level = 1; level <= 40; ++level) {
      const std::size_t n = (std::size_t{1} << level) + 1;
      if (n > max_size) break;
      if (in_range(n)) time_kernels(out, "uniform", uniform_time_tree(mother, level), rng);
    }
  }
  for (double width = 1.0;; width *= 2.0) {
    trees::TimeMotherTree mother(trees::TimeShape::Binary);
    const auto idx = graded_time_tree(mother, wavelets::Family::ThreePoint, width);
    if (idx.size() > max_size) break;
    if (in_range(idx.size())) time_kernels(out, "graded", idx, rng);
  }
  for (int k = 1;; ++k) {
    trees::TimeMotherTree time(trees::TimeShape::Binary);
    auto space = space::VertexMotherTree::unit_square();
    const auto t = uniform_double_tree(time, space, k / 2, k);
    if (t.size() > max_size) break;
    if (in_range(t.size())) tensor_kernel(out, "uniform", t, space, rng);
  }
  for (int level = 2;; ++level) {
    trees::TimeMotherTree time(trees::TimeShape::Binary);
    auto space = space::VertexMotherTree::unit_square();
    const auto t = graded_double_tree(time, space, level);
    if (t.size() > max_size) break;
    if (in_range(t.size())) tensor_kernel(out, "graded", t, space, rng);
  }
  return out;
}

double loglog_slope(std::span<const double> sizes, std::span<const double> values) {
  const std::size_t n = sizes.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(sizes[i]), y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace stheat::workloads
