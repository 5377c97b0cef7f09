#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stheat/double_tree.hpp"
#include "stheat/nvb.hpp"

// Synthetic index sets for complexity measurements.
namespace stheat::workloads {

// Every index of level <= `level`, level order.
std::vector<wavelets::TimeIndex> uniform_time_tree(trees::TimeMotherTree& mother, int level);

// Locally refined towards t = 1/3: (l, k) is kept when its support (in the
// given family) lies within width * 2^-l of the point, down to `max_level`.
std::vector<wavelets::TimeIndex> graded_time_tree(trees::TimeMotherTree& mother,
                                                  wavelets::Family family, double width,
                                                  int max_level = 40);

// Full tensor product of time levels <= time_level and vertex generations
// <= space_gen.
dtree::DoubleTree uniform_double_tree(trees::TimeMotherTree& time, space::VertexMotherTree& space,
                                      int time_level, int space_gen);

// Sparse-grid type set 2 |lambda| + gen(nu) <= level.
dtree::DoubleTree graded_double_tree(trees::TimeMotherTree& time, space::VertexMotherTree& space,
                                     int level);


struct KernelSample {
  std::string kernel;  // eval-full, eval-upper, eval-lower, apply-tensor
  std::string tree;    // uniform or graded
  std::size_t size = 0;
  std::uint64_t ops = 0;
  double ms = 0.0;
};

// Operation counts of the time kernels and of the tensor application on
// uniform and graded sets with sizes in [min_size, max_size]. Random input
// values are drawn from `seed`.
std::vector<KernelSample> kernel_bench(std::size_t min_size, std::size_t max_size, unsigned seed);

// Least-squares slope of log(ops) against log(size).
double loglog_slope(std::span<const double> sizes, std::span<const double> values);

}  // namespace stheat::workloads
