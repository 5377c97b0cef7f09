#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "stheat/heat.hpp"
#include "stheat/op_counter.hpp"

namespace stheat::heat {

std::vector<std::size_t> dorfler_mark(std::span<const double> values, double theta) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    const double va = values[a] * values[a], vb = values[b] * values[b];
    return va != vb ? va > vb : a < b;
  };
  double total = 0.0;
  for (double v : values) total += v * v;
  const double need = theta * theta * total;
  if (need <= 0.0) return {};

  // Quickselect on the strict order: find the shortest prefix reaching `need`
  // in expected linear time.
  std::size_t lo = 0, hi = order.size();
  double acquired = 0.0;  // mass of order[0, lo)
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(lo),
                     order.begin() + static_cast<std::ptrdiff_t>(mid),
                     order.begin() + static_cast<std::ptrdiff_t>(hi), before);
    double left = 0.0;
    for (std::size_t i = lo; i < mid; ++i) left += values[order[i]] * values[order[i]];
    count_ops(hi - lo);
    if (acquired + left >= need) {
      hi = mid;
    } else {
      acquired += left;
      lo = mid;
    }
  }
  order.resize(std::min(order.size(), lo + 1));
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

std::vector<IterationRecord> adaptive_loop(const Problem& problem, const LoopOptions& options,
                                           const LoopObserver& observer) {
  MotherTrees trees(problem.domain);
  auto disc = std::make_unique<Discretization>(trees, initial_trial_set(trees), problem,
                                               options.mg_cycles, options.preconditioner);
  std::vector<double> u(disc->x().size(), 0.0);
  double bound = disc->initial_error_bound();
  std::vector<IterationRecord> records;
  for (int it = 0; it < options.max_iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    EstimatorOutput est;
    double total = 0.0;
    for (int inner = 0;; ++inner) {
      if (inner >= options.max_inner) throw std::runtime_error("inner solve loop did not terminate");
      auto ops = op_count();
      auto start = Clock::now();
      const auto res = pcg(*disc, u, bound / 2, 1000);
      rec.solve_ms += ms_since(start);
      rec.opcount_solve += op_count() - ops;
      rec.pcg_iters += res.iterations;
      bound = res.beta;
      ops = op_count();
      start = Clock::now();
      est = disc->estimate(u);
      rec.estimate_ms += ms_since(start);
      rec.opcount_estimate += op_count() - ops;
      total = est.norm + bound;
      if (!(bound > options.xi * total)) break;
    }
    rec.dim_x = disc->dim_x();
    rec.dim_xbar = disc->dim_xbar();
    rec.dim_y = disc->dim_y();
    rec.residual_norm = est.norm;
    rec.beta = bound;

    const bool stop = rec.dim_x >= options.max_dofs || total == 0.0;
    std::vector<std::size_t> marked;
    if (!stop) {
      const auto start = Clock::now();
      for (std::size_t j : dorfler_mark(est.values, options.theta)) marked.push_back(est.slots[j]);
      rec.mark_ms = ms_since(start);
    }
    records.push_back(rec);
    if (observer && !observer(records.back(), *disc, u)) break;
    if (stop) break;

    // The current discretization is released before the next one is built
    // to halve the peak memory.
    const auto start = Clock::now();
    auto next_x = dtree::refine_from_marked(disc->x(), disc->xbar(), marked);
    const auto embed = embed_slots(disc->x(), next_x);
    std::vector<double> next_u(next_x.size(), 0.0);
    for (std::size_t i = 0; i < embed.size(); ++i) next_u[embed[i]] = u[i];
    disc.reset();
    disc = std::make_unique<Discretization>(trees, std::move(next_x), problem, options.mg_cycles,
                                            options.preconditioner);
    u = std::move(next_u);
    bound = total;
    records.back().refine_ms = ms_since(start);
  }
  return records;
}

void write_csv_header(std::ostream& out) {
  out << "iteration,dim_X,dim_Xbar,dim_Y,residual_norm,beta,pcg_iters,solve_ms,estimate_ms,mark_ms,"
         "refine_ms,opcount_solve,opcount_estimate\n";
}

void write_csv_row(std::ostream& out, const IterationRecord& r) {
  const auto old = out.precision(10);
  out << r.iteration << ',' << r.dim_x << ',' << r.dim_xbar << ',' << r.dim_y << ','
      << r.residual_norm << ',' << r.beta << ',' << r.pcg_iters << ',' << r.solve_ms << ','
      << r.estimate_ms << ',' << r.mark_ms << ',' << r.refine_ms << ',' << r.opcount_solve << ','
      << r.opcount_estimate << '\n';
  out.precision(old);
}

}  // namespace stheat::heat
