#include <benchmark/benchmark.h>

#include <random>

#include "stheat/heat.hpp"
#include "stheat/op_counter.hpp"
#include "stheat/workloads.hpp"

namespace {

using namespace stheat;

std::vector<double> random_values(std::size_t n) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_EvalFull(benchmark::State& state) {
  trees::TimeMotherTree mother(trees::TimeShape::Binary);
  const auto idx = workloads::uniform_time_tree(mother, static_cast<int>(state.range(0)));
  const auto in = random_values(idx.size());
  std::vector<double> out(idx.size());
  const matvec::TimeOperator op{matvec::TimeForm::Mass, wavelets::Family::ThreePoint,
                                wavelets::Family::Orthonormal};
  for (auto _ : state) {
    matvec::apply(op, matvec::Part::Full, idx, in, idx, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(idx.size()));
}
BENCHMARK(BM_EvalFull)->DenseRange(10, 18, 2)->Unit(benchmark::kMillisecond);

void BM_ApplyTensor(benchmark::State& state) {
  trees::TimeMotherTree time(trees::TimeShape::Binary);
  auto space = space::VertexMotherTree::unit_square();
  const auto t = workloads::graded_double_tree(time, space, static_cast<int>(state.range(0)));
  const auto plan = dtree::make_plan(t, t, wavelets::Family::ThreePoint, wavelets::Family::ThreePoint);
  const auto in = random_values(t.size());
  std::vector<double> out(t.size());
  const dtree::SpaceFiberOperator stiff(space, space::kStiffness);
  for (auto _ : state) {
    std::fill(out.begin(), out.end(), 0.0);
    dtree::apply_tensor(plan, {matvec::TimeForm::Mass, wavelets::Family::ThreePoint, wavelets::Family::ThreePoint},
                        stiff, t, in, t, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.size()));
}
BENCHMARK(BM_ApplyTensor)->DenseRange(8, 16, 2)->Unit(benchmark::kMillisecond);

// One Schur application plus preconditioner on the trial set the adaptive
// loop reaches for the smooth problem.
void BM_SchurStep(benchmark::State& state) {
  heat::LoopOptions options;
  options.max_dofs = static_cast<std::size_t>(state.range(0));
  std::size_t dim = 0;
  heat::adaptive_loop(heat::make_problem("smooth"), options,
                      [&](const heat::IterationRecord& r, const heat::Discretization& d, auto u) {
                        if (r.dim_x < options.max_dofs) return true;
                        dim = d.dim_x();
                        std::vector<double> v(u.begin(), u.end()), out(v.size());
                        for (auto _ : state) {
                          d.apply_schur(v, out);
                          d.apply_kx(out);
                          benchmark::DoNotOptimize(out.data());
                        }
                        return false;
                      });
  state.counters["dim_x"] = static_cast<double>(dim);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(dim));
}
BENCHMARK(BM_SchurStep)->RangeMultiplier(4)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
