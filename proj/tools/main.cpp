#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "stheat/heat.hpp"
#include "stheat/workloads.hpp"

namespace {

struct Config {
  std::string problem;
  double theta = 0.5;
  double xi = 0.5;
  std::size_t max_dofs = 10000;
  int mg_cycles = 2;
  unsigned seed = 1;
  std::string out = "-";
  std::string mode = "adaptive";
  std::string dump_mesh;
};

int run_adaptive(const Config& cfg, std::ostream& out) {
  using namespace stheat::heat;
  LoopOptions options;
  options.theta = cfg.theta;
  options.xi = cfg.xi;
  options.max_dofs = cfg.max_dofs;
  options.mg_cycles = cfg.mg_cycles;
  // The mother trees die with the loop, so the mesh text of the latest
  // iteration is kept instead.
  std::string mesh;
  const auto records = adaptive_loop(
      make_problem(cfg.problem), options,
      [&](const IterationRecord&, const Discretization& d, std::span<const double>) {
        if (!cfg.dump_mesh.empty()) {
          auto& space = dynamic_cast<stheat::space::VertexMotherTree&>(d.x().mother(1));
          std::ostringstream text;
          stheat::space::dump_mesh(stheat::space::triangulate(space, d.x().projection1()), text);
          mesh = std::move(text).str();
        }
        return true;
      });
  // Rows are written at the end because refine_ms is only known then.
  write_csv_header(out);
  for (const auto& r : records) write_csv_row(out, r);
  if (!cfg.dump_mesh.empty()) {
    std::ofstream f(cfg.dump_mesh);
    if (!f) throw std::runtime_error("cannot open " + cfg.dump_mesh);
    f << mesh;
  }
  return 0;
}

int run_kernel_bench(const Config& cfg, std::ostream& out) {
  const auto samples = stheat::workloads::kernel_bench(1000, cfg.max_dofs, cfg.seed);
  out << "kernel,tree,size,ops,ops_per_size,ms\n";
  for (const auto& s : samples)
    out << s.kernel << ',' << s.tree << ',' << s.size << ',' << s.ops << ','
        << static_cast<double>(s.ops) / static_cast<double>(s.size) << ',' << s.ms << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  CLI::App app{"Adaptive space-time solver for the heat equation"};
  std::vector<std::string> names;
  for (auto n : stheat::heat::problem_names()) names.emplace_back(n);
  auto* problem = app.add_option("--problem", cfg.problem, "Model problem")
                      ->check(CLI::IsMember(names));
  app.add_option("--theta", cfg.theta, "Marking parameter in (0,1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--xi", cfg.xi, "Solve accuracy parameter in (0,1)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--max-dofs", cfg.max_dofs,
                 "Stop once dim X reaches this (kernel-bench: largest size)")
      ->capture_default_str();
  app.add_option("--mg-cycles", cfg.mg_cycles, "V-cycles per preconditioner block")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for random benchmark data")->capture_default_str();
  app.add_option("--out", cfg.out, "CSV output path, - for stdout")->capture_default_str();
  app.add_option("--mode", cfg.mode, "What to run")
      ->check(CLI::IsMember({"adaptive", "kernel-bench"}))
      ->capture_default_str();
  app.add_option("--dump-mesh", cfg.dump_mesh, "Write the final spatial mesh to this file");

  try {
    app.parse(argc, argv);
    if (cfg.mode == "adaptive" && problem->count() == 0)
      throw CLI::RequiredError("--problem");
    if (cfg.theta <= 0.0) throw CLI::ValidationError("--theta", "must be positive");
    if (cfg.xi <= 0.0 || cfg.xi >= 1.0) throw CLI::ValidationError("--xi", "must lie in (0,1)");
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (cfg.out != "-") {
      file.open(cfg.out);
      if (!file) throw std::runtime_error("cannot open " + cfg.out);
      out = &file;
    }
    return cfg.mode == "adaptive" ? run_adaptive(cfg, *out) : run_kernel_bench(cfg, *out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
