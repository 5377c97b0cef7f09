#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stheat/heat.hpp"

namespace stheat::heat {

namespace {

double bubble(double x, double y) { return x * (1 - x) * y * (1 - y); }

Problem smooth() {
  Problem p;
  p.name = "smooth";
  p.domain = Domain::UnitSquare;
  p.exact = [](double t, double x, double y) { return (1 + t * t) * bubble(x, y); };
  p.u0 = [](double x, double y) { return bubble(x, y); };
  p.g = [](double t, double x, double y) {
    return 2 * t * bubble(x, y) + (1 + t * t) * 2 * (y * (1 - y) + x * (1 - x));
  };
  return p;
}

// u = b(x, y) exp(-100 q), q = (x - t)^2 + (y - t)^2.
Problem moving_peak() {
  Problem p;
  p.name = "moving-peak";
  p.domain = Domain::UnitSquare;
  p.exact = [](double t, double x, double y) {
    const double q = (x - t) * (x - t) + (y - t) * (y - t);
    return bubble(x, y) * std::exp(-100 * q);
  };
  p.u0 = [](double x, double y) { return bubble(x, y) * std::exp(-100 * (x * x + y * y)); };
  p.g = [](double t, double x, double y) {
    const double dx = x - t, dy = y - t;
    const double e = std::exp(-100 * (dx * dx + dy * dy));
    const double b = bubble(x, y);
    const double bx = (1 - 2 * x) * y * (1 - y);
    const double by = x * (1 - x) * (1 - 2 * y);
    const double lap_b = -2 * (y * (1 - y) + x * (1 - x));
    const double ex = -200 * dx, ey = -200 * dy;  // grad e / e
    const double lap_e = ex * ex + ey * ey - 400;  // (Laplace e) / e
    const double ut = 200 * (dx + dy) * b;
    const double lap = lap_b + 2 * (bx * ex + by * ey) + b * lap_e;
    return e * (ut - lap);
  };
  return p;
}

Problem cylinder() {
  Problem p;
  p.name = "cylinder";
  p.domain = Domain::LShape;
  p.u0 = [](double, double) { return 0.0; };
  p.g = [](double t, double x, double y) { return x * x + y * y < 0.25 ? t : 0.0; };
  return p;
}

Problem singular() {
  Problem p;
  p.name = "singular";
  p.domain = Domain::LShape;
  p.u0 = [](double, double) { return 1.0; };
  p.g = [](double, double, double) { return 0.0; };
  return p;
}

constexpr std::array<std::string_view, 4> kNames{"smooth", "moving-peak", "cylinder", "singular"};

}  // namespace

Problem make_problem(std::string_view name) {
  if (name == "smooth") return smooth();
  if (name == "moving-peak") return moving_peak();
  if (name == "cylinder") return cylinder();
  if (name == "singular") return singular();
  throw std::invalid_argument("unknown problem: " + std::string(name));
}

std::span<const std::string_view> problem_names() { return kNames; }

MotherTrees::MotherTrees(Domain domain)
    : space(domain == Domain::UnitSquare ? space::VertexMotherTree::unit_square()
                                         : space::VertexMotherTree::l_shape()) {}

}  // namespace stheat::heat
