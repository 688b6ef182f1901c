#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hfq/families.hpp"
#include "hfq/mechanics.hpp"

using namespace hfq;
using doctest::Approx;

namespace {

PhasePoint pt(std::vector<double> x, std::vector<double> f, Bundle b) {
  return PhasePoint(Eigen::Map<Eigen::VectorXd>(x.data(), x.size()), Eigen::Map<Eigen::VectorXd>(f.data(), f.size()), b);
}

Expr oscillator_h(double w) { return family_hamiltonian(builtin_family("oscillator", 1, {{"omega", w}})); }
Expr oscillator_l(double w) { return family_lagrangian(builtin_family("oscillator", 1, {{"omega", w}})); }

}  // namespace

TEST_CASE("Legendre transform examples") {
  Expr L = parse("0.5*exp(-2*x1)*y1^2", 1, Bundle::Tangent);
  LegendreResult r = legendre_to_hamiltonian(L, pt({0.1}, {0.3}, Bundle::Tangent));
  CHECK(r.fiber[0] == Approx(std::exp(-0.2) * 0.3).epsilon(1e-14));
  CHECK(r.value == Approx(0.5 * std::exp(-0.2) * 0.09).epsilon(1e-14));

  Expr H = parse("0.5*exp(2*x1)*p1^2", 1, Bundle::Cotangent);
  LegendreResult b = legendre_to_lagrangian(H, pt({0.1}, {r.fiber[0]}, Bundle::Cotangent));
  CHECK(b.fiber[0] == Approx(0.3).epsilon(1e-13));
  CHECK(b.value == Approx(0.5 * std::exp(-0.2) * 0.09).epsilon(1e-13));

  // H = p.y - L for the oscillator: the potential flips sign
  LegendreResult o = legendre_to_hamiltonian(oscillator_l(2.0), pt({0.5}, {1.0}, Bundle::Tangent));
  CHECK(o.fiber[0] == Approx(1.0));
  CHECK(o.value == Approx(0.5 + 0.5 * 4.0 * 0.25));

  CHECK_THROWS_AS(legendre_to_hamiltonian(L, pt({0.1}, {0.3}, Bundle::Cotangent)), InputError);
}

TEST_CASE("Newton inversion of the fiber gradient") {
  Expr H = family_hamiltonian(builtin_family("anharmonic", 2));
  for (const auto& q : sample_points(2, 6, 3)) {
    Eigen::VectorXd target = q.fiber * 0.7;
    Eigen::VectorXd p = solve_fiber_gradient(H, q.base, target, Eigen::VectorXd::Zero(2));
    RJet h = eval_jet(H, PhasePoint(q.base, p, Bundle::Cotangent), 1);
    CHECK(std::abs(h.derivative(MultiIndex{0, 0, 1, 0}) - target[0]) < 1e-11);
    CHECK(std::abs(h.derivative(MultiIndex{0, 0, 0, 1}) - target[1]) < 1e-11);
  }
  CHECK_THROWS(solve_fiber_gradient(parse("x1*p1 + p1", 1, Bundle::Cotangent), Eigen::VectorXd::Constant(1, 0.2),
                                    Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Zero(1)));
}

TEST_CASE("RK4 time grid lands on t_end") {
  Trajectory t = hamilton_flow(oscillator_h(1.0), pt({1.0}, {0.0}, Bundle::Cotangent), 1.0, 0.3);
  CHECK(t.size() == 5);
  CHECK(t.times.front() == 0.0);
  CHECK(t.times.back() == 1.0);
  Trajectory e = hamilton_flow(oscillator_h(1.0), pt({1.0}, {0.0}, Bundle::Cotangent), 1.0, 0.25);
  CHECK(e.size() == 5);
  CHECK(e.times[2] == 0.5);
  CHECK_THROWS_AS(hamilton_flow(oscillator_h(1.0), pt({1.0}, {0.0}, Bundle::Cotangent), 1.0, 0.0), InputError);
}

TEST_CASE("harmonic oscillator returns after one period") {
  const double w = 1.0;
  Trajectory t = hamilton_flow(oscillator_h(w), pt({0.3}, {0.2}, Bundle::Cotangent), 2 * M_PI, 1e-3);
  CHECK(std::abs(t.states.back().base[0] - 0.3) < 1e-6);
  CHECK(std::abs(t.states.back().fiber[0] - 0.2) < 1e-6);
  // closed form x(t) = x0 cos(wt) + p0/w sin(wt)
  const double w2 = 1.5;
  Trajectory c = hamilton_flow(oscillator_h(w2), pt({0.3}, {0.2}, Bundle::Cotangent), 3.0, 1e-3);
  double dev = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double s = c.times[k];
    dev = std::max(dev, std::abs(c.states[k].base[0] - (0.3 * std::cos(w2 * s) + 0.2 / w2 * std::sin(w2 * s))));
    dev = std::max(dev, std::abs(c.states[k].fiber[0] - (-0.3 * w2 * std::sin(w2 * s) + 0.2 * std::cos(w2 * s))));
  }
  CHECK(dev < 1e-9);
  CHECK(energy_drift_rate(c) < 1e-10);
}

TEST_CASE("Euler-Lagrange flow of the oscillator") {
  const double w = 1.5;
  Trajectory t = lagrange_flow(oscillator_l(w), pt({0.3}, {0.2}, Bundle::Tangent), 3.0, 1e-3);
  CHECK(t.bundle == Bundle::Tangent);
  double dev = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double s = t.times[k];
    dev = std::max(dev, std::abs(t.states[k].base[0] - (0.3 * std::cos(w * s) + 0.2 / w * std::sin(w * s))));
  }
  CHECK(dev < 1e-9);
  // E = y dL/dy - L = (y^2 + w^2 x^2) / 2
  CHECK(t.energy.front() == Approx(0.5 * (0.04 + w * w * 0.09)));
}

TEST_CASE("free particle moves on straight lines") {
  Expr H = family_hamiltonian(builtin_family("flat", 2));
  Trajectory t = hamilton_flow(H, pt({0.1, -0.2}, {0.5, 0.25}, Bundle::Cotangent), 2.0, 0.1);
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(t.states[k].base[0] == Approx(0.1 + 0.5 * t.times[k]).epsilon(1e-14));
    CHECK(t.states[k].base[1] == Approx(-0.2 + 0.25 * t.times[k]).epsilon(1e-14));
    CHECK(t.states[k].fiber[0] == 0.5);
  }
}

TEST_CASE("energy conservation over a long run") {
  for (const char* fam : {"exp-conformal", "anharmonic", "vielbein-lift"}) {
    Expr H = family_hamiltonian(builtin_family(fam, 2));
    Trajectory t = hamilton_flow(H, sample_points(2, 1, 5).front(), 10.0, 1e-3);
    INFO(fam);
    CHECK(energy_drift_rate(t) < 1e-8);
  }
}

TEST_CASE("Lagrange and Hamilton flows agree") {
  // exp-conformal geodesics leave every compact set at t = exp(-x0) / sqrt(2E) = 1 / y0
  // when y0 > 0, so the starts keep y1 below 1/5 or negative
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> starts = {
      {{0.3, -0.1}, {0.15, 0.4}}, {{-0.2, 0.4}, {-0.5, -0.3}}, {{0.1, 0.0}, {0.0, 0.7}}};
  for (const char* fam : {"oscillator", "exp-conformal"}) {
    Family f = builtin_family(fam, 2);
    Expr H = family_hamiltonian(f), L = family_lagrangian(f);
    for (const auto& [x, y] : starts) {
      PhasePoint s = pt(x, y, Bundle::Tangent);
      Trajectory tl = lagrange_flow(L, s, 5.0, 1e-3);
      LegendreResult lr = legendre_to_hamiltonian(L, s);
      Trajectory th = hamilton_flow(H, PhasePoint(s.base, lr.fiber, Bundle::Cotangent), 5.0, 1e-3);
      INFO(fam);
      CHECK(flow_distance(L, tl, th) < 1e-5);
      CHECK(std::abs(tl.energy.front() - th.energy.front()) < 1e-12);
      CHECK(energy_drift_rate(tl) < 1e-8);
    }
  }
}

TEST_CASE("observables evolve by the Poisson bracket") {
  Expr H = family_hamiltonian(builtin_family("anharmonic", 2));
  Trajectory t = hamilton_flow(H, sample_points(2, 1, 8).front(), 2.0, 1e-3);
  CHECK(poisson_flow_check(H, H, t) < 1e-8);
  for (const char* f : {"x1", "p2", "x1*p2 + sin(x2)"}) {
    INFO(f);
    CHECK(poisson_flow_check(H, parse(f, 2, Bundle::Cotangent), t) < 1e-6);
  }
  Trajectory o = hamilton_flow(oscillator_h(1.0), pt({0.3}, {0.2}, Bundle::Cotangent), 5.0, 1e-3);
  CHECK(poisson_flow_check(oscillator_h(1.0), parse("x1*p1", 1, Bundle::Cotangent), o) < 1e-5);
}

TEST_CASE("trajectory CSV") {
  Trajectory t = hamilton_flow(oscillator_h(1.0), pt({1.0}, {0.0}, Bundle::Cotangent), 0.5, 0.25);
  std::ostringstream os;
  write_csv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,x1,p1,H");
  std::getline(is, line);
  CHECK(line == "0,1,0,0.5");
  int rows = 1;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3);

  Trajectory l = lagrange_flow(oscillator_l(1.0), pt({1.0}, {0.0}, Bundle::Tangent), 0.5, 0.25);
  std::ostringstream ol;
  write_csv(ol, l);
  CHECK(ol.str().rfind("t,x1,y1,E\n", 0) == 0);
}
