#include <doctest.h>

#include <cmath>
#include <limits>

#include "hfq/checks.hpp"
#include "hfq/families.hpp"

using namespace hfq;

namespace {

void require_pass(const CheckSuite& s) {
  for (const auto& r : s.results()) {
    INFO(r.name << " residual " << r.residual << " tolerance " << r.tolerance);
    CHECK(r.pass);
  }
  for (const auto& e : s.errors()) FAIL(e);
  CHECK(s.all_pass());
}

}  // namespace

TEST_CASE("suite bookkeeping") {
  CheckSuite s;
  s.add("a", 1e-9, 1e-8);
  s.add("b", 0.0, 0.0);
  CHECK(s.all_pass());
  CHECK(s.worst_ratio() == doctest::Approx(0.1));
  s.add("c", std::numeric_limits<double>::quiet_NaN(), 1.0);
  CHECK_FALSE(s.results().back().pass);
  CHECK_FALSE(s.all_pass());

  CheckSuite t;
  t.add("exact", 1e-20, 0.0);
  CHECK_FALSE(t.all_pass());
  CHECK(std::isinf(t.worst_ratio()));

  CheckSuite u;
  u.fail("broken", "why");
  CHECK(u.errors().front() == "broken: why");
  CheckSuite w;
  w.add("x", 2.0, 1.0);
  w.append(u, "pre.");
  CHECK(w.results().size() == 2);
  CHECK(w.results()[1].name == "pre.broken");
  CHECK(w.errors().front() == "pre.broken: why");
  CHECK(std::isinf(w.worst_ratio()));
}

TEST_CASE("geometry and jet suites on every builtin family") {
  for (const auto& name : builtin_family_names()) {
    Expr H = family_hamiltonian(builtin_family(name, 2));
    for (const auto& q : sample_points(2, 2, 77)) {
      INFO(name);
      require_pass(geometry_checks(H, q));
      require_pass(jet_fd_checks(H, q));
    }
  }
}

TEST_CASE("flat suite") {
  Expr H = family_hamiltonian(builtin_family("flat", 2));
  CheckSuite s = flat_checks(H, sample_points(2, 1, 1).front(), 4);
  CHECK(s.results().size() > 10);
  require_pass(s);
  // a curved generator is caught
  CHECK_FALSE(flat_checks(family_hamiltonian(builtin_family("anharmonic", 2)), sample_points(2, 1, 1).front(), 4)
                  .all_pass());
}

TEST_CASE("mechanics suites") {
  Family f = builtin_family("exp-conformal", 2);
  PhasePoint start(Eigen::Vector2d(0.2, -0.1), Eigen::Vector2d(-0.3, 0.4), Bundle::Tangent);
  require_pass(mechanics_checks(family_hamiltonian(f), family_lagrangian(f), start, 2.0, 1e-3));
  require_pass(hamilton_checks(family_hamiltonian(builtin_family("anharmonic", 2)), sample_points(2, 1, 4).front(),
                               2.0, 1e-3));
}

TEST_CASE("quantization suites") {
  const Expr H = family_hamiltonian(builtin_family("vielbein-lift", 2));
  FedosovState st(H, sample_points(2, 1, 5).front(), 5);
  require_pass(wick_operator_checks(st.frame().lambda, 5));
  require_pass(recursion_checks(st));
  require_pass(commutator_checks(st));
  const Expr f = parse("x1*p1 + p2", 2, Bundle::Cotangent), g = parse("p1^2 + x2", 2, Bundle::Cotangent);
  require_pass(star_checks(st, f, g, &f, 2));
  require_pass(chern_weyl_checks(st));
}

TEST_CASE("math errors become failed checks") {
  const PhasePoint q(Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(0.3, 0.4), Bundle::Cotangent);
  CheckSuite s = geometry_checks(parse("x1*p1 + p2", 2, Bundle::Cotangent), q);
  CHECK_FALSE(s.all_pass());
  REQUIRE_FALSE(s.errors().empty());
  CHECK(s.errors().front().find("singular") != std::string::npos);
}
