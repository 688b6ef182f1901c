#include <doctest.h>

#include "hfq/families.hpp"
#include "hfq/geometry.hpp"

using namespace hfq;

namespace {

double at(const Expr& e, const PhasePoint& p) {
  Eigen::VectorXd u = p.coords();
  return evaluate(e, std::vector<double>(u.data(), u.data() + u.size()));
}

}  // namespace

TEST_CASE("builtin names and generators") {
  const std::vector<std::string> names = builtin_family_names();
  CHECK(names.size() == 5);
  for (const auto& name : names) {
    Family f = builtin_family(name, 2);
    CHECK(f.name == name);
    CHECK(f.n == 2);
    CHECK_NOTHROW(family_hamiltonian(f));
  }
  CHECK(builtin_family("flat", 3).hamiltonian == "0.5*(p1^2 + p2^2 + p3^2)");
  CHECK(builtin_family("oscillator", 1, {{"omega", 2.0}}).hamiltonian == "0.5*(p1^2 + 4*x1^2)");
  CHECK(builtin_family("exp-conformal", 1, {{"k", -1.0}}).lagrangian == "0.5*exp(-(-1)*x1)*y1^2");
  CHECK(builtin_family("vielbein-lift", 2).vielbein.size() == 4);
  CHECK(builtin_family("vielbein-lift", 2).base_metric.size() == 4);
}

TEST_CASE("family errors") {
  CHECK_THROWS_AS(builtin_family("nonesuch", 2), InputError);
  CHECK_THROWS_AS(builtin_family("flat", 0), InputError);
  CHECK_THROWS_AS(builtin_family("anharmonic", 3), InputError);
  CHECK_THROWS_AS(builtin_family("vielbein-lift", 1), InputError);
  CHECK_THROWS_AS(family_lagrangian(builtin_family("anharmonic", 2)), InputError);
}

TEST_CASE("Legendre duals of the closed-form families") {
  for (const char* name : {"flat", "oscillator", "exp-conformal"}) {
    Family f = builtin_family(name, 2);
    Expr H = family_hamiltonian(f), L = family_lagrangian(f);
    for (const auto& q : sample_points(2, 3, 2)) {
      // H(x, p) + L(x, y) = p.y at y = dH/dp
      RJet h = eval_jet(H, q, 1);
      Eigen::VectorXd y(2);
      for (int a = 0; a < 2; ++a) y[a] = h.derivative(MultiIndex::unit(4, 2 + a));
      const double l = at(L, PhasePoint(q.base, y, Bundle::Tangent));
      INFO(name);
      CHECK(h.value() + l == doctest::Approx(q.fiber.dot(y)).epsilon(1e-13));
    }
  }
}

TEST_CASE("vielbein-lift generator matches its lift") {
  Family f = builtin_family("vielbein-lift", 2, {{"eps", 0.2}});
  std::vector<std::vector<Expr>> g(2, std::vector<Expr>(2)), e(2, std::vector<Expr>(2));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      g[i][j] = parse(f.base_metric[2 * i + j], 2, Bundle::Cotangent);
      e[i][j] = parse(f.vielbein[2 * i + j], 2, Bundle::Cotangent);
    }
  for (const auto& q : sample_points(2, 3, 9)) {
    FundamentalTensor lift = vielbein_lift(g, e, q);
    // H = g^{ij}(x, p) p_i p_j / 2 with the lifted metric
    const double H = 0.5 * q.fiber.dot(lift.hessian.values() * q.fiber);
    CHECK(at(family_hamiltonian(f), q) == doctest::Approx(H).epsilon(1e-14));
  }
}

TEST_CASE("sample points are deterministic and boxed") {
  auto a = sample_points(2, 20, 42), b = sample_points(2, 20, 42), c = sample_points(2, 20, 43);
  CHECK(a.size() == 20);
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].coords() == b[k].coords());
    differs |= a[k].coords() != c[k].coords();
    CHECK(a[k].base.cwiseAbs().maxCoeff() <= 0.5);
    CHECK(a[k].fiber.cwiseAbs().maxCoeff() <= 0.8);
    CHECK(a[k].bundle == Bundle::Cotangent);
  }
  CHECK(differs);
  for (const auto& p : sample_points(1, 5, 1, Bundle::Tangent, 0.1, 0.2)) {
    CHECK(p.bundle == Bundle::Tangent);
    CHECK(std::abs(p.base[0]) <= 0.1);
    CHECK(std::abs(p.fiber[0]) <= 0.2);
  }
}
