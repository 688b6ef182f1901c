#include "hfq/families.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace hfq {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  std::string s = os.str();
  return v < 0 ? "(" + s + ")" : s;
}

double param(const FamilyParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

std::string idx(char c, int i) { return std::string(1, c) + std::to_string(i); }

}  // namespace

std::vector<std::string> builtin_family_names() {
  return {"flat", "oscillator", "exp-conformal", "anharmonic", "vielbein-lift"};
}

Family builtin_family(const std::string& name, int n, const FamilyParams& params) {
  if (n < 1) throw InputError("family needs n >= 1");
  Family f;
  f.name = name;
  f.n = n;
  auto sum = [&](auto term) {
    std::string s;
    for (int i = 1; i <= n; ++i) s += (i > 1 ? " + " : "") + term(i);
    return s;
  };
  if (name == "flat") {
    f.hamiltonian = "0.5*(" + sum([](int i) { return idx('p', i) + "^2"; }) + ")";
    f.lagrangian = "0.5*(" + sum([](int i) { return idx('y', i) + "^2"; }) + ")";
  } else if (name == "oscillator") {
    const std::string w2 = num(std::pow(param(params, "omega", 1.0), 2));
    f.hamiltonian = "0.5*(" + sum([&](int i) { return idx('p', i) + "^2 + " + w2 + "*" + idx('x', i) + "^2"; }) + ")";
    f.lagrangian = "0.5*(" + sum([&](int i) { return idx('y', i) + "^2 - " + w2 + "*" + idx('x', i) + "^2"; }) + ")";
  } else if (name == "exp-conformal") {
    const std::string k = num(param(params, "k", 2.0));
    f.hamiltonian = "0.5*exp(" + k + "*x1)*p1^2";
    f.lagrangian = "0.5*exp(-" + k + "*x1)*y1^2";
    for (int i = 2; i <= n; ++i) {
      f.hamiltonian += " + 0.5*" + idx('p', i) + "^2";
      f.lagrangian += " + 0.5*" + idx('y', i) + "^2";
    }
  } else if (name == "anharmonic") {
    if (n != 2) throw InputError("the anharmonic family is defined for n = 2");
    const double q = param(params, "quartic", 0.02);
    f.hamiltonian = "0.5*exp(0.4*x2)*p1^2 + 0.5*(1 + 0.3*x1^2)*p2^2 + 0.1*x1*p1*p2 + " + num(q) +
                    "*p1^4 + 0.5*x1^2";
  } else if (name == "vielbein-lift") {
    if (n != 2) throw InputError("the vielbein-lift family is defined for n = 2");
    const std::string eps = num(param(params, "eps", 0.1));
    f.base_metric = {"1", "0", "0", "1 + x1^2"};
    f.vielbein = {"1 + " + eps + "*p1", "0", "0", "1"};
    // H = 1/2 e^i_k e^j_l g_base^{kl} p_i p_j
    f.hamiltonian = "0.5*(1 + " + eps + "*p1)^2*p1^2 + 0.5*p2^2/(1 + x1^2)";
  } else {
    throw InputError("unknown family '" + name + "'");
  }
  return f;
}

Expr family_hamiltonian(const Family& f) { return parse(f.hamiltonian, f.n, Bundle::Cotangent); }

Expr family_lagrangian(const Family& f) {
  if (f.lagrangian.empty()) throw InputError("family '" + f.name + "' has no closed-form Lagrangian");
  return parse(f.lagrangian, f.n, Bundle::Tangent);
}

std::vector<PhasePoint> sample_points(int n, int count, std::uint64_t seed, Bundle bundle, double base_radius,
                                      double fiber_radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ub(-base_radius, base_radius), uf(-fiber_radius, fiber_radius);
  std::vector<PhasePoint> pts;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd x(n), f(n);
    for (int i = 0; i < n; ++i) x[i] = ub(rng);
    for (int i = 0; i < n; ++i) f[i] = uf(rng);
    pts.emplace_back(x, f, bundle);
  }
  return pts;
}

}  // namespace hfq
