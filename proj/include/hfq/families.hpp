#pragma once

// Builtin generating functions used by the CLI and the test suites.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hfq/expr.hpp"

namespace hfq {

struct Family {
  std::string name;
  int n = 0;
  std::string hamiltonian;   // DSL text on T*M
  std::string lagrangian;    // Legendre dual on TM, empty if not known in closed form
  // vielbein-lift only: entries of g_base(x) and e(x, p), row-major
  std::vector<std::string> base_metric, vielbein;
};

using FamilyParams = std::map<std::string, double>;

// flat, oscillator, exp-conformal, anharmonic, vielbein-lift.
Family builtin_family(const std::string& name, int n, const FamilyParams& params = {});
std::vector<std::string> builtin_family_names();

Expr family_hamiltonian(const Family& f);
Expr family_lagrangian(const Family& f);  // throws InputError if none

// Deterministic sample points in a box where every builtin is regular.
std::vector<PhasePoint> sample_points(int n, int count, std::uint64_t seed, Bundle bundle = Bundle::Cotangent,
                                      double base_radius = 0.5, double fiber_radius = 0.8);

}  // namespace hfq
