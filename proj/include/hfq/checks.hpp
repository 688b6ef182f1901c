#pragma once

// Invariant suite shared by the `check` command and the acceptance runner.
// Every check records a residual and the tolerance it is held to.

#include <string>
#include <vector>

#include "hfq/fedosov.hpp"
#include "hfq/mechanics.hpp"

namespace hfq {

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

class CheckSuite {
 public:
  void add(const std::string& name, double residual, double tolerance);
  void fail(const std::string& name, const std::string& why);
  void append(const CheckSuite& other, const std::string& prefix = "");

  const std::vector<CheckResult>& results() const { return results_; }
  const std::vector<std::string>& errors() const { return errors_; }
  bool all_pass() const;
  double worst_ratio() const;  // max residual / tolerance

 private:
  std::vector<CheckResult> results_;
  std::vector<std::string> errors_;
};

// Frames, almost structures, anholonomy and d-connection conditions.
CheckSuite geometry_checks(const Expr& H, const PhasePoint& pt, int order = kGeometryJetOrder);

// Every geometric and quantum object of a constant-coefficient quadratic H vanishes.
CheckSuite flat_checks(const Expr& H, const PhasePoint& pt, int dmax);

// Legendre round trip, flow equivalence, conservation, Poisson evolution.
// start lives on TM; the Hamilton flow starts at its Legendre image.
CheckSuite mechanics_checks(const Expr& H, const Expr& L, const PhasePoint& start, double t_end, double dt);
CheckSuite hamilton_checks(const Expr& H, const PhasePoint& start, double t_end, double dt);

// delta / delta^{-1} / sigma identities on the monomial basis up to Deg max_deg.
CheckSuite wick_operator_checks(const Eigen::MatrixXcd& lambda, int max_deg);
// [D, delta] = (i/v) ad(T) and D^2 = -(i/v) ad(R) on low-degree elements.
CheckSuite commutator_checks(const FedosovState& st);
// Recursion equation, normalisation of r, flatness of the Fedosov connection.
CheckSuite recursion_checks(const FedosovState& st);
// Star-product normalisation, unit and associativity.
CheckSuite star_checks(const FedosovState& st, const Expr& f, const Expr& g, const Expr* h, int vmax);
CheckSuite chern_weyl_checks(const FedosovState& st);

// Stored jet derivatives up to order 3 against central differences.
CheckSuite jet_fd_checks(const Expr& e, const PhasePoint& pt);

// Max relative deviation between jet derivatives and finite differences.
double jet_fd_deviation(const Expr& e, const PhasePoint& pt, int max_order = 3);

}  // namespace hfq
