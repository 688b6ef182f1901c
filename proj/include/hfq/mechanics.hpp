#pragma once

// Legendre transforms and RK4 flows for Hamilton and Euler-Lagrange dynamics.

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "hfq/expr.hpp"

namespace hfq {

struct Trajectory {
  Bundle bundle = Bundle::Cotangent;
  std::vector<double> times;
  std::vector<PhasePoint> states;
  std::vector<double> energy;  // H on T*M, y.dL/dy - L on TM

  std::size_t size() const { return times.size(); }
};

struct LegendreResult {
  Eigen::VectorXd fiber;  // p for L -> H, y for H -> L
  double value = 0.0;     // H or L at the transformed point
};

inline constexpr double kNewtonTolerance = 1e-12;
inline constexpr int kNewtonMaxIterations = 50;

// p = dL/dy at a tangent point, H = p.y - L.
LegendreResult legendre_to_hamiltonian(const Expr& L, const PhasePoint& pt_tm);
// y = dH/dp at a cotangent point, L = p.y - H.
LegendreResult legendre_to_lagrangian(const Expr& H, const PhasePoint& pt_ctm);

// Newton solve of d(gen)/d(fiber)(x, f) = target for f, starting from guess.
Eigen::VectorXd solve_fiber_gradient(const Expr& gen, const Eigen::VectorXd& x, const Eigen::VectorXd& target,
                                     const Eigen::VectorXd& guess);

// Uniform steps of t_end / ceil(t_end / dt), so the last sample sits at t_end.
Trajectory hamilton_flow(const Expr& H, const PhasePoint& start, double t_end, double dt);
Trajectory lagrange_flow(const Expr& L, const PhasePoint& start, double t_end, double dt);

// Max over interior samples of |df/dt (central difference) - {H, f}|.
double poisson_flow_check(const Expr& H, const Expr& f, const Trajectory& traj);

// Sup distance between the Legendre image (x, dL/dy) of a Lagrange trajectory
// and a Hamilton trajectory sampled at the same times.
double flow_distance(const Expr& L, const Trajectory& lagrange, const Trajectory& hamilton);

// max |E(t) - E(0)| / t_end
double energy_drift_rate(const Trajectory& traj);

void write_csv(std::ostream& os, const Trajectory& traj);

}  // namespace hfq
