#include "hfq/mechanics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "hfq/geometry.hpp"

namespace hfq {

namespace {

Eigen::VectorXd fiber_gradient(const RJet& j, int n) {
  Eigen::VectorXd g(n);
  for (int a = 0; a < n; ++a) g[a] = j.partial(n + a).value();
  return g;
}

Eigen::VectorXd base_gradient(const RJet& j, int n) {
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = j.partial(i).value();
  return g;
}

void check_regular(const RJet& j, int n, Bundle b) { (void)fundamental_tensor(j, n, b); }

double energy_at(const Expr& gen, const PhasePoint& pt) {
  RJet j = eval_jet(gen, pt, 1);
  if (pt.bundle == Bundle::Cotangent) return j.value();
  return fiber_gradient(j, pt.n()).dot(pt.fiber) - j.value();
}

template <typename Rhs>
Trajectory rk4(const Expr& gen, const PhasePoint& start, double t_end, double dt, Rhs rhs) {
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw InputError("flow needs dt > 0 and t_end >= 0");
  const Bundle b = start.bundle;
  // uniform steps h <= dt landing exactly on t_end
  const long steps = std::max(0L, static_cast<long>(std::ceil(t_end / dt - 1e-9)));
  const double h = steps ? t_end / steps : dt;
  Trajectory tr;
  tr.bundle = b;
  tr.times.reserve(steps + 1);
  Eigen::VectorXd u = start.coords();
  auto record = [&](double t) {
    PhasePoint pt = PhasePoint::from_coords(u, b);
    tr.times.push_back(t);
    tr.energy.push_back(energy_at(gen, pt));
    tr.states.push_back(std::move(pt));
  };
  record(0.0);
  for (long s = 0; s < steps; ++s) {
    Eigen::VectorXd k1 = rhs(u);
    Eigen::VectorXd k2 = rhs(u + 0.5 * h * k1);
    Eigen::VectorXd k3 = rhs(u + 0.5 * h * k2);
    Eigen::VectorXd k4 = rhs(u + h * k3);
    u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    record(s + 1 == steps ? t_end : (s + 1) * h);
  }
  return tr;
}

}  // namespace

LegendreResult legendre_to_hamiltonian(const Expr& L, const PhasePoint& pt) {
  if (pt.bundle != Bundle::Tangent) throw InputError("Legendre transform of L needs a tangent point");
  const int n = pt.n();
  RJet j = eval_jet(L, pt, 2);
  check_regular(j, n, Bundle::Tangent);
  LegendreResult r;
  r.fiber = fiber_gradient(j, n);
  r.value = r.fiber.dot(pt.fiber) - j.value();
  return r;
}

LegendreResult legendre_to_lagrangian(const Expr& H, const PhasePoint& pt) {
  if (pt.bundle != Bundle::Cotangent) throw InputError("Legendre transform of H needs a cotangent point");
  const int n = pt.n();
  RJet j = eval_jet(H, pt, 2);
  check_regular(j, n, Bundle::Cotangent);
  LegendreResult r;
  r.fiber = fiber_gradient(j, n);
  r.value = r.fiber.dot(pt.fiber) - j.value();
  return r;
}

Eigen::VectorXd solve_fiber_gradient(const Expr& gen, const Eigen::VectorXd& x, const Eigen::VectorXd& target,
                                     const Eigen::VectorXd& guess) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd f = guess;
  for (int it = 0; it < kNewtonMaxIterations; ++it) {
    PhasePoint pt(x, f, gen.bundle());
    RJet j = eval_jet(gen, pt, 2);
    FundamentalTensor g = fundamental_tensor(j, n, gen.bundle());
    Eigen::VectorXd res = fiber_gradient(j, n) - target;
    if (res.lpNorm<Eigen::Infinity>() <= kNewtonTolerance) return f;
    f -= g.hessian.values().fullPivLu().solve(res);
    if (!f.allFinite()) break;
  }
  PhasePoint pt(x, f, gen.bundle());
  Eigen::VectorXd res = fiber_gradient(eval_jet(gen, pt, 1), n) - target;
  if (f.allFinite() && res.lpNorm<Eigen::Infinity>() <= kNewtonTolerance) return f;
  throw NewtonDivergence("Newton iteration for the fiber Legendre map did not converge");
}

Trajectory hamilton_flow(const Expr& H, const PhasePoint& start, double t_end, double dt) {
  if (start.bundle != Bundle::Cotangent) throw InputError("Hamilton flow needs a cotangent start point");
  const int n = start.n();
  return rk4(H, start, t_end, dt, [&](const Eigen::VectorXd& u) {
    RJet j = eval_jet(H, PhasePoint::from_coords(u, Bundle::Cotangent), 1);
    Eigen::VectorXd du(2 * n);
    du << fiber_gradient(j, n), -base_gradient(j, n);
    return du;
  });
}

Trajectory lagrange_flow(const Expr& L, const PhasePoint& start, double t_end, double dt) {
  if (start.bundle != Bundle::Tangent) throw InputError("Lagrange flow needs a tangent start point");
  const int n = start.n();
  return rk4(L, start, t_end, dt, [&](const Eigen::VectorXd& u) {
    PhasePoint pt = PhasePoint::from_coords(u, Bundle::Tangent);
    std::vector<RJet> G = semi_spray(L, pt, 2);
    Eigen::VectorXd du(2 * n);
    for (int i = 0; i < n; ++i) {
      du[i] = u[n + i];
      du[n + i] = -2.0 * G[i].value();
    }
    return du;
  });
}

double poisson_flow_check(const Expr& H, const Expr& f, const Trajectory& traj) {
  double worst = 0.0;
  const std::size_t m = traj.size();
  if (m < 3) return 0.0;
  std::vector<double> fv(m);
  for (std::size_t k = 0; k < m; ++k) {
    Eigen::VectorXd u = traj.states[k].coords();
    fv[k] = evaluate(f, std::vector<double>(u.data(), u.data() + u.size()));
  }
  for (std::size_t k = 1; k + 1 < m; ++k) {
    double fd = (fv[k + 1] - fv[k - 1]) / (traj.times[k + 1] - traj.times[k - 1]);
    double br = poisson_bracket(H, f, traj.states[k], 1).value();
    worst = std::max(worst, std::abs(fd - br));
  }
  return worst;
}

double flow_distance(const Expr& L, const Trajectory& lag, const Trajectory& ham) {
  if (lag.size() != ham.size()) throw InputError("trajectories differ in length");
  double worst = 0.0;
  for (std::size_t k = 0; k < lag.size(); ++k) {
    LegendreResult r = legendre_to_hamiltonian(L, lag.states[k]);
    const PhasePoint& h = ham.states[k];
    worst = std::max(worst, (lag.states[k].base - h.base).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (r.fiber - h.fiber).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

double energy_drift_rate(const Trajectory& traj) {
  if (traj.size() < 2) return 0.0;
  double worst = 0.0;
  for (double e : traj.energy) worst = std::max(worst, std::abs(e - traj.energy.front()));
  return worst / (traj.times.back() - traj.times.front());
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  const int n = traj.states.empty() ? 0 : traj.states.front().n();
  const char f = fiber_letter(traj.bundle);
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= n; ++i) os << ',' << f << i;
  os << (traj.bundle == Bundle::Cotangent ? ",H" : ",E") << '\n';
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < traj.size(); ++k) {
    num(traj.times[k]);
    for (int i = 0; i < n; ++i) os << ',', num(traj.states[k].base[i]);
    for (int i = 0; i < n; ++i) os << ',', num(traj.states[k].fiber[i]);
    os << ',';
    num(traj.energy[k]);
    os << '\n';
  }
}

}  // namespace hfq
