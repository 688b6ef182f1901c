#include "hfq/checks.hpp"

#include <cmath>
#include <functional>

namespace hfq {

void CheckSuite::add(const std::string& name, double residual, double tolerance) {
  bool ok = std::isfinite(residual) && residual <= tolerance;
  results_.push_back({name, residual, tolerance, ok});
}

void CheckSuite::fail(const std::string& name, const std::string& why) {
  results_.push_back({name, std::numeric_limits<double>::infinity(), 0.0, false});
  errors_.push_back(name + ": " + why);
}

void CheckSuite::append(const CheckSuite& other, const std::string& prefix) {
  for (auto r : other.results_) {
    r.name = prefix + r.name;
    results_.push_back(r);
  }
  for (const auto& e : other.errors_) errors_.push_back(prefix + e);
}

bool CheckSuite::all_pass() const {
  for (const auto& r : results_)
    if (!r.pass) return false;
  return errors_.empty();
}

double CheckSuite::worst_ratio() const {
  double w = 0.0;
  for (const auto& r : results_) {
    if (r.tolerance > 0.0)
      w = std::max(w, r.residual / r.tolerance);
    else if (r.residual > 0.0)
      w = std::numeric_limits<double>::infinity();
  }
  return w;
}

namespace {

template <typename D>
double dense_max(const Eigen::MatrixBase<D>& m) {
  return m.size() ? static_cast<double>(m.cwiseAbs().maxCoeff()) : 0.0;
}

double jet_max(const RJetMatrix& m) {
  double w = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) w = std::max(w, std::abs(m(i, j).value()));
  return w;
}

double ct_max(const CurvatureTorsion& ct) {
  return std::max({max_abs(ct.Omega), max_abs(ct.T), max_abs(ct.S), max_abs(ct.P), max_abs(ct.R), max_abs(ct.Pc),
                   max_abs(ct.Sc), max_abs(ct.W)});
}

// Run body, turning library errors into a failed check.
void guarded(CheckSuite& s, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    s.fail(name, e.what());
  }
}

}  // namespace

CheckSuite geometry_checks(const Expr& H, const PhasePoint& pt, int order) {
  CheckSuite s;
  guarded(s, "geometry", [&] {
    GeometryAtPoint g = evaluate_geometry(H, pt, order);
    const int d = pt.dim();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    s.add("frame_coframe_n", dense_max(g.n_frame.frame_matrix() * g.n_frame.coframe_matrix() - I), 1e-12);
    s.add("frame_coframe_phi", dense_max(g.phi_frame.frame_matrix() * g.phi_frame.coframe_matrix() - I), 1e-12);
    const AlmostStructures& a = g.structures;
    s.add("J_squared", dense_max(a.J * a.J + I), 1e-10);
    s.add("P_squared", dense_max(a.P * a.P - I), 1e-10);
    s.add("theta_antisymmetric", dense_max(a.theta + a.theta.transpose()), 1e-12);
    s.add("theta_equals_gJ", dense_max(a.theta - a.J.transpose() * a.metric), 1e-10);
    s.add("dtheta", dtheta_check(H, pt, order), 1e-8);
    s.add("anholonomy", anholonomy_residual(g.n_frame.field, nadapted_anholonomy(g.N)), 1e-8);
    s.add("anholonomy_phi", anholonomy_residual(g.phi_frame.field, g.phi.full.W), 1e-8);
    s.add("N_symmetric", jet_max(g.N.coeffs - g.N.coeffs.transpose()), 1e-10);
    const int n = pt.n();
    double nij = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int b = 0; b < n; ++b)
          nij = std::max(nij, std::abs(a.nijenhuis(n + b, i, j) - g.canonical_ct.Omega(i, j, b)));
    s.add("nijenhuis_vs_Omega", nij, 1e-10);

    CompatibilityResiduals c = compatibility_residuals(g.canonical, g.g);
    s.add("canonical_metric_h", c.metric_h, 1e-8);
    s.add("canonical_metric_v", c.metric_v, 1e-8);
    s.add("canonical_T_h", c.torsion_h, 1e-10);
    s.add("canonical_S_v", c.torsion_v, 1e-10);
    CompatibilityResiduals p = compatibility_residuals(g.phi, g.g);
    s.add("phi_metric_h", p.metric_h, 1e-8);
    s.add("phi_metric_w", p.metric_v, 1e-8);
    s.add("phi_T_h", p.torsion_h, 1e-10);
    s.add("phi_S_w", p.torsion_v, 1e-10);

    // the explicit curvature formulas against the frame curvature
    Tensor4<RJet> R = curvature(g.canonical.full);
    double dr = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int m = 0; m < n; ++m) {
            dr = std::max(dr, std::abs(g.canonical_ct.R(i, j, k, m) - R(i, j, m, k).value()));
            dr = std::max(dr, std::abs(g.canonical_ct.Pc(i, k, j, m) - R(i, j, n + k, m).value()));
            dr = std::max(dr, std::abs(g.canonical_ct.Sc(i, j, k, m) - R(i, j, n + m, n + k).value()));
          }
    s.add("curvature_formulas", dr, 1e-10);
  });
  return s;
}

CheckSuite flat_checks(const Expr& H, const PhasePoint& pt, int dmax) {
  CheckSuite s;
  guarded(s, "flat", [&] {
    GeometryAtPoint g = evaluate_geometry(H, pt, FedosovState::auto_jet_order(dmax));
    s.add("N", jet_max(g.N.coeffs), 1e-12);
    s.add("canonical_coefficients", std::max(max_abs(g.canonical.hL), max_abs(g.canonical.vC)), 1e-12);
    s.add("phi_coefficients", max_abs(g.phi.full.gamma), 1e-12);
    s.add("canonical_torsion_curvature", ct_max(g.canonical_ct), 1e-12);
    s.add("phi_torsion_curvature", ct_max(g.phi_ct), 1e-12);
    s.add("ricci", dense_max(g.ricci.ricci), 1e-12);
    FedosovState st(H, pt, dmax);
    s.add("torsion_lift", st.torsion_lift().max_abs(), 1e-12);
    s.add("curvature_lift", st.curvature_lift().max_abs(), 1e-12);
    s.add("r", st.r().max_abs(), 1e-12);
    ChernWeyl cw = st.chern_weyl();
    s.add("gamma", dense_max(cw.gamma), 1e-12);
    s.add("c0", dense_max(cw.c0), 1e-12);
  });
  return s;
}

CheckSuite hamilton_checks(const Expr& H, const PhasePoint& start, double t_end, double dt) {
  CheckSuite s;
  guarded(s, "hamilton", [&] {
    Trajectory tr = hamilton_flow(H, start, t_end, dt);
    s.add("energy_drift_per_time", energy_drift_rate(tr), 1e-8);
    s.add("poisson_evolution_H", poisson_flow_check(H, H, tr), 1e-8);
  });
  return s;
}

CheckSuite mechanics_checks(const Expr& H, const Expr& L, const PhasePoint& start, double t_end, double dt) {
  CheckSuite s;
  guarded(s, "mechanics", [&] {
    LegendreResult to_h = legendre_to_hamiltonian(L, start);
    PhasePoint hstart(start.base, to_h.fiber, Bundle::Cotangent);
    LegendreResult back = legendre_to_lagrangian(H, hstart);
    s.add("legendre_round_trip", (back.fiber - start.fiber).lpNorm<Eigen::Infinity>(), 1e-10);
    s.add("legendre_values", std::abs(back.value - evaluate(L, [&] {
                                        Eigen::VectorXd u = start.coords();
                                        return std::vector<double>(u.data(), u.data() + u.size());
                                      }())),
          1e-10);
    Trajectory th = hamilton_flow(H, hstart, t_end, dt);
    Trajectory tl = lagrange_flow(L, start, t_end, dt);
    s.add("flow_equivalence", flow_distance(L, tl, th), 1e-5);
    s.add("hamilton_energy_drift_per_time", energy_drift_rate(th), 1e-8);
    s.add("lagrange_energy_drift_per_time", energy_drift_rate(tl), 1e-8);
    s.add("poisson_evolution_H", poisson_flow_check(H, H, th), 1e-8);
  });
  return s;
}

namespace {

// All monomials v^r z^A e^I with 2r + |A| <= max_deg, constant coefficient 1.
std::vector<WickElement> monomial_basis(const WickAlgebra& alg, int dim, int max_deg) {
  std::vector<WickElement> basis;
  const int d = alg.slots();
  CJet one = CJet::constant(dim, 0, 1.0);
  for (int z = 0; z < alg.z_table().count; ++z) {
    if (alg.z_degree(z) > max_deg) break;
    for (int r = 0; 2 * r + alg.z_degree(z) <= max_deg; ++r)
      for (std::uint32_t I = 0; I < (1u << d); ++I) {
        WickElement w;
        w.add(r, I, z, one);
        basis.push_back(std::move(w));
      }
  }
  return basis;
}

}  // namespace

CheckSuite wick_operator_checks(const Eigen::MatrixXcd& lambda, int max_deg) {
  CheckSuite s;
  guarded(s, "wick", [&] {
    WickAlgebra alg(lambda, max_deg + 2);
    const int dim = alg.slots();
    double hodge = 0.0, dd = 0.0, ii = 0.0, grading = 0.0;
    for (const WickElement& a : monomial_basis(alg, dim, max_deg)) {
      WickElement id = alg.delta(alg.delta_inv(a)) + alg.delta_inv(alg.delta(a)) + alg.sigma(a);
      hodge = std::max(hodge, (id - a).max_abs());
      dd = std::max(dd, alg.delta(alg.delta(a)).max_abs());
      ii = std::max(ii, alg.delta_inv(alg.delta_inv(a)).max_abs());
      WickKey k = WickKey::unpack(a.terms().begin()->first);
      const WickElement da = alg.delta(a);
      for (const auto& [key, c] : da.terms()) {
        WickKey t = WickKey::unpack(key);
        if (alg.z_degree(t.z) != alg.z_degree(k.z) - 1 || form_degree(t.forms) != form_degree(k.forms) + 1)
          grading = 1.0;
      }
    }
    s.add("hodge_decomposition", hodge, 1e-15);
    s.add("delta_squared", dd, 1e-12);
    s.add("delta_inv_squared", ii, 1e-12);
    s.add("delta_grading", grading, 0.0);
  });
  return s;
}

namespace {

CJet test_coefficient(const FedosovState& st) {
  const int dim = st.point().dim();
  const int K = st.jet_order();
  const Eigen::VectorXd u = st.point().coords();
  CJet c = CJet::variable(dim, K, 0, u[0]) * Complex(0.3) + Complex(1.0);
  c = c * (CJet::variable(dim, K, dim - 1, u[dim - 1]) * Complex(0.0, 0.2) + Complex(0.7));
  return c;
}

}  // namespace

CheckSuite commutator_checks(const FedosovState& st) {
  CheckSuite s;
  guarded(s, "commutators", [&] {
    const WickAlgebra& alg = st.algebra();
    const int d = alg.slots();
    const CJet c = test_coefficient(st);
    const Complex i(0.0, 1.0);
    double w1 = 0.0, w2 = 0.0;
    for (int z = 0; z < alg.z_table().count && alg.z_degree(z) <= 2; ++z)
      for (std::uint32_t I = 0; I < (1u << d); ++I) {
        if (form_degree(I) > 2) continue;
        WickElement a;
        a.add(0, I, z, c);
        const int j = alg.z_degree(z);
        WickElement lhs = st.extended_D(alg.delta(a)) + alg.delta(st.extended_D(a));
        WickElement rhs = WickAlgebra::divide_by_v(alg.commutator(st.torsion_lift(), a, j + 1)) * i;
        w1 = std::max(w1, (lhs - rhs).max_abs_value());
        WickElement l2 = st.extended_D(st.extended_D(a));
        WickElement r2 = WickAlgebra::divide_by_v(alg.commutator(st.curvature_lift(), a, j + 2)) * (-i);
        w2 = std::max(w2, (l2 - r2).max_abs_value());
      }
    s.add("D_delta_commutator", w1, 1e-8);
    s.add("D_squared", w2, 1e-8);
  });
  return s;
}

CheckSuite recursion_checks(const FedosovState& st) {
  CheckSuite s;
  guarded(s, "recursion", [&] {
    s.add("recursion_residual", st.recursion_residual(), 1e-8);
    s.add("delta_inv_r", st.delta_inv_r(), 1e-10);
    s.add("r_form_degree", std::abs(st.r_form_degree() - (st.r().empty() ? 0 : 1)), 0.0);
    const WickAlgebra& alg = st.algebra();
    const int d = alg.slots();
    const CJet c = test_coefficient(st);
    double flat = 0.0;
    for (int a = 0; a < d; ++a) {
      WickElement one_form;
      one_form.add(0, 1u << a, 0, c);
      flat = std::max(flat, st.flatness_residual(one_form, 0));
      WickElement lin;
      lin.add(0, 0, alg.z_times(0, a), c);
      flat = std::max(flat, st.flatness_residual(lin, 1));
      for (int b = a; b < d; ++b) {
        WickElement quad;
        quad.add(0, 0, alg.z_times(alg.z_times(0, a), b), c);
        flat = std::max(flat, st.flatness_residual(quad, 2));
      }
    }
    WickElement scalar = WickElement::scalar(c);
    flat = std::max(flat, st.flatness_residual(scalar, 0));
    s.add("flatness", flat, 1e-8);
  });
  return s;
}

CheckSuite star_checks(const FedosovState& st, const Expr& f, const Expr& g, const Expr* h, int vmax) {
  CheckSuite s;
  guarded(s, "star", [&] {
    const CJet F = st.jet_of(f), G = st.jet_of(g);
    std::vector<CJet> fg = st.star_series({F}, {G}, vmax);
    std::vector<CJet> gf = st.star_series({G}, {F}, vmax);
    s.add("C0_product", std::abs(fg[0].value() - F.value() * G.value()), 0.0);
    if (vmax >= 1) {
      Complex anti = 0.5 * (fg[1].value() - gf[1].value());
      Complex bracket = poisson_bracket(f, g, st.point(), 1).value();
      s.add("C1_antisymmetric", std::abs(anti - Complex(0.0, 0.5) * bracket), 1e-9);
    }
    CJet one = CJet::constant(F.dim(), st.jet_order(), 1.0);
    std::vector<CJet> f1 = st.star_series({F}, {one}, vmax);
    double unit = std::abs(f1[0].value() - F.value());
    for (int r = 1; r <= vmax; ++r) unit = std::max(unit, std::abs(f1[r].value()));
    s.add("unit", unit, 1e-12);
    if (h) {
      const CJet Hh = st.jet_of(*h);
      std::vector<CJet> left = st.star_series(fg, {Hh}, vmax);
      std::vector<CJet> right = st.star_series({F}, st.star_series({G}, {Hh}, vmax), vmax);
      for (int r = 0; r <= vmax; ++r)
        s.add("associativity_v" + std::to_string(r), std::abs(left[r].value() - right[r].value()), 1e-7);
    }
  });
  return s;
}

CheckSuite chern_weyl_checks(const FedosovState& st) {
  CheckSuite s;
  guarded(s, "chern_weyl", [&] {
    ChernWeyl cw = st.chern_weyl();
    s.add("dgamma", cw.dgamma, 1e-7);
    s.add("dkappa", cw.dkappa, 1e-7);
    s.add("gamma_antisymmetric", dense_max(cw.gamma + cw.gamma.transpose()), 1e-12);
    s.add("kappa_antisymmetric", dense_max(cw.kappa + cw.kappa.transpose()), 1e-12);
  });
  return s;
}

double jet_fd_deviation(const Expr& e, const PhasePoint& pt, int max_order) {
  using LD = long double;
  const int dim = pt.dim();
  const Eigen::VectorXd u0 = pt.coords();
  RJet j = eval_jet(e, pt, max_order);
  const MonomialTable& t = MonomialTable::get(dim, max_order);
  // central stencils for derivative orders 0..3: (offset, weight) in units of h
  static const std::vector<std::vector<std::pair<int, LD>>> stencil = {
      {{0, 1.0L}},
      {{-1, -0.5L}, {1, 0.5L}},
      {{-1, 1.0L}, {0, -2.0L}, {1, 1.0L}},
      {{-2, -0.5L}, {-1, 1.0L}, {1, -1.0L}, {2, 0.5L}}};
  std::vector<LD> h(dim);
  for (int i = 0; i < dim; ++i) h[i] = 1e-4L * std::max<LD>(1.0L, std::abs(static_cast<LD>(u0[i])));
  double worst = 0.0;
  for (int r = 0; r < t.count; ++r) {
    const std::uint8_t* ex = t.exponents(r);
    std::vector<LD> u(u0.data(), u0.data() + dim);
    LD fd = 0.0L;
    std::function<void(int, LD)> rec = [&](int var, LD w) {
      if (var == dim) {
        fd += w * evaluate(e, u);
        return;
      }
      const int k = ex[var];
      if (k > 3) throw InsufficientJetOrder("finite-difference stencil beyond order 3");
      for (const auto& [off, wt] : stencil[k]) {
        u[var] = static_cast<LD>(u0[var]) + off * h[var];
        rec(var + 1, w * wt / std::pow(h[var], k));
      }
      u[var] = u0[var];
    };
    rec(0, 1.0L);
    double jd = j.derivative(t.index(r));
    worst = std::max(worst, static_cast<double>(std::abs(jd - fd)) / std::max(1.0, std::abs(jd)));
  }
  return worst;
}

CheckSuite jet_fd_checks(const Expr& e, const PhasePoint& pt) {
  CheckSuite s;
  guarded(s, "jet_fd", [&] { s.add("jet_vs_finite_differences", jet_fd_deviation(e, pt), 1e-5); });
  return s;
}

}  // namespace hfq
