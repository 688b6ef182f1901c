#include <doctest.h>

#include <cmath>
#include <random>

#include "hfq/checks.hpp"
#include "hfq/families.hpp"
#include "hfq/geometry.hpp"
#include "oracles.hpp"

using namespace hfq;
using doctest::Approx;

namespace {

PhasePoint pt(std::vector<double> x, std::vector<double> f, Bundle b = Bundle::Cotangent) {
  return PhasePoint(Eigen::Map<Eigen::VectorXd>(x.data(), x.size()), Eigen::Map<Eigen::VectorXd>(f.data(), f.size()), b);
}

Expr ham(const std::string& s, int n) { return parse(s, n, Bundle::Cotangent); }
Expr lag(const std::string& s, int n) { return parse(s, n, Bundle::Tangent); }

double dense_max(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

template <int R>
double all_abs(const Tensor<double, R>& t) {
  return max_abs(t);
}

const char* kExpConformal2 = "0.5*exp(2*x1)*p1^2 + 0.5*p2^2";

}  // namespace

TEST_CASE("fundamental tensor of a Hamiltonian") {
  FundamentalTensor g = fundamental_tensor_hamilton(ham("0.5*(p1^2+p2^2)", 2), pt({0.3, 0.1}, {0.2, -0.4}));
  CHECK(dense_max(g.hessian.values() - Eigen::MatrixXd::Identity(2, 2)) == 0.0);

  FundamentalTensor e = fundamental_tensor_hamilton(ham("0.5*exp(2*x1)*p1^2", 1), pt({0.3}, {0.7}));
  CHECK(e.hessian(0, 0).value() == Approx(std::exp(0.6)));
  // d/dx of g^{11} = 2 exp(2x)
  CHECK(e.hessian(0, 0).derivative(MultiIndex{1, 0}) == Approx(2 * std::exp(0.6)));

  FundamentalTensor c = fundamental_tensor_hamilton(ham("0.5*(p1^2+p1*p2+p2^2)", 2), pt({0.0, 0.0}, {1.0, 2.0}));
  Eigen::MatrixXd up(2, 2), lo(2, 2);
  up << 1, 0.5, 0.5, 1;
  lo << 1, -0.5, -0.5, 1;
  lo *= 4.0 / 3.0;
  CHECK(dense_max(c.hessian.values() - up) < 1e-15);
  CHECK(dense_max(c.inverse.values() - lo) < 1e-15);

  CHECK_THROWS_AS(fundamental_tensor_hamilton(ham("x1*p1", 1), pt({0.3}, {0.2})), DegenerateHessian);
  CHECK_THROWS_AS(fundamental_tensor_hamilton(ham("p1^2", 1), pt({0.3}, {0.2}, Bundle::Tangent)), InputError);
}

TEST_CASE("fundamental tensor of a Lagrangian") {
  FundamentalTensor g = fundamental_tensor_lagrange(lag("0.5*(y1^2+y2^2)", 2), pt({0.3, 0.1}, {1.0, 2.0}, Bundle::Tangent));
  CHECK(dense_max(g.hessian.values() - Eigen::MatrixXd::Identity(2, 2)) == 0.0);
  FundamentalTensor a = fundamental_tensor_lagrange(lag("0.5*(1 + x1^2)*y1^2", 1), pt({0.4}, {0.3}, Bundle::Tangent));
  CHECK(a.hessian(0, 0).value() == Approx(1.16));
  CHECK_THROWS_AS(fundamental_tensor_lagrange(lag("x1*y1 + y1", 1), pt({0.4}, {0.3}, Bundle::Tangent)),
                  DegenerateHessian);
}

TEST_CASE("vielbein lift") {
  const PhasePoint p = pt({0.7, 0.2}, {0.5, -0.3});
  auto E = [](const std::vector<std::string>& s) {
    std::vector<std::vector<Expr>> m(2, std::vector<Expr>(2));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m[i][j] = ham(s[2 * i + j], 2);
    return m;
  };
  FundamentalTensor id = vielbein_lift(E({"1", "0", "0", "1"}), E({"1", "0", "0", "1"}), p);
  CHECK(dense_max(id.hessian.values() - Eigen::MatrixXd::Identity(2, 2)) == 0.0);

  FundamentalTensor b = vielbein_lift(E({"1", "0", "0", "x1^2 + 1"}), E({"1 + p1*0", "0", "0", "1"}), p);
  CHECK(b.hessian(0, 0).value() == Approx(1.0));
  CHECK(b.hessian(1, 1).value() == Approx(1.0 / 1.49));
  CHECK(b.hessian(0, 1).value() == 0.0);

  FundamentalTensor v = vielbein_lift(E({"1", "0", "0", "1"}), E({"1 + 0.1*p1", "0", "0", "1"}), p);
  CHECK(v.hessian(0, 0).value() == Approx(1.05 * 1.05));
  CHECK(v.hessian(1, 1).value() == Approx(1.0));
  // the x-derivative of the lifted metric follows g_base
  CHECK(b.hessian(1, 1).derivative(MultiIndex{1, 0, 0, 0}) == Approx(-2 * 0.7 / (1.49 * 1.49)));
}

TEST_CASE("semi-spray and the tangent N-connection") {
  const PhasePoint p = pt({0.4, -0.2}, {0.3, 0.6}, Bundle::Tangent);
  for (const auto& G : semi_spray(lag("0.5*(y1^2+y2^2)", 2), p)) CHECK(G.max_abs() == 0.0);

  // L = y^2/2 - x^2: G = x and the Euler-Lagrange equation x'' = -2G = -U'
  const PhasePoint q = pt({0.4}, {0.3}, Bundle::Tangent);
  std::vector<RJet> G = semi_spray(lag("0.5*y1^2 - x1^2", 1), q);
  CHECK(G[0].value() == Approx(0.4));
  CHECK(nconnection_tangent(lag("0.5*y1^2 - x1^2", 1), q).coeffs(0, 0).max_abs() < 1e-15);

  // L = (1 + x^2) y^2 / 2: G = x y^2 / (2 (1 + x^2)), N = x y / (1 + x^2)
  const double x = 0.4, y = 0.3;
  std::vector<RJet> Gc = semi_spray(lag("0.5*(1 + x1^2)*y1^2", 1), q);
  CHECK(Gc[0].value() == Approx(x * y * y / (2 * (1 + x * x))));
  CHECK(Gc[0].derivative(MultiIndex{1, 0}) == Approx(y * y * (1 - x * x) / (2 * (1 + x * x) * (1 + x * x))));
  NConnection Nt = nconnection_tangent(lag("0.5*(1 + x1^2)*y1^2", 1), q);
  CHECK(Nt.bundle == Bundle::Tangent);
  CHECK(Nt.coeffs(0, 0).value() == Approx(x * y / (1 + x * x)));
}

TEST_CASE("canonical N-connection on the cotangent bundle") {
  CHECK(nconnection_cotangent(ham("0.5*(p1^2+p2^2)", 2), pt({0.3, 0.1}, {0.2, -0.4})).coeffs.values().cwiseAbs().maxCoeff() == 0.0);
  CHECK(nconnection_cotangent(ham("0.5*(p1^2+p2^2) + x1^2*x2 + sin(x2)", 2), pt({0.3, 0.1}, {0.2, -0.4}))
            .coeffs.values()
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // H = exp(2x) p^2 / 2: g_11 = exp(-2x), {g_11, H} = 2p, H_px g_11 = 2p, so *N_11 = -p
  NConnection N = nconnection_cotangent(ham("0.5*exp(2*x1)*p1^2", 1), pt({0.3}, {0.7}));
  CHECK(N.coeffs(0, 0).value() == Approx(-0.7));
  CHECK(N.coeffs(0, 0).derivative(MultiIndex{0, 1}) == Approx(-1.0));

  // non-trivial H against an independent finite-difference evaluation
  Family an = builtin_family("anharmonic", 2);
  Expr H = family_hamiltonian(an);
  for (const auto& p : sample_points(2, 3, 21)) {
    NConnection Na = nconnection_cotangent(H, p);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double ref = static_cast<double>(oracle::nconnection(oracle::fn(H), oracle::point(p), 2, i, j));
        CHECK(Na.coeffs(i, j).value() == Approx(ref).epsilon(1e-5).scale(1.0));
        CHECK(std::abs(Na.coeffs(i, j).value() - Na.coeffs(j, i).value()) < 1e-12);
      }
  }
}

TEST_CASE("Poisson bracket") {
  const PhasePoint p = pt({0.3, 0.1}, {0.2, -0.4});
  CHECK(poisson_bracket(ham("x1", 2), ham("x2", 2), p).max_abs() == 0.0);
  // golden sign: theta = dp ^ dx, i_{X_f} theta = -df
  CHECK(poisson_bracket(ham("x1", 2), ham("p1", 2), p).value() == -1.0);
  CHECK(poisson_bracket(ham("p1", 2), ham("x1", 2), p).value() == 1.0);
  CHECK(kPoissonSign == 1.0);
  Expr f = ham("x1*p1^2 + sin(x2)*p2", 2), g = ham("exp(x1)*p2 + x2^2*p1", 2), h = ham("p1*p2 + x1*x2", 2);
  CHECK(poisson_bracket(f, f, p).max_abs() < 1e-15);
  const double ref = static_cast<double>(oracle::bracket(oracle::fn(f), oracle::fn(g), oracle::point(p), 2));
  CHECK(poisson_bracket(f, g, p, 2).value() == Approx(ref).epsilon(1e-6));
  // Jacobi identity on jets
  const int K = 4;
  RJet F = eval_jet(f, p, K), G = eval_jet(g, p, K), Hh = eval_jet(h, p, K);
  RJet jac = poisson_bracket(F, poisson_bracket(G, Hh, 2), 2) + poisson_bracket(G, poisson_bracket(Hh, F, 2), 2) +
             poisson_bracket(Hh, poisson_bracket(F, G, 2), 2);
  CHECK(jac.max_abs() < 1e-13);
}

TEST_CASE("adapted frames") {
  const PhasePoint p = pt({0.3, 0.1}, {0.2, -0.4});
  GeometryAtPoint flat = evaluate_geometry(ham("0.5*(p1^2+p2^2)", 2), p);
  CHECK(dense_max(flat.n_frame.frame_matrix() - Eigen::MatrixXd::Identity(4, 4)) == 0.0);
  // w^1 = d/dp_1 - d/dx^1
  Eigen::VectorXd w1 = flat.phi_frame.frame_matrix().col(2);
  CHECK(w1[0] == -1.0);
  CHECK(w1[1] == 0.0);
  CHECK(w1[2] == 1.0);
  CHECK(w1[3] == 0.0);

  GeometryAtPoint ec = evaluate_geometry(ham(kExpConformal2, 2), p);
  // e_1 = d_1 + N_11 d^1 with N_11 = -p_1
  CHECK(ec.n_frame.frame_matrix()(2, 0) == Approx(-0.2));
  for (const auto& q : sample_points(2, 5, 4)) {
    GeometryAtPoint g = evaluate_geometry(family_hamiltonian(builtin_family("anharmonic", 2)), q);
    CHECK(dense_max(g.n_frame.frame_matrix() * g.n_frame.coframe_matrix() - Eigen::MatrixXd::Identity(4, 4)) < 1e-12);
    CHECK(dense_max(g.phi_frame.frame_matrix() * g.phi_frame.coframe_matrix() - Eigen::MatrixXd::Identity(4, 4)) < 1e-12);
  }
}

TEST_CASE("lifted metric") {
  const PhasePoint p = pt({0.3, 0.1}, {0.2, -0.4});
  RJetMatrix id = metric_lift(fundamental_tensor_hamilton(ham("0.5*(p1^2+p2^2)", 2), p),
                              nconnection_cotangent(ham("0.5*(p1^2+p2^2)", 2), p));
  CHECK(dense_max(id.values() - Eigen::MatrixXd::Identity(4, 4)) == 0.0);

  // indefinite fiber metric: signature (+,-) on both blocks
  Expr H = ham("0.5*exp(x2)*p1^2 - 0.5*p2^2 + 0.1*x1*p1*p2", 2);
  Eigen::MatrixXd G = metric_lift(fundamental_tensor_hamilton(H, p), nconnection_cotangent(H, p)).values();
  CHECK(dense_max(G - G.transpose()) < 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  int pos = 0, neg = 0;
  for (int i = 0; i < 4; ++i) (es.eigenvalues()[i] > 0 ? pos : neg)++;
  CHECK(pos == 2);
  CHECK(neg == 2);
}

TEST_CASE("almost complex, product and symplectic structures") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (const char* fam : {"exp-conformal", "anharmonic", "vielbein-lift"}) {
    Expr H = family_hamiltonian(builtin_family(fam, 2));
    for (const auto& q : sample_points(2, 3, 31)) {
      GeometryAtPoint g = evaluate_geometry(H, q);
      const AlmostStructures& a = g.structures;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
      CHECK(dense_max(a.J * a.J + I) < 1e-10);
      CHECK(dense_max(a.P * a.P - I) < 1e-10);
      CHECK(dense_max(a.metric - a.metric.transpose()) < 1e-12);
      for (int k = 0; k < 5; ++k) {
        Eigen::VectorXd X(4), Y(4);
        for (int i = 0; i < 4; ++i) {
          X[i] = nd(rng);
          Y[i] = nd(rng);
        }
        const double th = X.dot(a.theta * Y);
        const double gjy = (a.J * X).dot(a.metric * Y);
        CHECK(std::abs(th - gjy) < 1e-10 * (1 + std::abs(th)));
        CHECK(std::abs(th + Y.dot(a.theta * X)) < 1e-12);
      }
      // the tangent structure squares to zero
      CHECK(dense_max(a.Jtangent * a.Jtangent) < 1e-10);
    }
  }
}

TEST_CASE("closedness of theta") {
  CHECK(dtheta_check(ham("0.5*(p1^2+p2^2)", 2), pt({0.1, 0.2}, {0.3, 0.4})) < 1e-12);
  CHECK(dtheta_check(ham(kExpConformal2, 2), pt({0.1, 0.2}, {0.3, 0.4})) < 1e-8);
  for (const auto& q : sample_points(2, 4, 8))
    CHECK(dtheta_check(family_hamiltonian(builtin_family("anharmonic", 2)), q) < 1e-8);
}

TEST_CASE("canonical d-connection") {
  const PhasePoint p = pt({0.1, 0.2}, {0.3, 0.4});
  DConnectionCoeffs flat = canonical_dconnection(ham("0.5*(p1^2+p2^2)", 2), p);
  CHECK(max_abs(flat.hL) == 0.0);
  CHECK(max_abs(flat.vC) == 0.0);

  // H = exp(2x) p^2 / 2, n = 1: L^1_11 = g^{11} e_1(g_11) / 2 = -1, C = 0
  const PhasePoint q = pt({0.1}, {0.3});
  DConnectionCoeffs c = canonical_dconnection(ham("0.5*exp(2*x1)*p1^2", 1), q);
  CHECK(c.hL(0, 0, 0).value() == Approx(-1.0));
  CHECK(std::abs(c.vC(0, 0, 0).value()) < 1e-15);
  GeometryAtPoint g1 = evaluate_geometry(ham("0.5*exp(2*x1)*p1^2", 1), q);
  // P_111 = g_11 (L^1_11 - d^1 N_11) = exp(-2x) (-1 + 1) = 0
  CHECK(std::abs(g1.canonical_ct.P(0, 0, 0)) < 1e-14);

  Expr H = family_hamiltonian(builtin_family("anharmonic", 2));
  for (const auto& s : sample_points(2, 5, 12)) {
    GeometryAtPoint g = evaluate_geometry(H, s);
    CompatibilityResiduals r = compatibility_residuals(g.canonical, g.g);
    CHECK(r.metric_h < 1e-8);
    CHECK(r.metric_v < 1e-8);
    CHECK(r.torsion_h < 1e-10);
    CHECK(r.torsion_v < 1e-10);
    const CurvatureTorsion& ct = g.canonical_ct;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int m = 0; m < 2; ++m) {
            CHECK(std::abs(ct.R(i, j, k, m) + ct.R(i, j, m, k)) < 1e-12);
            CHECK(std::abs(ct.Sc(i, j, k, m) + ct.Sc(i, j, m, k)) < 1e-12);
          }
  }
  CHECK(all_abs(evaluate_geometry(ham("0.5*(p1^2+p2^2)", 2), p).canonical_ct.R) == 0.0);
}

TEST_CASE("canonical phi-connection") {
  const PhasePoint p = pt({0.1, 0.2}, {0.3, 0.4});
  GeometryAtPoint flat = evaluate_geometry(ham("0.5*(p1^2+p2^2)", 2), p);
  CHECK(max_abs(flat.phi.full.gamma) == 0.0);
  CHECK(all_abs(flat.phi_ct.R) == 0.0);
  CHECK(all_abs(flat.phi_ct.T) == 0.0);
  Expr H = family_hamiltonian(builtin_family("anharmonic", 2));
  for (const auto& s : sample_points(2, 5, 13)) {
    GeometryAtPoint g = evaluate_geometry(H, s);
    CompatibilityResiduals r = compatibility_residuals(g.phi, g.g);
    CHECK(r.metric_h < 1e-8);
    CHECK(r.metric_v < 1e-8);
    CHECK(r.torsion_h < 1e-10);
    CHECK(r.torsion_v < 1e-10);
    CHECK(anholonomy_residual(g.phi_frame.field, g.phi.full.W) < 1e-8);
  }
}

TEST_CASE("anholonomy and the Nijenhuis tensor") {
  Expr H = family_hamiltonian(builtin_family("anharmonic", 2));
  for (const auto& s : sample_points(2, 4, 14)) {
    GeometryAtPoint g = evaluate_geometry(H, s);
    CHECK(anholonomy_residual(g.n_frame.field, nadapted_anholonomy(g.N)) < 1e-8);
    const Tensor3<double>& Nj = g.structures.nijenhuis;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) CHECK(std::abs(Nj(a, b, c) + Nj(a, c, b)) < 1e-12);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int b = 0; b < 2; ++b) CHECK(std::abs(Nj(2 + b, i, j) - g.canonical_ct.Omega(i, j, b)) < 1e-10);
  }
  CHECK(max_abs(nijenhuis_sample(ham("0.5*(p1^2+p2^2)", 2), pt({0.1, 0.2}, {0.3, 0.4}))) == 0.0);

  // tangent bundle frame bracket identity
  const PhasePoint q = pt({0.4, 0.1}, {0.3, -0.2}, Bundle::Tangent);
  NConnection Nt = nconnection_tangent(lag("0.5*(1 + x1^2)*y1^2 + 0.5*exp(x1)*y2^2", 2), q);
  AdaptedFrame f = adapted_frames(
      Nt, fundamental_tensor_lagrange(lag("0.5*(1 + x1^2)*y1^2 + 0.5*exp(x1)*y2^2", 2), q), FrameVariant::NAdaptedTangent);
  CHECK(anholonomy_residual(f.field, nadapted_anholonomy(Nt)) < 1e-8);
}

TEST_CASE("Ricci tensor and Einstein residual") {
  const PhasePoint p = pt({0.1, 0.2}, {0.3, 0.4});
  Expr flat = ham("0.5*(p1^2+p2^2)", 2);
  RicciResult rf = ricci_scalar_phi(flat, p);
  CHECK(dense_max(rf.ricci) == 0.0);
  CHECK(rf.scalar == 0.0);
  CHECK(dense_max(einstein_residual(flat, p, 0.0)) == 0.0);
  GeometryAtPoint gf = evaluate_geometry(flat, p);
  CHECK(dense_max(einstein_residual(flat, p, 1.0) + 0.5 * gf.phi_frame.frame_matrix()) < 1e-15);

  Expr H = family_hamiltonian(builtin_family("anharmonic", 2));
  GeometryAtPoint g = evaluate_geometry(H, p);
  const RicciResult& r = g.ricci;
  CHECK(r.symmetric_norm == Approx((0.5 * (r.ricci + r.ricci.transpose())).norm()));
  CHECK(r.antisymmetric_norm == Approx((0.5 * (r.ricci - r.ricci.transpose())).norm()));
  // recombination from the Ricci matrix and the frame metric
  Eigen::MatrixXd Gi = Eigen::MatrixXd::Zero(4, 4);
  Gi.topLeftCorner(2, 2) = g.g.hessian.values();
  Gi.bottomRightCorner(2, 2) = g.g.inverse.values();
  const double scalar = (Gi.transpose() * r.ricci).trace();
  CHECK(r.scalar == Approx(scalar));
  const Eigen::MatrixXd E = g.phi_frame.frame_matrix();
  CHECK(dense_max(einstein_residual(H, p, 0.3) - (E * Gi * r.ricci - 0.5 * (scalar + 0.3) * E)) < 1e-12);
}

TEST_CASE("geometry suite on three families") {
  for (const char* fam : {"exp-conformal", "anharmonic", "vielbein-lift"}) {
    Expr H = family_hamiltonian(builtin_family(fam, 2));
    for (const auto& q : sample_points(2, 3, 41)) {
      CheckSuite s = geometry_checks(H, q);
      for (const auto& r : s.results()) {
        INFO(fam << " " << r.name << " " << r.residual);
        CHECK(r.pass);
      }
    }
  }
  CHECK_THROWS_AS(evaluate_geometry(ham("0.5*(p1^2+p2^2)", 2), pt({0.1, 0.2}, {0.3, 0.4}), 4), InsufficientJetOrder);
}
