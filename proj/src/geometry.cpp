#include "hfq/geometry.hpp"

namespace hfq {

namespace {

int jet_dim(const RJetMatrix& m) { return m(0, 0).dim(); }

RJet zero_like(const RJet& ref, int order) { return RJet(ref.dim(), std::max(0, order)); }

// Contraction helpers on jet matrices.
RJet sum_products(const std::vector<RJet>& a, const std::vector<RJet>& b) {
  RJet acc = a[0] * b[0];
  for (std::size_t i = 1; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void require_cotangent(const FundamentalTensor& g) {
  if (g.bundle != Bundle::Cotangent) throw InputError("operation needs cotangent-bundle data");
}

}  // namespace

FundamentalTensor fundamental_tensor(const RJet& generator, int n, Bundle bundle) {
  if (generator.order() < 2) throw InsufficientJetOrder("fundamental tensor needs jet order >= 2");
  FundamentalTensor g;
  g.bundle = bundle;
  g.hessian = RJetMatrix(n, n, generator.dim(), generator.order() - 2);
  for (int a = 0; a < n; ++a) {
    RJet da = generator.partial(n + a);
    for (int b = a; b < n; ++b) {
      g.hessian(a, b) = da.partial(n + b);
      g.hessian(b, a) = g.hessian(a, b);
    }
  }
  g.inverse = jet_matrix_inverse(g.hessian);
  return g;
}

RJet poisson_bracket(const RJet& f, const RJet& g, int n) {
  RJet acc = f.partial(n) * g.partial(0) - f.partial(0) * g.partial(n);
  for (int i = 1; i < n; ++i) acc += f.partial(n + i) * g.partial(i) - f.partial(i) * g.partial(n + i);
  return acc * kPoissonSign;
}

NConnection nconnection_cotangent(const RJet& H, const FundamentalTensor& g) {
  require_cotangent(g);
  const int n = g.hessian.rows();
  // mixed(k, i) = d2H / dp_k dx^i
  RJetMatrix mixed(n, n, H.dim(), H.order() - 2);
  for (int k = 0; k < n; ++k) {
    RJet dk = H.partial(n + k);
    for (int i = 0; i < n; ++i) mixed(k, i) = dk.partial(i);
  }
  const RJetMatrix& gl = g.inverse;
  NConnection N;
  N.bundle = Bundle::Cotangent;
  N.coeffs.resize_empty(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      RJet acc = poisson_bracket(gl(i, j), H, n);
      for (int k = 0; k < n; ++k) {
        acc -= mixed(k, i) * gl(j, k);
        acc -= mixed(k, j) * gl(i, k);
      }
      N.coeffs(i, j) = acc * 0.5;
      N.coeffs(j, i) = N.coeffs(i, j);
    }
  return N;
}

std::vector<RJet> semi_spray(const RJet& L, const FundamentalTensor& g, const Eigen::VectorXd& y0) {
  const int n = g.hessian.rows();
  std::vector<RJet> y(n), rhs(n);
  for (int k = 0; k < n; ++k) y[k] = RJet::variable(L.dim(), L.order(), n + k, y0[k]);
  for (int j = 0; j < n; ++j) {
    RJet dyj = L.partial(n + j);
    std::vector<RJet> mixed(n);
    for (int k = 0; k < n; ++k) mixed[k] = dyj.partial(k);
    rhs[j] = sum_products(mixed, y) - L.partial(j);
  }
  std::vector<RJet> G(n);
  for (int i = 0; i < n; ++i) {
    RJet acc = g.inverse(i, 0) * rhs[0];
    for (int j = 1; j < n; ++j) acc += g.inverse(i, j) * rhs[j];
    G[i] = acc * 0.5;
  }
  return G;
}

NConnection nconnection_tangent(const std::vector<RJet>& G, int n) {
  NConnection N;
  N.bundle = Bundle::Tangent;
  N.coeffs.resize_empty(n, n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a) N.coeffs(i, a) = G[a].partial(n + i);
  return N;
}

AdaptedFrame adapted_frames(const NConnection& N, const FundamentalTensor& g, FrameVariant variant) {
  const int n = N.coeffs.rows();
  const int K = N.coeffs.min_order();
  RJetMatrix E = RJetMatrix::identity(2 * n, jet_dim(N.coeffs), K);
  const double sign = variant == FrameVariant::NAdaptedTangent ? -1.0 : 1.0;
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a) E(n + a, i) = N.coeffs(i, a).truncated(K) * sign;
  if (variant == FrameVariant::PhiAdapted) {
    // w^b = d/dp_b - g^{bi} e_i
    for (int b = 0; b < n; ++b)
      for (int mu = 0; mu < 2 * n; ++mu) {
        RJet acc = E(mu, n + b);
        for (int i = 0; i < n; ++i) acc -= g.hessian(b, i) * E(mu, i);
        E(mu, n + b) = acc;
      }
  }
  AdaptedFrame f;
  f.variant = variant;
  f.field = make_frame(std::move(E));
  return f;
}

RJetMatrix metric_lift(const FundamentalTensor& g, const NConnection& N) {
  AdaptedFrame f = adapted_frames(N, g, FrameVariant::NAdaptedCotangent);
  RJetMatrix G = block_diag(g.inverse, g.hessian);
  return f.field.C.transpose() * G * f.field.C;
}

namespace {

// Frame-component matrices in the N-adapted cotangent frame.
struct FrameStructures {
  RJetMatrix J, P, Jt, theta, G;
};

FrameStructures frame_structures(const FundamentalTensor& g) {
  const int n = g.hessian.rows();
  const int dim = jet_dim(g.hessian);
  const int K = std::min(g.hessian.min_order(), g.inverse.min_order());
  FrameStructures s;
  s.J = RJetMatrix(2 * n, 2 * n, dim, K);
  s.P = RJetMatrix::identity(2 * n, dim, K);
  s.Jt = RJetMatrix(2 * n, 2 * n, dim, K);
  s.theta = RJetMatrix(2 * n, 2 * n, dim, K);
  for (int i = 0; i < n; ++i) {
    s.P(n + i, n + i)[0] = -1.0;
    s.theta(i, n + i)[0] = -1.0;
    s.theta(n + i, i)[0] = 1.0;
    for (int a = 0; a < n; ++a) {
      s.J(n + a, i) = -g.inverse(i, a).truncated(K);  // J e_i = -g_ia d^a
      s.J(i, n + a) = g.hessian(a, i).truncated(K);   // J d^a = g^{ai} e_i
      s.Jt(n + a, i) = g.inverse(i, a).truncated(K);  // Jt e_i = g_ia d^a
    }
  }
  s.G = block_diag(g.inverse, g.hessian);
  return s;
}

VectorField apply_matrix(const RJetMatrix& T, const VectorField& X) {
  VectorField r(T.rows());
  for (int mu = 0; mu < T.rows(); ++mu) {
    RJet acc = T(mu, 0) * X[0];
    for (int nu = 1; nu < T.cols(); ++nu) acc += T(mu, nu) * X[nu];
    r[mu] = acc;
  }
  return r;
}

VectorField combine(const VectorField& a, const VectorField& b, double sb) {
  VectorField r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i] * sb;
  return r;
}

Tensor3<double> nijenhuis(const FrameField& frame, const RJetMatrix& Jc) {
  const int d = frame.dim();
  Tensor3<double> out({d, d, d}, 0.0);
  std::vector<VectorField> e(d), Je(d);
  for (int a = 0; a < d; ++a) {
    e[a] = frame.vector(a);
    Je[a] = apply_matrix(Jc, e[a]);
  }
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      VectorField v = lie_bracket(Je[a], Je[b]);
      v = combine(v, lie_bracket(e[a], e[b]), -1.0);
      v = combine(v, apply_matrix(Jc, lie_bracket(Je[a], e[b])), -1.0);
      v = combine(v, apply_matrix(Jc, lie_bracket(e[a], Je[b])), -1.0);
      for (int g = 0; g < d; ++g) {
        double s = 0.0;
        for (int mu = 0; mu < d; ++mu) s += frame.C(g, mu).value() * v[mu].value();
        out(g, a, b) = s;
        out(g, b, a) = -s;
      }
    }
  return out;
}

}  // namespace

AlmostStructures almost_structures(const FundamentalTensor& g, const NConnection& N) {
  require_cotangent(g);
  AdaptedFrame f = adapted_frames(N, g, FrameVariant::NAdaptedCotangent);
  FrameStructures s = frame_structures(g);
  const RJetMatrix& E = f.field.E;
  const RJetMatrix& C = f.field.C;
  RJetMatrix Jc = E * s.J * C;
  AlmostStructures out;
  out.J = Jc.values();
  out.P = (E * s.P * C).values();
  out.Jtangent = (E * s.Jt * C).values();
  out.theta = (C.transpose() * s.theta * C).values();
  out.metric = (C.transpose() * s.G * C).values();
  out.nijenhuis = nijenhuis(f.field, Jc);
  return out;
}

Tensor3<RJet> nconnection_curvature(const NConnection& N) {
  const int n = N.coeffs.rows();
  // e_j(f) = d_j f + s N_jb d^b f, s = +1 on T*M, -1 on TM
  const double s = N.bundle == Bundle::Cotangent ? 1.0 : -1.0;
  auto ej = [&](int j, const RJet& f) {
    RJet acc = f.partial(j);
    for (int b = 0; b < n; ++b) acc += N.coeffs(j, b) * f.partial(n + b) * s;
    return acc;
  };
  Tensor3<RJet> Om({n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < n; ++a) Om(i, j, a) = ej(j, N.coeffs(i, a)) - ej(i, N.coeffs(j, a));
  return Om;
}

Tensor3<RJet> nadapted_anholonomy(const NConnection& N) {
  const int n = N.coeffs.rows();
  const int d = 2 * n;
  Tensor3<RJet> Om = nconnection_curvature(N);
  const RJet zero = zero_like(N.coeffs(0, 0), Om(0, 0, 0).order());
  Tensor3<RJet> W({d, d, d}, zero);
  if (N.bundle == Bundle::Cotangent) {
    // [e_i, e_j] = -Omega_ija d^a,  [e_i, d^b] = -d^b(N_ia) d^a
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < n; ++a) W(n + a, i, j) = -Om(i, j, a);
    for (int i = 0; i < n; ++i)
      for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
          RJet v = N.coeffs(i, a).partial(n + b);
          W(n + a, i, n + b) = -v;
          W(n + a, n + b, i) = v;
        }
  } else {
    // [e_i, e_j] = Omega^a_ij d_a,  [e_i, d_b] = d_b(N_i^a) d_a
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < n; ++a) W(n + a, i, j) = Om(i, j, a);
    for (int i = 0; i < n; ++i)
      for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
          RJet v = N.coeffs(i, a).partial(n + b);
          W(n + a, i, n + b) = v;
          W(n + a, n + b, i) = -v;
        }
  }
  return W;
}

DConnectionCoeffs canonical_dconnection(const FundamentalTensor& g, const NConnection& N) {
  require_cotangent(g);
  const int n = g.hessian.rows();
  const int d = 2 * n;
  AdaptedFrame f = adapted_frames(N, g, FrameVariant::NAdaptedCotangent);
  const RJetMatrix& gu = g.hessian;
  const RJetMatrix& gl = g.inverse;
  DConnectionCoeffs c;
  c.kind = ConnectionKind::CanonicalD;
  c.hL = Tensor3<RJet>({n, n, n});
  c.vC = Tensor3<RJet>({n, n, n});
  // eg(k, a, b) = e_k(g_ab)
  Tensor3<RJet> eg({n, n, n});
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) eg(k, a, b) = f.field.derivative(k, gl(a, b));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        RJet acc = gu(i, 0) * (eg(j, 0, k) + eg(k, j, 0) - eg(0, j, k));
        for (int s = 1; s < n; ++s) acc += gu(i, s) * (eg(j, s, k) + eg(k, j, s) - eg(s, j, k));
        c.hL(i, j, k) = acc * 0.5;
      }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int cc = 0; cc < n; ++cc) {
        RJet acc = gl(j, 0) * gu(0, i).partial(n + cc);
        for (int s = 1; s < n; ++s) acc += gl(j, s) * gu(s, i).partial(n + cc);
        c.vC(j, i, cc) = acc * -0.5;
      }
  LinearConnection& L = c.full;
  L.frame = f.field;
  L.W = structure_functions(f.field);
  L.gamma = Tensor3<RJet>({d, d, d}, zero_like(gu(0, 0), min_order(c.hL)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        L.gamma(i, j, k) = c.hL(i, j, k);
        L.gamma(n + j, n + i, k) = -c.hL(i, j, k);  // D_{e_k} d^i = -L^i_jk d^j
        L.gamma(i, j, n + k) = c.vC(j, i, k);
        L.gamma(n + j, n + i, n + k) = -c.vC(j, i, k);  // D_{d^k} d^i = -C_j^{ik} d^j
      }
  return c;
}

DConnectionCoeffs phi_connection(const FundamentalTensor& g, const NConnection& N) {
  require_cotangent(g);
  const int n = g.hessian.rows();
  AdaptedFrame f = adapted_frames(N, g, FrameVariant::PhiAdapted);
  DConnectionCoeffs c;
  c.kind = ConnectionKind::PhiPair;
  c.full = split_koszul_connection(f.field, g.inverse, g.hessian);
  c.hL = Tensor3<RJet>({n, n, n});
  c.vC = Tensor3<RJet>({n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        c.hL(i, j, k) = c.full.gamma(i, j, k);
        c.vC(j, i, k) = c.full.gamma(i, j, n + k);
      }
  return c;
}

CurvatureTorsion torsion_curvature(const DConnectionCoeffs& co, const NConnection& N, const FundamentalTensor& g) {
  const int n = g.hessian.rows();
  const int d = 2 * n;
  CurvatureTorsion ct;
  Tensor3<RJet> Om = nconnection_curvature(N);
  ct.Omega = values(Om);
  ct.W = values(co.full.W);
  ct.T = Tensor3<double>({n, n, n}, 0.0);
  ct.S = Tensor3<double>({n, n, n}, 0.0);
  ct.P = Tensor3<double>({n, n, n}, 0.0);
  ct.R = Tensor4<double>({n, n, n, n}, 0.0);
  ct.Pc = Tensor4<double>({n, n, n, n}, 0.0);
  ct.Sc = Tensor4<double>({n, n, n, n}, 0.0);

  if (co.kind == ConnectionKind::PhiPair) {
    Tensor3<RJet> T = torsion(co.full);
    Tensor4<RJet> R = curvature(co.full);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          ct.T(a, b, c) = T(a, b, c).value();
          ct.S(a, b, c) = T(n + a, n + b, n + c).value();
          ct.P(a, b, c) = T(n + a, b, n + c).value();
          for (int m = 0; m < n; ++m) {
            ct.R(a, b, c, m) = R(a, b, m, c).value();
            ct.Pc(a, c, b, m) = R(a, b, n + c, m).value();
            ct.Sc(a, b, c, m) = R(a, b, n + m, n + c).value();
          }
        }
    (void)d;
    return ct;
  }

  // N-adapted formulas for the canonical d-connection.
  const Tensor3<RJet>& L = co.hL;
  const Tensor3<RJet>& C = co.vC;  // C(j, i, c) = C_j^{ic}
  const FrameField& F = co.full.frame;
  const RJetMatrix& gl = g.inverse;
  const RJetMatrix& gu = g.hessian;
  auto vert = [&](int c, const RJet& f) { return f.partial(n + c); };
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ct.T(k, i, j) = (L(k, i, j) - L(k, j, i)).value();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) ct.S(a, b, c) = (C(a, b, c) - C(a, c, b)).value();
  // Pl(e, i, c) = L^e_ic - d^e N_ic
  Tensor3<RJet> Pl({n, n, n});
  for (int e = 0; e < n; ++e)
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n; ++c) Pl(e, i, c) = L(e, i, c) - vert(e, N.coeffs(i, c));
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n; ++c) {
        RJet acc = gl(a, 0) * Pl(0, i, c);
        for (int e = 1; e < n; ++e) acc += gl(a, e) * Pl(e, i, c);
        ct.P(a, i, c) = acc.value();
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) {
          RJet acc = F.derivative(m, L(i, j, k)) - F.derivative(k, L(i, j, m));
          for (int o = 0; o < n; ++o) acc += L(o, j, k) * L(i, o, m) - L(o, j, m) * L(i, o, k);
          for (int a = 0; a < n; ++a) acc -= C(j, i, a) * Om(k, m, a);
          ct.R(i, j, k, m) = acc.value();
        }
  // P^{ic}_jk = d^c L^i_jk - hD_k C_j^{ic} + C_j^{io} P^c_ko, with P^c_ko = g^{ca} P_ako
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < n; ++c)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          RJet hD = F.derivative(k, C(j, i, c));
          for (int s = 0; s < n; ++s) {
            hD += L(i, s, k) * C(j, s, c);
            hD -= L(s, j, k) * C(s, i, c);
            hD += L(c, s, k) * C(j, i, s);
          }
          RJet acc = vert(c, L(i, j, k)) - hD;
          for (int o = 0; o < n; ++o) {
            RJet Pup = gu(c, 0) * gl(0, 0) * Pl(0, k, o);
            Pup = RJet(Pup.dim(), Pup.order());
            for (int a = 0; a < n; ++a)
              for (int e = 0; e < n; ++e) Pup += gu(c, a) * gl(a, e) * Pl(e, k, o);
            acc += C(j, i, o) * Pup;
          }
          ct.Pc(i, c, j, k) = acc.value();
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          RJet acc = vert(c, C(j, i, b)) - vert(b, C(j, i, c));
          for (int k = 0; k < n; ++k) acc += C(j, k, b) * C(k, i, c) - C(j, k, c) * C(k, i, b);
          ct.Sc(i, j, b, c) = acc.value();
        }
  return ct;
}

RicciResult ricci_scalar(const DConnectionCoeffs& phi, const FundamentalTensor& g) {
  const int d = phi.full.frame.dim();
  Tensor4<RJet> R = curvature(phi.full);
  Eigen::MatrixXd Gi = block_diag(g.hessian, g.inverse).values();
  RicciResult r;
  r.ricci = Eigen::MatrixXd::Zero(d, d);
  for (int b = 0; b < d; ++b)
    for (int c = 0; c < d; ++c)
      for (int a = 0; a < d; ++a) r.ricci(b, c) += R(a, b, c, a).value();
  r.scalar = (Gi.transpose() * r.ricci).trace();
  r.symmetric_norm = (0.5 * (r.ricci + r.ricci.transpose())).norm();
  r.antisymmetric_norm = (0.5 * (r.ricci - r.ricci.transpose())).norm();
  return r;
}

Eigen::MatrixXd einstein_residual(const DConnectionCoeffs& phi, const FundamentalTensor& g, double lambda) {
  RicciResult r = ricci_scalar(phi, g);
  Eigen::MatrixXd E = phi.full.frame.E.values();
  Eigen::MatrixXd Gi = block_diag(g.hessian, g.inverse).values();
  return E * Gi * r.ricci - 0.5 * (r.scalar + lambda) * E;
}

CompatibilityResiduals compatibility_residuals(const DConnectionCoeffs& c, const FundamentalTensor& g) {
  const int n = g.hessian.rows();
  const int d = 2 * n;
  RJetMatrix G = block_diag(g.inverse, g.hessian);
  CompatibilityResiduals r;
  r.metric_h = metric_compatibility_residual(c.full, G, 0, n);
  r.metric_v = metric_compatibility_residual(c.full, G, n, d);
  Tensor3<RJet> T = torsion(c.full);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int e = 0; e < n; ++e) {
        r.torsion_h = std::max(r.torsion_h, std::abs(T(a, b, e).value()));
        r.torsion_v = std::max(r.torsion_v, std::abs(T(n + a, n + b, n + e).value()));
      }
  return r;
}

// Expression-level wrappers ------------------------------------------------

namespace {

void require_bundle(const PhasePoint& pt, Bundle b) {
  if (pt.bundle != b) throw InputError(std::string("operation needs a point on the ") + bundle_name(b) + " bundle");
}

}  // namespace

FundamentalTensor fundamental_tensor_hamilton(const Expr& H, const PhasePoint& pt, int order) {
  require_bundle(pt, Bundle::Cotangent);
  return fundamental_tensor(eval_jet(H, pt, order), pt.n(), Bundle::Cotangent);
}

FundamentalTensor fundamental_tensor_lagrange(const Expr& L, const PhasePoint& pt, int order) {
  require_bundle(pt, Bundle::Tangent);
  return fundamental_tensor(eval_jet(L, pt, order), pt.n(), Bundle::Tangent);
}

FundamentalTensor vielbein_lift(const std::vector<std::vector<Expr>>& g_base, const std::vector<std::vector<Expr>>& e,
                                const PhasePoint& pt, int order) {
  require_bundle(pt, Bundle::Cotangent);
  const int n = pt.n();
  RJetMatrix gb(n, n, pt.dim(), order), E(n, n, pt.dim(), order);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      gb(i, j) = eval_jet(g_base[i][j], pt, order);
      E(i, j) = eval_jet(e[i][j], pt, order);
    }
  RJetMatrix gbi = jet_matrix_inverse(gb);
  FundamentalTensor g;
  g.bundle = Bundle::Cotangent;
  g.hessian = E * gbi * E.transpose();
  g.inverse = jet_matrix_inverse(g.hessian);
  return g;
}

std::vector<RJet> semi_spray(const Expr& L, const PhasePoint& pt, int order) {
  require_bundle(pt, Bundle::Tangent);
  RJet Lj = eval_jet(L, pt, order);
  FundamentalTensor g = fundamental_tensor(Lj, pt.n(), Bundle::Tangent);
  return semi_spray(Lj, g, pt.fiber);
}

NConnection nconnection_tangent(const Expr& L, const PhasePoint& pt, int order) {
  return nconnection_tangent(semi_spray(L, pt, order), pt.n());
}

NConnection nconnection_cotangent(const Expr& H, const PhasePoint& pt, int order) {
  require_bundle(pt, Bundle::Cotangent);
  RJet Hj = eval_jet(H, pt, order);
  return nconnection_cotangent(Hj, fundamental_tensor(Hj, pt.n(), Bundle::Cotangent));
}

RJet poisson_bracket(const Expr& f, const Expr& g, const PhasePoint& pt, int order) {
  require_bundle(pt, Bundle::Cotangent);
  return poisson_bracket(eval_jet(f, pt, order), eval_jet(g, pt, order), pt.n());
}

double dtheta_check(const Expr& H, const PhasePoint& pt, int order) {
  require_bundle(pt, Bundle::Cotangent);
  const int n = pt.n();
  const int d = 2 * n;
  RJet Hj = eval_jet(H, pt, order);
  FundamentalTensor g = fundamental_tensor(Hj, n, Bundle::Cotangent);
  NConnection N = nconnection_cotangent(Hj, g);
  AdaptedFrame f = adapted_frames(N, g, FrameVariant::NAdaptedCotangent);
  FrameStructures s = frame_structures(g);
  RJetMatrix th = f.field.C.transpose() * s.theta * f.field.C;
  double worst = 0.0;
  for (int l = 0; l < d; ++l)
    for (int m = 0; m < d; ++m)
      for (int k = 0; k < d; ++k) {
        RJet v = th(m, k).partial(l) + th(k, l).partial(m) + th(l, m).partial(k);
        worst = std::max(worst, v.max_abs());
      }
  return worst;
}

DConnectionCoeffs canonical_dconnection(const Expr& H, const PhasePoint& pt, int order) {
  require_bundle(pt, Bundle::Cotangent);
  RJet Hj = eval_jet(H, pt, order);
  FundamentalTensor g = fundamental_tensor(Hj, pt.n(), Bundle::Cotangent);
  return canonical_dconnection(g, nconnection_cotangent(Hj, g));
}

DConnectionCoeffs phi_connection(const Expr& H, const PhasePoint& pt, int order) {
  require_bundle(pt, Bundle::Cotangent);
  RJet Hj = eval_jet(H, pt, order);
  FundamentalTensor g = fundamental_tensor(Hj, pt.n(), Bundle::Cotangent);
  return phi_connection(g, nconnection_cotangent(Hj, g));
}

RicciResult ricci_scalar_phi(const Expr& H, const PhasePoint& pt, int order) {
  require_bundle(pt, Bundle::Cotangent);
  RJet Hj = eval_jet(H, pt, order);
  FundamentalTensor g = fundamental_tensor(Hj, pt.n(), Bundle::Cotangent);
  return ricci_scalar(phi_connection(g, nconnection_cotangent(Hj, g)), g);
}

Eigen::MatrixXd einstein_residual(const Expr& H, const PhasePoint& pt, double lambda, int order) {
  require_bundle(pt, Bundle::Cotangent);
  RJet Hj = eval_jet(H, pt, order);
  FundamentalTensor g = fundamental_tensor(Hj, pt.n(), Bundle::Cotangent);
  return einstein_residual(phi_connection(g, nconnection_cotangent(Hj, g)), g, lambda);
}

Tensor3<double> nijenhuis_sample(const Expr& H, const PhasePoint& pt, int order) {
  require_bundle(pt, Bundle::Cotangent);
  RJet Hj = eval_jet(H, pt, order);
  FundamentalTensor g = fundamental_tensor(Hj, pt.n(), Bundle::Cotangent);
  return almost_structures(g, nconnection_cotangent(Hj, g)).nijenhuis;
}

GeometryAtPoint evaluate_geometry(const Expr& H, const PhasePoint& pt, int order) {
  require_bundle(pt, Bundle::Cotangent);
  if (order < kGeometryJetOrder) throw InsufficientJetOrder("geometry evaluation needs jet order >= 6");
  GeometryAtPoint geo;
  geo.point = pt;
  geo.jet_order = order;
  geo.H = eval_jet(H, pt, order);
  geo.g = fundamental_tensor(geo.H, pt.n(), Bundle::Cotangent);
  geo.N = nconnection_cotangent(geo.H, geo.g);
  geo.n_frame = adapted_frames(geo.N, geo.g, FrameVariant::NAdaptedCotangent);
  geo.phi_frame = adapted_frames(geo.N, geo.g, FrameVariant::PhiAdapted);
  geo.canonical = canonical_dconnection(geo.g, geo.N);
  geo.phi = phi_connection(geo.g, geo.N);
  geo.canonical_ct = torsion_curvature(geo.canonical, geo.N, geo.g);
  geo.phi_ct = torsion_curvature(geo.phi, geo.N, geo.g);
  geo.structures = almost_structures(geo.g, geo.N);
  geo.ricci = ricci_scalar(geo.phi, geo.g);
  return geo;
}

}  // namespace hfq
