#include "hfq/fedosov.hpp"

#include <cmath>

namespace hfq {

namespace {

constexpr Complex kI(0.0, 1.0);

// g = L diag(D) L^T with unit lower-triangular L, no pivoting.
void jet_ldlt(const RJetMatrix& g, RJetMatrix& L, std::vector<RJet>& D) {
  const int n = g.rows();
  const int dim = g(0, 0).dim();
  const int K = g.min_order();
  L = RJetMatrix::identity(n, dim, K);
  D.assign(n, RJet(dim, K));
  for (int j = 0; j < n; ++j) {
    RJet dj = g(j, j).truncated(K);
    for (int k = 0; k < j; ++k) dj -= L(j, k) * L(j, k) * D[k];
    if (std::abs(dj.value()) < kDegeneracyTolerance * std::max(1.0, std::abs(g(j, j).value())))
      throw DegenerateHessian("vanishing pivot in the LDL^T factorisation of g_ij");
    D[j] = dj;
    RJet inv = reciprocal(dj);
    for (int i = j + 1; i < n; ++i) {
      RJet s = g(i, j).truncated(K);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k) * D[k];
      L(i, j) = s * inv;
    }
  }
}

std::vector<int> set_bits(std::uint32_t m) {
  std::vector<int> r;
  for (; m; m &= m - 1) r.push_back(__builtin_ctz(m));
  return r;
}

}  // namespace

FedosovFrame fedosov_frame(const FundamentalTensor& g, const NConnection& N) {
  const int n = g.hessian.rows();
  const int d = 2 * n;
  const int dim = g.hessian(0, 0).dim();
  FedosovFrame f;
  f.n = n;

  RJetMatrix L;
  std::vector<RJet> D;
  jet_ldlt(g.inverse, L, D);
  const int K = std::min(L.min_order(), N.coeffs.min_order());
  f.eta.resize(n);
  RJetMatrix Dm(n, n, dim, K), Dp(n, n, dim, K);
  for (int i = 0; i < n; ++i) {
    f.eta[i] = D[i].value() > 0 ? 1.0 : -1.0;
    RJet a = D[i] * f.eta[i];
    Dm(i, i) = pow(a, -0.5).truncated(K);
    Dp(i, i) = sqrt(a).truncated(K);
  }
  RJetMatrix Lt = L.transpose();
  RJetMatrix S = jet_matrix_inverse(Lt) * Dm;  // S^T g S = eta
  RJetMatrix Sit = L * Dp;                     // S^{-T}

  AdaptedFrame phi = adapted_frames(N, g, FrameVariant::PhiAdapted);
  RJetMatrix B(d, d, dim, K);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      B(i, j) = S(i, j).truncated(K);
      B(n + i, n + j) = Sit(i, j).truncated(K);
    }
  f.frame = make_frame(phi.field.E * B);

  RJetMatrix eta(n, n, dim, K);
  for (int i = 0; i < n; ++i) eta(i, i)[0] = f.eta[i];
  f.connection = split_koszul_connection(f.frame, eta, eta);
  f.torsion = torsion(f.connection);
  f.curvature = curvature(f.connection);

  f.omega = Eigen::MatrixXd::Zero(d, d);
  f.J = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    f.omega(i, n + i) = -1.0;
    f.omega(n + i, i) = 1.0;
    f.J(n + i, i) = -f.eta[i];
    f.J(i, n + i) = f.eta[i];
    G(i, i) = f.eta[i];
    G(n + i, n + i) = f.eta[i];
  }
  f.omega_inv = f.omega.inverse();
  f.lambda = f.omega.cast<Complex>() - kI * G.cast<Complex>();
  return f;
}

FedosovState::FedosovState(const Expr& H, const PhasePoint& pt, int dmax, int jet_order)
    : point_(pt), dmax_(dmax), jet_order_(jet_order > 0 ? jet_order : auto_jet_order(dmax)) {
  if (dmax_ < 2) throw InputError("Fedosov recursion needs D_max >= 2");
  if (jet_order_ < auto_jet_order(dmax_))
    throw InsufficientJetOrder("Fedosov recursion to D_max needs jet order >= max(6, 3 + D_max)");
  geo_ = evaluate_geometry(H, pt, jet_order_);
  frame_ = fedosov_frame(geo_.g, geo_.N);
  const int d = frame_.dim();
  alg_ = WickAlgebra(frame_.lambda, dmax_ + 2);

  E_.resize(static_cast<std::size_t>(d) * d);
  for (int mu = 0; mu < d; ++mu)
    for (int c = 0; c < d; ++c) E_[mu * d + c] = frame_.frame.E(mu, c).cast<Complex>();
  gamma_.resize(static_cast<std::size_t>(d) * d * d);
  gamma_nz_.resize(gamma_.size());
  W_.resize(gamma_.size());
  W_nz_.resize(gamma_.size());
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        std::size_t i = (static_cast<std::size_t>(a) * d + b) * d + c;
        gamma_[i] = frame_.connection.gamma(a, b, c).cast<Complex>();
        gamma_nz_[i] = gamma_[i].max_abs() > 0.0;
        W_[i] = frame_.connection.W(a, b, c).cast<Complex>();
        W_nz_[i] = W_[i].max_abs() > 0.0;
      }

  // Lifted torsion and curvature.
  const Eigen::MatrixXd& th = frame_.omega_inv;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      std::uint32_t forms = (1u << a) | (1u << b);
      for (int g = 0; g < d; ++g) {
        RJet t = frame_.torsion(0, a, b) * th(g, 0);
        for (int s = 1; s < d; ++s) t += frame_.torsion(s, a, b) * th(g, s);
        T_lift_.add(0, forms, alg_.z_times(0, g), t.cast<Complex>());
        for (int p = 0; p < d; ++p) {
          RJet rr = frame_.curvature(0, p, a, b) * th(g, 0);
          for (int s = 1; s < d; ++s) rr += frame_.curvature(s, p, a, b) * th(g, s);
          R_lift_.add(0, forms, alg_.z_times(alg_.z_times(0, g), p), rr.cast<Complex>(), 0.5);
        }
      }
    }
  T_lift_.prune();
  R_lift_.prune();

  r_parts_.assign(dmax_ + 1, WickElement());
  r_parts_[2] = alg_.delta_inv(T_lift_);
  for (int k = 2; k < dmax_; ++k) {
    WickElement x = extended_D(r_parts_[k]);
    if (k == 2) x += R_lift_;
    WickElement prod;
    for (int a = 2; a <= k; ++a) {
      int b = k + 2 - a;
      if (b < 2 || b > dmax_) continue;
      prod += alg_.product(r_parts_[a], r_parts_[b], k + 2);
    }
    x += WickAlgebra::divide_by_v(prod) * (-kI);
    x.prune();
    r_parts_[k + 1] = alg_.delta_inv(x);
  }
  for (int k = 2; k <= dmax_; ++k) r_ += r_parts_[k];
}

WickElement FedosovState::extended_D(const WickElement& a) const {
  const int d = frame_.dim();
  WickElement out;
  std::vector<CJet> dc(d);
  for (const auto& [key, c] : a.terms()) {
    WickKey t = WickKey::unpack(key);
    const bool derive = c.order() >= 1;
    if (derive)
      for (int mu = 0; mu < d; ++mu) dc[mu] = c.partial(mu);
    for (int g = 0; g < d; ++g) {
      if (t.forms >> g & 1u) continue;
      const std::uint32_t forms = t.forms | (1u << g);
      const double sg = wedge_sign(1u << g, t.forms);
      if (derive) {
        CJet acc = E_[g] * dc[0];
        for (int mu = 1; mu < d; ++mu) acc += E_[mu * d + g] * dc[mu];
        out.add(t.v, forms, t.z, acc, sg);
      } else if (c.max_abs() != 0.0) {
        throw InsufficientJetOrder("frame derivative of an order-0 coefficient");
      }
      for (int rho = 0; rho < d; ++rho) {
        const int e = alg_.z_exp(t.z, rho);
        if (!e) continue;
        const int zr = alg_.z_div(t.z, rho);
        for (int b = 0; b < d; ++b) {
          std::size_t gi = (static_cast<std::size_t>(rho) * d + b) * d + g;
          if (!gamma_nz_[gi]) continue;
          out.add(t.v, forms, alg_.z_times(zr, b), gamma_[gi] * c, -sg * e);
        }
      }
    }
    // c z^A d(e^I)
    std::vector<int> idx = set_bits(t.forms);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const int al = idx[j];
      const std::uint32_t rest = t.forms & ~(1u << al);
      const double pos = j % 2 ? -1.0 : 1.0;
      for (int mu = 0; mu < d; ++mu)
        for (int nu = mu + 1; nu < d; ++nu) {
          const std::uint32_t pair = (1u << mu) | (1u << nu);
          const int ws = wedge_sign(pair, rest);
          if (!ws) continue;
          std::size_t wi = (static_cast<std::size_t>(al) * d + mu) * d + nu;
          if (!W_nz_[wi]) continue;
          out.add(t.v, pair | rest, t.z, W_[wi] * c, -pos * ws);
        }
    }
  }
  out.prune();
  return out;
}

WickElement FedosovState::flat_D(const WickElement& a, int limit) const {
  WickElement out = extended_D(a) - alg_.delta(a);
  WickElement ad = alg_.commutator(r_, a, limit + 2);
  out += WickAlgebra::divide_by_v(ad) * (-kI);
  out = alg_.truncated(out, limit);
  out.prune();
  return out;
}

CJet FedosovState::jet_of(const Expr& f) const {
  if (f.bundle() != Bundle::Cotangent || f.n() != n()) throw InputError("star-product operands must live on T*M");
  return eval_jet(f, point_, jet_order_).cast<Complex>();
}

WickElement FedosovState::tau(const CJet& f, int max_deg) const {
  if (max_deg > dmax_ - 1) throw InsufficientJetOrder("tau lift beyond Deg D_max - 1 needs a larger D_max");
  std::vector<WickElement> parts(max_deg + 1);
  parts[0] = WickElement::scalar(f);
  for (int k = 0; k < max_deg; ++k) {
    WickElement x = extended_D(parts[k]);
    WickElement comm;
    for (int l = 0; l <= k; ++l) comm += alg_.commutator(r_parts_[l + 2], parts[k - l], k + 2);
    x += WickAlgebra::divide_by_v(comm) * (-kI);
    x.prune();
    parts[k + 1] = alg_.delta_inv(x);
  }
  WickElement t;
  for (const auto& p : parts) t += p;
  return t;
}

WickElement FedosovState::tau(const Expr& f, int max_deg) const { return tau(jet_of(f), max_deg); }

std::vector<CJet> FedosovState::star_series(const std::vector<CJet>& F, const std::vector<CJet>& G, int vmax) const {
  const int L = 2 * vmax;
  auto lift = [&](const std::vector<CJet>& S) {
    WickElement t;
    for (int r = 0; r < static_cast<int>(S.size()) && r <= vmax; ++r) {
      WickElement piece = tau(S[r], L - 2 * r);
      for (const auto& [k, c] : piece.terms()) {
        WickKey w = WickKey::unpack(k);
        t.add(w.v + r, w.forms, w.z, c);
      }
    }
    return t;
  };
  WickElement p = alg_.sigma(alg_.product(lift(F), lift(G), L));
  std::vector<CJet> out(vmax + 1);
  for (int r = 0; r <= vmax; ++r) {
    const CJet* c = p.find(r, 0, 0);
    out[r] = c ? *c : CJet(F.front().dim(), 0);
  }
  return out;
}

std::vector<Complex> FedosovState::star(const Expr& f, const Expr& g, int vmax) const {
  std::vector<CJet> s = star_series({jet_of(f)}, {jet_of(g)}, vmax);
  std::vector<Complex> out;
  for (const auto& c : s) out.push_back(c.value());
  return out;
}

double FedosovState::recursion_residual() const {
  const int lim = dmax_ - 1;
  WickElement lhs = alg_.truncated(alg_.delta(r_), lim);
  WickElement rhs = T_lift_ + R_lift_ + extended_D(r_);
  rhs += WickAlgebra::divide_by_v(alg_.product(r_, r_, lim + 2)) * (-kI);
  WickElement res = lhs - alg_.truncated(rhs, lim);
  return res.max_abs_value();
}

double FedosovState::delta_inv_r() const { return alg_.delta_inv(r_).max_abs_value(); }

int FedosovState::r_form_degree() const {
  int m = 0;
  for (const auto& [k, c] : r_.terms()) m = std::max(m, form_degree(WickKey::unpack(k).forms));
  return m;
}

double FedosovState::flatness_residual(const WickElement& a, int j) const {
  const int lim = dmax_ + j - 3;
  if (lim < 0) return 0.0;
  if (lim + 3 > alg_.max_z()) throw InsufficientJetOrder("flatness check beyond the Wick truncation");
  WickElement once = flat_D(a, lim + 1);
  WickElement twice = flat_D(once, lim);
  return twice.max_abs_value();
}

ChernWeyl FedosovState::chern_weyl() const {
  const int d = frame_.dim();
  const int dim = point_.dim();
  const RJetMatrix& C = frame_.frame.C;
  const Eigen::MatrixXd& J = frame_.J;
  const int K = std::min(min_order(frame_.curvature), C.min_order());
  RJetMatrix trJR(d, d, dim, K);  // frame components of tr(J R)
  for (int m = 0; m < d; ++m)
    for (int v = 0; v < d; ++v) {
      RJet acc(dim, K);
      for (int a = 0; a < d; ++a)
        for (int t = 0; t < d; ++t)
          if (J(a, t) != 0.0) acc += frame_.curvature(t, a, m, v) * J(a, t);
      trJR(m, v) = acc;
    }
  RJetMatrix trJRc = C.transpose() * trJR * C;

  const int Kt = std::min(min_order(frame_.torsion), C.min_order());
  std::vector<RJet> tf(d, RJet(dim, Kt));
  for (int b = 0; b < d; ++b)
    for (int a = 0; a < d; ++a)
      for (int t = 0; t < d; ++t)
        if (J(a, t) != 0.0) tf[b] += frame_.torsion(t, a, b) * J(a, t);
  std::vector<RJet> tc(d);
  for (int mu = 0; mu < d; ++mu) {
    RJet acc = tf[0] * C(0, mu);
    for (int b = 1; b < d; ++b) acc += tf[b] * C(b, mu);
    tc[mu] = acc;
  }

  ChernWeyl cw;
  cw.gamma = Eigen::MatrixXd::Zero(d, d);
  cw.kappa = Eigen::MatrixXcd::Zero(d, d);
  for (int m = 0; m < d; ++m)
    for (int v = 0; v < d; ++v) {
      cw.gamma(m, v) = -0.25 * trJRc(m, v).value();
      double dt = tc[v].partial(m).value() - tc[m].partial(v).value();
      cw.kappa(m, v) = -kI / 8.0 * trJRc(m, v).value() - kI / 6.0 * dt;
    }
  cw.c0 = -1.0 / (2.0 * kI) * cw.gamma.cast<Complex>();
  for (int l = 0; l < d; ++l)
    for (int m = l + 1; m < d; ++m)
      for (int v = m + 1; v < d; ++v) {
        double s = trJRc(m, v).partial(l).value() + trJRc(v, l).partial(m).value() + trJRc(l, m).partial(v).value();
        cw.dgamma = std::max(cw.dgamma, 0.25 * std::abs(s));
        Complex q = -kI / 8.0 * s;
        for (int c = 0; c < 3; ++c) {
          const int x = c == 0 ? l : c == 1 ? m : v;
          const int y = c == 0 ? m : c == 1 ? v : l;
          const int w = c == 0 ? v : c == 1 ? l : m;
          RJet dt = tc[w].partial(y) - tc[y].partial(w);
          q -= kI / 6.0 * dt.partial(x).value();
        }
        cw.dkappa = std::max(cw.dkappa, std::abs(q));
      }
  return cw;
}

}  // namespace hfq
