#include "hfq/connection.hpp"

namespace hfq {

RJet directional(const VectorField& X, const RJet& f) {
  RJet acc = X[0] * f.partial(0);
  for (std::size_t mu = 1; mu < X.size(); ++mu) acc += X[mu] * f.partial(static_cast<int>(mu));
  return acc;
}

VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
  VectorField Z(X.size());
  for (std::size_t mu = 0; mu < X.size(); ++mu) Z[mu] = directional(X, Y[mu]) - directional(Y, X[mu]);
  return Z;
}

VectorField column(const RJetMatrix& E, int b) {
  VectorField v(E.rows());
  for (int mu = 0; mu < E.rows(); ++mu) v[mu] = E(mu, b);
  return v;
}

RJet FrameField::derivative(int b, const RJet& f) const { return directional(vector(b), f); }

FrameField make_frame(RJetMatrix E) {
  FrameField f;
  f.C = jet_matrix_inverse(E);
  f.E = std::move(E);
  return f;
}

Tensor3<RJet> structure_functions(const FrameField& frame) {
  const int d = frame.dim();
  Tensor3<RJet> W({d, d, d});
  std::vector<VectorField> e(d);
  for (int a = 0; a < d; ++a) e[a] = frame.vector(a);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      if (a == b) {
        RJet zero = RJet(e[a][0].dim(), std::max(0, e[a][0].order() - 1));
        for (int g = 0; g < d; ++g) W(g, a, b) = zero;
        continue;
      }
      VectorField br = lie_bracket(e[a], e[b]);
      for (int g = 0; g < d; ++g) {
        RJet acc = frame.C(g, 0) * br[0];
        for (int mu = 1; mu < d; ++mu) acc += frame.C(g, mu) * br[mu];
        W(g, a, b) = acc;
        W(g, b, a) = -acc;
      }
    }
  return W;
}

Tensor3<RJet> torsion(const LinearConnection& conn) {
  const int d = conn.frame.dim();
  Tensor3<RJet> T({d, d, d});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) T(a, b, c) = conn.gamma(a, c, b) - conn.gamma(a, b, c) - conn.W(a, b, c);
  return T;
}

Tensor4<RJet> curvature(const LinearConnection& conn) {
  const int d = conn.frame.dim();
  Tensor4<RJet> R({d, d, d, d});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = c + 1; e < d; ++e) {
          RJet acc = conn.frame.derivative(c, conn.gamma(a, b, e)) - conn.frame.derivative(e, conn.gamma(a, b, c));
          for (int r = 0; r < d; ++r) {
            acc += conn.gamma(a, r, c) * conn.gamma(r, b, e);
            acc -= conn.gamma(a, r, e) * conn.gamma(r, b, c);
            acc -= conn.W(r, c, e) * conn.gamma(a, b, r);
          }
          R(a, b, c, e) = acc;
          R(a, b, e, c) = -acc;
        }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        const RJet& g = conn.gamma(a, b, c);
        R(a, b, c, c) = RJet(g.dim(), std::max(0, g.order() - 1));
      }
  return R;
}

namespace {

// Koszul connection of metric G on the sub-frame starting at `off`, using
// the sub-frame components of the brackets.  Returns Gamma(k, j, i) with
// all indices local to the block; Ginv raises the first index.
Tensor3<RJet> block_koszul(const FrameField& frame, const Tensor3<RJet>& W, const RJetMatrix& G,
                           const RJetMatrix& Ginv, int off) {
  const int n = G.rows();
  auto c = [&](int i, int j, int m) {
    RJet acc = G(m, 0) * W(off, off + i, off + j);
    for (int k = 1; k < n; ++k) acc += G(m, k) * W(off + k, off + i, off + j);
    return acc;
  };
  Tensor3<RJet> low({n, n, n});
  for (int m = 0; m < n; ++m)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        RJet s = frame.derivative(off + i, G(j, m)) + frame.derivative(off + j, G(i, m)) -
                 frame.derivative(off + m, G(i, j)) + c(i, j, m) - c(i, m, j) - c(j, m, i);
        low(m, j, i) = s * 0.5;
      }
  Tensor3<RJet> up({n, n, n});
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        RJet acc = Ginv(k, 0) * low(0, j, i);
        for (int m = 1; m < n; ++m) acc += Ginv(k, m) * low(m, j, i);
        up(k, j, i) = acc;
      }
  return up;
}

}  // namespace

LinearConnection split_koszul_connection(const FrameField& frame, const RJetMatrix& Gh, const RJetMatrix& Gw) {
  const int d = frame.dim();
  const int n = d / 2;
  LinearConnection conn;
  conn.frame = frame;
  conn.W = structure_functions(frame);
  Tensor3<RJet> Lh = block_koszul(frame, conn.W, Gh, Gw, 0);
  Tensor3<RJet> Kw = block_koszul(frame, conn.W, Gw, Gh, n);

  const RJet& ref = Lh(0, 0, 0);
  RJet zero(ref.dim(), std::min(ref.order(), Kw(0, 0, 0).order()));
  conn.gamma = Tensor3<RJet>({d, d, d}, zero);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        // along h directions
        conn.gamma(k, j, i) = Lh(k, j, i);
        conn.gamma(n + j, n + k, i) = -Lh(k, j, i);
        // along w directions
        conn.gamma(n + k, n + j, n + i) = Kw(k, j, i);
        conn.gamma(j, k, n + i) = -Kw(k, j, i);
      }
  return conn;
}

double metric_compatibility_residual(const LinearConnection& conn, const RJetMatrix& G, int c_begin, int c_end) {
  const int d = conn.frame.dim();
  if (c_end < 0) c_end = d;
  double worst = 0.0;
  for (int c = c_begin; c < c_end; ++c)
    for (int b = 0; b < d; ++b)
      for (int g = 0; g < d; ++g) {
        double r = conn.frame.derivative(c, G(b, g)).value();
        for (int p = 0; p < d; ++p) {
          r -= conn.gamma(p, b, c).value() * G(p, g).value();
          r -= G(b, p).value() * conn.gamma(p, g, c).value();
        }
        worst = std::max(worst, std::abs(r));
      }
  return worst;
}

double anholonomy_residual(const FrameField& frame, const Tensor3<RJet>& W) {
  const int d = frame.dim();
  double worst = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      VectorField br = lie_bracket(frame.vector(a), frame.vector(b));
      for (int mu = 0; mu < d; ++mu) {
        double r = br[mu].value();
        for (int g = 0; g < d; ++g) r -= W(g, a, b).value() * frame.E(mu, g).value();
        worst = std::max(worst, std::abs(r));
      }
    }
  return worst;
}

RJetMatrix block_diag(const RJetMatrix& a, const RJetMatrix& b) {
  const int n = a.rows(), m = b.rows();
  const int dim = a(0, 0).dim();
  const int K = std::min(a.min_order(), b.min_order());
  RJetMatrix r(n + m, n + m, dim, K);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = a(i, j).truncated(K);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) r(n + i, n + j) = b(i, j).truncated(K);
  return r;
}

}  // namespace hfq
