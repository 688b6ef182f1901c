#pragma once

// Geometric tower of a regular Hamiltonian H(x,p) on T*M (and the Lagrange
// counterpart on TM), evaluated at one point through jets.
//
// Coordinates are u = (x^1..x^n, p_1..p_n).  Frame vectors are ordered
// (e_1..e_n, vertical or oblique 1..n).  Index conventions of the stored
// coefficient arrays are spelled out next to each field.

#include <Eigen/Dense>

#include "hfq/connection.hpp"
#include "hfq/expr.hpp"

namespace hfq {

// {f, g} = kPoissonSign * sum_i (df/dp_i dg/dx^i - df/dx^i dg/dp_i), the
// bracket theta(X_f, X_g) for theta = dp_i ^ dx^i and i_{X_f} theta = -df.
inline constexpr double kPoissonSign = 1.0;

inline constexpr int kGeometryJetOrder = 6;

struct FundamentalTensor {
  Bundle bundle = Bundle::Cotangent;
  // Fiber Hessian: g^{ab} = d2H/dp_a dp_b on T*M, g_ab = d2L/dy^a dy^b on TM.
  RJetMatrix hessian;
  RJetMatrix inverse;
};

struct NConnection {
  Bundle bundle = Bundle::Cotangent;
  // T*M: N(i, a) = *N_ia (symmetric).  TM: N(i, a) = N_i^a.
  RJetMatrix coeffs;
};

enum class FrameVariant { NAdaptedTangent, NAdaptedCotangent, PhiAdapted };

struct AdaptedFrame {
  FrameVariant variant = FrameVariant::NAdaptedCotangent;
  FrameField field;

  // Column b = coordinate components of frame vector b.
  Eigen::MatrixXd frame_matrix() const { return field.E.values(); }
  // Row b = coordinate components of the dual 1-form b.
  Eigen::MatrixXd coframe_matrix() const { return field.C.values(); }
};

enum class ConnectionKind { CanonicalD, PhiPair };

struct DConnectionCoeffs {
  ConnectionKind kind = ConnectionKind::CanonicalD;
  Tensor3<RJet> hL;  // (i, j, k): D_{e_k} e_j = L^i_jk e_i
  Tensor3<RJet> vC;  // (j, i, c): D_{v^c} e_j = C_j^{ic} e_i, v^c the second half of the frame
  LinearConnection full;
};

struct CurvatureTorsion {
  Tensor3<double> Omega;  // (i, j, a) = e_j(N_ia) - e_i(N_ja)
  Tensor3<double> T;      // (k, i, j) = L^k_ij - L^k_ji
  Tensor3<double> S;      // (a, b, c) = C_a^{bc} - C_a^{cb}
  Tensor3<double> P;      // (a, i, c) = g_ae (L^e_ic - d^e N_ic)
  Tensor4<double> R;      // (i, j, k, m) = R^i_jkm
  Tensor4<double> Pc;     // (i, c, j, k) = P^{ic}_jk
  Tensor4<double> Sc;     // (i, j, b, c) = S^{ibc}_j
  Tensor3<double> W;      // (g, a, b): anholonomy of the frame
};

struct AlmostStructures {
  // Coordinate-basis matrices; (1,1) tensors act on column vectors.
  Eigen::MatrixXd J, P, Jtangent, theta, metric;
  // (g, a, b): N-adapted components of the Nijenhuis tensor N_J(e_a, e_b).
  Tensor3<double> nijenhuis;
};

// Jet-level building blocks -------------------------------------------------

FundamentalTensor fundamental_tensor(const RJet& generator, int n, Bundle bundle);
NConnection nconnection_cotangent(const RJet& H, const FundamentalTensor& g);
RJet poisson_bracket(const RJet& f, const RJet& g, int n);

// Semi-spray coefficients G^i of a Lagrangian jet expanded at fiber value y0.
std::vector<RJet> semi_spray(const RJet& L, const FundamentalTensor& g, const Eigen::VectorXd& y0);
NConnection nconnection_tangent(const std::vector<RJet>& G, int n);

AdaptedFrame adapted_frames(const NConnection& N, const FundamentalTensor& g, FrameVariant variant);
RJetMatrix metric_lift(const FundamentalTensor& g, const NConnection& N);
AlmostStructures almost_structures(const FundamentalTensor& g, const NConnection& N);

DConnectionCoeffs canonical_dconnection(const FundamentalTensor& g, const NConnection& N);
DConnectionCoeffs phi_connection(const FundamentalTensor& g, const NConnection& N);
CurvatureTorsion torsion_curvature(const DConnectionCoeffs& coeffs, const NConnection& N, const FundamentalTensor& g);

// Anholonomy coefficients predicted by the N-connection formulas.
Tensor3<RJet> nadapted_anholonomy(const NConnection& N);
Tensor3<RJet> nconnection_curvature(const NConnection& N);  // Omega(i, j, a)

struct RicciResult {
  Eigen::MatrixXd ricci;  // (b, c) = R^a_{b c a} in the phi-frame
  double scalar = 0.0;
  double symmetric_norm = 0.0;
  double antisymmetric_norm = 0.0;
};

// Expression-level operations (order = jet order, default kGeometryJetOrder)

FundamentalTensor fundamental_tensor_hamilton(const Expr& H, const PhasePoint& pt, int order = kGeometryJetOrder);
FundamentalTensor fundamental_tensor_lagrange(const Expr& L, const PhasePoint& pt, int order = kGeometryJetOrder);
// upper g^{ij} = e^i_k e^j_l (g_base^{-1})^{kl}; g_base entries depend on x only.
FundamentalTensor vielbein_lift(const std::vector<std::vector<Expr>>& g_base, const std::vector<std::vector<Expr>>& e,
                                const PhasePoint& pt, int order = kGeometryJetOrder);
std::vector<RJet> semi_spray(const Expr& L, const PhasePoint& pt, int order = kGeometryJetOrder);
NConnection nconnection_tangent(const Expr& L, const PhasePoint& pt, int order = kGeometryJetOrder);
NConnection nconnection_cotangent(const Expr& H, const PhasePoint& pt, int order = kGeometryJetOrder);
RJet poisson_bracket(const Expr& f, const Expr& g, const PhasePoint& pt, int order = kGeometryJetOrder);
double dtheta_check(const Expr& H, const PhasePoint& pt, int order = kGeometryJetOrder);
DConnectionCoeffs canonical_dconnection(const Expr& H, const PhasePoint& pt, int order = kGeometryJetOrder);
DConnectionCoeffs phi_connection(const Expr& H, const PhasePoint& pt, int order = kGeometryJetOrder);
RicciResult ricci_scalar_phi(const Expr& H, const PhasePoint& pt, int order = kGeometryJetOrder);
Eigen::MatrixXd einstein_residual(const Expr& H, const PhasePoint& pt, double lambda, int order = kGeometryJetOrder);
Tensor3<double> nijenhuis_sample(const Expr& H, const PhasePoint& pt, int order = kGeometryJetOrder);

RicciResult ricci_scalar(const DConnectionCoeffs& phi, const FundamentalTensor& g);
Eigen::MatrixXd einstein_residual(const DConnectionCoeffs& phi, const FundamentalTensor& g, double lambda);

// Everything above for one Hamiltonian at one point.
struct GeometryAtPoint {
  PhasePoint point;
  int jet_order = 0;
  RJet H;
  FundamentalTensor g;
  NConnection N;
  AdaptedFrame n_frame, phi_frame;
  DConnectionCoeffs canonical, phi;
  CurvatureTorsion canonical_ct, phi_ct;
  AlmostStructures structures;
  RicciResult ricci;
};

GeometryAtPoint evaluate_geometry(const Expr& H, const PhasePoint& pt, int order = kGeometryJetOrder);

// Residuals of the compatibility conditions, split by direction block.
struct CompatibilityResiduals {
  double metric_h = 0.0;  // directions e_k
  double metric_v = 0.0;  // directions in the second half of the frame
  double torsion_h = 0.0; // h-part of T(e_i, e_j)
  double torsion_v = 0.0; // v-part of T(v^b, v^c)
};
CompatibilityResiduals compatibility_residuals(const DConnectionCoeffs& c, const FundamentalTensor& g);

}  // namespace hfq
