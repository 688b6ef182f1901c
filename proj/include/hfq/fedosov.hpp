#pragma once

// Fedosov quantization at one point of T*M.
//
// Work happens in an orthonormalised connection-pair frame: the phi-adapted
// frame (e_i, w^b) is rescaled by a jet Cholesky factor S of g_ij, so that
// both blocks of the lifted metric equal eta = diag(+-1) and theta takes the
// constant form [[0, -I], [I, 0]].  Lambda = theta^{..} - i g^{..} is then a
// constant matrix and the Wick product tables can be built once.

#include <vector>

#include "hfq/geometry.hpp"
#include "hfq/wick.hpp"

namespace hfq {

struct FedosovFrame {
  int n = 0;
  Eigen::VectorXd eta;           // signature of g_ij
  FrameField frame;              // orthonormal phi-frame
  LinearConnection connection;   // phi-connection in that frame
  Tensor3<RJet> torsion;         // T(a, b, c) = (T(e_b, e_c))^a
  Tensor4<RJet> curvature;       // R(a, b, c, d) = (R(e_c, e_d) e_b)^a
  Eigen::MatrixXd omega;         // theta(e_a, e_b)
  Eigen::MatrixXd omega_inv;     // lowers z-indices in the lifts
  Eigen::MatrixXd J;             // almost complex structure, J(a, b) = (J e_b)^a
  Eigen::MatrixXcd lambda;

  int dim() const { return 2 * n; }
};

FedosovFrame fedosov_frame(const FundamentalTensor& g, const NConnection& N);

struct ChernWeyl {
  Eigen::MatrixXd gamma;    // coordinate components gamma_{mu nu}
  Eigen::MatrixXcd kappa;
  Eigen::MatrixXcd c0;      // -(1/2i) gamma
  double dgamma = 0.0;      // max |(d gamma)_{lambda mu nu}|
  double dkappa = 0.0;
};

class FedosovState {
 public:
  // jet_order <= 0 selects auto_jet_order(dmax).
  FedosovState(const Expr& H, const PhasePoint& pt, int dmax, int jet_order = 0);

  static int auto_jet_order(int dmax) { return std::max(kGeometryJetOrder, dmax + 3); }

  int dmax() const { return dmax_; }
  int jet_order() const { return jet_order_; }
  int n() const { return frame_.n; }
  const PhasePoint& point() const { return point_; }
  const WickAlgebra& algebra() const { return alg_; }
  const FedosovFrame& frame() const { return frame_; }

  // Highest v-order of the star product computed exactly at this dmax.
  int max_exact_v_order() const { return (dmax_ - 1) / 2; }

  // e^c wedge (e_c a - Gamma^r_{bc} z^b d_r a) + a d(forms)
  WickElement extended_D(const WickElement& a) const;
  const WickElement& torsion_lift() const { return T_lift_; }
  const WickElement& curvature_lift() const { return R_lift_; }

  // Deg-homogeneous pieces r^(k), k = 2..dmax, and their sum.
  const WickElement& r_component(int k) const { return r_parts_[k]; }
  const WickElement& r() const { return r_; }

  // -delta a + D a - (i/v) ad(r) a, keeping Deg <= limit.
  WickElement flat_D(const WickElement& a, int limit) const;

  // Flat section with sigma(tau) = f, through Deg max_deg (<= dmax - 1).
  WickElement tau(const CJet& f, int max_deg) const;
  WickElement tau(const Expr& f, int max_deg) const;

  // v-coefficients of sigma(tau(F) o tau(G)) as jets, where F and G are
  // formal series in v given by their coefficient jets.
  std::vector<CJet> star_series(const std::vector<CJet>& F, const std::vector<CJet>& G, int vmax) const;
  std::vector<Complex> star(const Expr& f, const Expr& g, int vmax) const;
  CJet jet_of(const Expr& f) const;

  // max |delta r - (T + R + D r - (i/v) r o r)| over Deg <= dmax - 1
  double recursion_residual() const;
  double delta_inv_r() const;
  // max deg_a(r) over terms (should be 1)
  int r_form_degree() const;
  // Components of D^2 a of Deg <= dmax + j - 3, for a of minimal Deg j.
  double flatness_residual(const WickElement& a, int j) const;

  ChernWeyl chern_weyl() const;

 private:
  PhasePoint point_;
  int dmax_ = 0;
  int jet_order_ = 0;
  GeometryAtPoint geo_;
  FedosovFrame frame_;
  WickAlgebra alg_;
  // complex copies of the frame data
  std::vector<CJet> E_;      // E(mu, c) row-major
  std::vector<CJet> gamma_;  // Gamma(a, b, c)
  std::vector<char> gamma_nz_;
  std::vector<CJet> W_;      // W(a, b, c)
  std::vector<char> W_nz_;
  WickElement T_lift_, R_lift_;
  std::vector<WickElement> r_parts_;
  WickElement r_;
};

}  // namespace hfq
