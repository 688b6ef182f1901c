#pragma once

// Frame-based linear connection machinery on a 2n-dimensional phase space.
//
// A frame is stored as the jet matrix E whose column b holds the coordinate
// components of e_b; the coframe C = E^{-1} has the dual 1-forms as rows.
// Connection coefficients follow D_{e_c} e_b = Gamma(a, b, c) e_a.

#include <array>
#include <vector>

#include "hfq/jet.hpp"

namespace hfq {

template <typename T, int Rank>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::array<int, Rank> shape, const T& fill = T()) : shape_(shape) {
    std::size_t n = 1;
    for (int s : shape_) n *= static_cast<std::size_t>(s);
    data_.assign(n, fill);
  }

  template <typename... I>
  T& operator()(I... idx) {
    return data_[offset({static_cast<int>(idx)...})];
  }
  template <typename... I>
  const T& operator()(I... idx) const {
    return data_[offset({static_cast<int>(idx)...})];
  }

  const std::array<int, Rank>& shape() const { return shape_; }
  int extent(int k) const { return shape_[k]; }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

 private:
  std::size_t offset(std::array<int, Rank> idx) const {
    std::size_t o = 0;
    for (int k = 0; k < Rank; ++k) o = o * static_cast<std::size_t>(shape_[k]) + static_cast<std::size_t>(idx[k]);
    return o;
  }

  std::array<int, Rank> shape_{};
  std::vector<T> data_;
};

template <typename T>
using Tensor3 = Tensor<T, 3>;
template <typename T>
using Tensor4 = Tensor<T, 4>;

// Constant terms of a jet tensor.
template <int Rank>
Tensor<double, Rank> values(const Tensor<RJet, Rank>& t) {
  Tensor<double, Rank> v(t.shape());
  for (std::size_t i = 0; i < t.data().size(); ++i) v.data()[i] = t.data()[i].empty() ? 0.0 : t.data()[i].value();
  return v;
}

template <typename T, int Rank>
double max_abs(const Tensor<T, Rank>& t) {
  double m = 0.0;
  for (const auto& x : t.data()) m = std::max(m, std::abs(x));
  return m;
}

template <int Rank>
double max_abs(const Tensor<RJet, Rank>& t) {
  double m = 0.0;
  for (const auto& x : t.data())
    if (!x.empty()) m = std::max(m, std::abs(x.value()));
  return m;
}

using VectorField = std::vector<RJet>;  // coordinate components

// X(f) = X^mu d_mu f
RJet directional(const VectorField& X, const RJet& f);
VectorField lie_bracket(const VectorField& X, const VectorField& Y);
VectorField column(const RJetMatrix& E, int b);

struct FrameField {
  RJetMatrix E;  // columns: frame vectors
  RJetMatrix C;  // rows: coframe (E^{-1})

  int dim() const { return E.rows(); }
  VectorField vector(int b) const { return column(E, b); }
  RJet derivative(int b, const RJet& f) const;  // e_b(f)
};

FrameField make_frame(RJetMatrix E);

// W(g, a, b) with [e_a, e_b] = W^g_{ab} e_g.
Tensor3<RJet> structure_functions(const FrameField& frame);

struct LinearConnection {
  FrameField frame;
  Tensor3<RJet> gamma;  // (a, b, c): D_{e_c} e_b = gamma(a,b,c) e_a
  Tensor3<RJet> W;      // structure functions of the frame
};

// T(a, b, c) = (D_{e_b} e_c - D_{e_c} e_b - [e_b, e_c])^a
Tensor3<RJet> torsion(const LinearConnection& conn);
// R(a, b, c, d) = (R(e_c, e_d) e_b)^a
Tensor4<RJet> curvature(const LinearConnection& conn);

// Connection on a frame split into an h-part (first n vectors) and a
// w-part (last n vectors), preserving the split, the metrics Gh and Gw and
// the pairing theta(e_i, w^b) = const * delta.  Along h directions the
// h-block is the Koszul connection of Gh built from the h-components of the
// frame brackets, along w directions the w-block is the Koszul connection of
// Gw built from the w-components; the remaining blocks are fixed by duality.
// Requires Gw = Gh^{-1}.
LinearConnection split_koszul_connection(const FrameField& frame, const RJetMatrix& Gh, const RJetMatrix& Gw);

// Residual X(G) - Gamma(X)^T G - G Gamma(X) for a frame metric G,
// maximised over the frame directions X = e_c, c in [c_begin, c_end).
double metric_compatibility_residual(const LinearConnection& conn, const RJetMatrix& G, int c_begin = 0,
                                     int c_end = -1);

// max |[e_a, e_b] - W^g_{ab} e_g| in coordinate components for a supplied W.
double anholonomy_residual(const FrameField& frame, const Tensor3<RJet>& W);

RJetMatrix block_diag(const RJetMatrix& a, const RJetMatrix& b);

// Minimum jet order over a tensor (entries may have been truncated unevenly).
template <int Rank>
int min_order(const Tensor<RJet, Rank>& t) {
  int k = kMaxJetOrder;
  for (const auto& x : t.data())
    if (!x.empty()) k = std::min(k, x.order());
  return k;
}

}  // namespace hfq
