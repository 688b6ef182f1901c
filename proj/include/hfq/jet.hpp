#pragma once

// Dense truncated multivariate Taylor series.
//
// A Jet of dimension d and order K stores c_alpha = (d^alpha f / alpha!)(u0)
// for every multi-index |alpha| <= K, ranked in graded-lexicographic order.
// Because the ordering is graded, truncating to a lower order keeps a prefix
// of the coefficient vector, and ranks do not depend on K.
//
// Binary operators accept operands of different order and work in the lower
// one (a K-jet is also a k-jet for k < K).  The jet_add / jet_mul family
// insists on equal orders.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <type_traits>
#include <vector>

#include "hfq/errors.hpp"

namespace hfq {

inline constexpr int kMaxJetOrder = 15;
inline constexpr int kMaxJetDim = 16;

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int dim) : e_(dim, 0) {}
  MultiIndex(std::initializer_list<int> e) : e_(e) {}
  explicit MultiIndex(std::vector<int> e) : e_(std::move(e)) {}

  static MultiIndex unit(int dim, int slot) {
    MultiIndex m(dim);
    m.e_[slot] = 1;
    return m;
  }

  int dim() const { return static_cast<int>(e_.size()); }
  int degree() const {
    int s = 0;
    for (int v : e_) s += v;
    return s;
  }
  int operator[](int i) const { return e_[i]; }
  int& operator[](int i) { return e_[i]; }
  const std::vector<int>& exponents() const { return e_; }

  MultiIndex operator+(const MultiIndex& o) const {
    MultiIndex r(*this);
    for (int i = 0; i < dim(); ++i) r.e_[i] += o.e_[i];
    return r;
  }
  bool operator==(const MultiIndex& o) const { return e_ == o.e_; }
  // alpha! = prod alpha_i!
  double factorial() const;

 private:
  std::vector<int> e_;
};

// Precomputed ranking and product tables for one (dim, order) pair.
// Tables live for the duration of the process and are shared by all jets.
struct MonomialTable {
  struct Product {
    int i, j, k;
  };
  struct Shift {
    int src, dst, factor;
  };

  int dim = 0;
  int order = 0;
  int count = 0;
  std::vector<std::uint8_t> exps;   // count * dim
  std::vector<int> degree;          // per rank
  std::vector<int> degree_offset;   // first rank of each degree, size order + 2
  std::vector<Product> products;    // all (i, j) with deg i + deg j <= order
  std::vector<std::vector<Shift>> partials;  // per variable: d/du^v maps src -> dst (order - 1)

  static const MonomialTable& get(int dim, int order);

  int rank(const std::uint8_t* e) const;
  int rank(const MultiIndex& m) const;
  MultiIndex index(int rank) const;
  const std::uint8_t* exponents(int rank) const { return exps.data() + static_cast<std::size_t>(rank) * dim; }

 private:
  std::vector<std::pair<std::uint64_t, int>> lookup_;  // sorted packed key -> rank
  friend struct MonomialTableBuilder;
};

// Number of monomials of degree <= k in d variables.
int monomial_count(int dim, int order);

template <typename Scalar>
class Jet {
 public:
  using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Jet() = default;
  Jet(int dim, int order) { init(dim, order); coeffs_.setZero(); }

  static Jet constant(int dim, int order, Scalar c) {
    Jet j(dim, order);
    j.coeffs_[0] = c;
    return j;
  }

  static Jet variable(int dim, int order, int slot, Scalar value) {
    if (slot < 0 || slot >= dim) throw JetMismatch("jet variable index out of range");
    Jet j(dim, order);
    j.coeffs_[0] = value;
    if (order >= 1) j.coeffs_[1 + slot] = Scalar(1);
    return j;
  }

  static Jet from_coeffs(int dim, int order, Coeffs c) {
    Jet j;
    j.init(dim, order);
    if (c.size() != j.coeffs_.size()) throw JetMismatch("coefficient count does not match order");
    j.coeffs_ = std::move(c);
    return j;
  }

  bool empty() const { return table_ == nullptr; }
  int dim() const { return dim_; }
  int order() const { return order_; }
  Eigen::Index size() const { return coeffs_.size(); }
  const MonomialTable& table() const { return *table_; }

  Scalar value() const { return coeffs_[0]; }
  const Coeffs& coeffs() const { return coeffs_; }
  Coeffs& coeffs() { return coeffs_; }
  const Scalar& operator[](Eigen::Index i) const { return coeffs_[i]; }
  Scalar& operator[](Eigen::Index i) { return coeffs_[i]; }

  Scalar coeff(const MultiIndex& m) const {
    if (m.degree() > order_) throw InsufficientJetOrder("multi-index beyond jet order");
    return coeffs_[table_->rank(m)];
  }
  // The partial derivative d^alpha f at the expansion point.
  Scalar derivative(const MultiIndex& m) const { return coeff(m) * Scalar(m.factorial()); }

  Jet truncated(int k) const {
    if (k > order_) throw InsufficientJetOrder("cannot raise jet order by truncation");
    if (k == order_) return *this;
    Jet j;
    j.init(dim_, k);
    j.coeffs_ = coeffs_.head(j.coeffs_.size());
    return j;
  }

  Jet partial(int slot) const {
    if (order_ < 1) throw InsufficientJetOrder("partial derivative of an order-0 jet");
    if (slot < 0 || slot >= dim_) throw JetMismatch("partial index out of range");
    Jet j(dim_, order_ - 1);
    for (const auto& s : table_->partials[slot]) j.coeffs_[s.dst] = Scalar(s.factor) * coeffs_[s.src];
    return j;
  }

  template <typename U>
  Jet<U> cast() const {
    return Jet<U>::from_coeffs(dim_, order_, coeffs_.template cast<U>());
  }

  double max_abs() const { return coeffs_.size() ? coeffs_.cwiseAbs().maxCoeff() : 0.0; }

  Jet operator-() const {
    Jet j(*this);
    j.coeffs_ = -j.coeffs_;
    return j;
  }

  Jet& operator+=(const Jet& o) { return combine(o, Scalar(1)); }
  Jet& operator-=(const Jet& o) { return combine(o, Scalar(-1)); }
  Jet& operator*=(Scalar s) {
    coeffs_ *= s;
    return *this;
  }
  Jet& operator+=(Scalar s) {
    coeffs_[0] += s;
    return *this;
  }
  Jet& operator-=(Scalar s) {
    coeffs_[0] -= s;
    return *this;
  }

  // this += s * o, in the lower of the two orders.
  Jet& add_scaled(const Jet& o, Scalar s) { return combine(o, s); }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, Scalar s) { return a *= s; }
  friend Jet operator*(Scalar s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, Scalar s) { return a += s; }
  friend Jet operator+(Scalar s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, Scalar s) { return a -= s; }
  friend Jet operator-(Scalar s, const Jet& a) { return (-a) += s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    check_dim(a, b);
    int k = std::min(a.order_, b.order_);
    Jet r(a.dim_, k);
    const auto& t = MonomialTable::get(a.dim_, k);
    const Scalar* pa = a.coeffs_.data();
    const Scalar* pb = b.coeffs_.data();
    Scalar* pr = r.coeffs_.data();
    for (const auto& p : t.products) pr[p.k] += pa[p.i] * pb[p.j];
    return r;
  }

 private:
  void init(int dim, int order) {
    if (dim < 1 || dim > kMaxJetDim) throw JetMismatch("jet dimension out of range");
    if (order < 0 || order > kMaxJetOrder) throw JetMismatch("jet order out of range");
    dim_ = dim;
    order_ = order;
    table_ = &MonomialTable::get(dim, order);
    coeffs_.resize(table_->count);
  }

  static void check_dim(const Jet& a, const Jet& b) {
    if (a.empty() || b.empty()) throw JetMismatch("operation on an empty jet");
    if (a.dim_ != b.dim_) throw JetMismatch("jet dimension mismatch");
  }

  Jet& combine(const Jet& o, Scalar s) {
    check_dim(*this, o);
    if (o.order_ < order_) *this = truncated(o.order_);
    coeffs_ += s * o.coeffs_.head(coeffs_.size());
    return *this;
  }

  int dim_ = 0;
  int order_ = 0;
  const MonomialTable* table_ = nullptr;
  Coeffs coeffs_;
};

using RJet = Jet<double>;
using CJet = Jet<std::complex<double>>;

// Strict ring operations: operands must agree in dimension and order.
template <typename S>
void require_same_shape(const Jet<S>& a, const Jet<S>& b) {
  if (a.dim() != b.dim()) throw JetMismatch("jet dimension mismatch");
  if (a.order() != b.order()) throw JetMismatch("jet order mismatch");
}
template <typename S>
Jet<S> jet_add(const Jet<S>& a, const Jet<S>& b) {
  require_same_shape(a, b);
  return a + b;
}
template <typename S>
Jet<S> jet_mul(const Jet<S>& a, const Jet<S>& b) {
  require_same_shape(a, b);
  return a * b;
}
template <typename S>
Jet<S> jet_scale(const Jet<S>& a, S s) {
  return a * s;
}
template <typename S>
Jet<S> jet_neg(const Jet<S>& a) {
  return -a;
}
template <typename S>
Jet<S> jet_partial(const Jet<S>& a, int slot) {
  return a.partial(slot);
}

// Composition with a univariate function given the Taylor coefficients
// t[k] = f^(k)(a0) / k!, k = 0..K.
template <typename S>
Jet<S> compose(const Jet<S>& a, const std::vector<S>& t) {
  int K = a.order();
  Jet<S> da = a;
  da[0] = S(0);
  Jet<S> r = Jet<S>::constant(a.dim(), K, t[K]);
  for (int k = K - 1; k >= 0; --k) {
    r = r * da;
    r[0] += t[k];
  }
  return r;
}

namespace detail {
inline bool is_positive(double v) { return v > 0.0; }
inline bool is_positive(std::complex<double> v) { return v.real() > 0.0 && v.imag() == 0.0; }
inline bool is_zero(double v) { return v == 0.0; }
inline bool is_zero(std::complex<double> v) { return v == std::complex<double>(0.0); }
}  // namespace detail

template <typename S>
Jet<S> exp(const Jet<S>& a) {
  std::vector<S> t(a.order() + 1);
  S e = std::exp(a.value());
  double f = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) f *= k;
    t[k] = e / f;
  }
  return compose(a, t);
}

template <typename S>
Jet<S> sin(const Jet<S>& a) {
  std::vector<S> t(a.order() + 1);
  S s = std::sin(a.value()), c = std::cos(a.value());
  const S cyc[4] = {s, c, -s, -c};
  double f = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) f *= k;
    t[k] = cyc[k % 4] / f;
  }
  return compose(a, t);
}

template <typename S>
Jet<S> cos(const Jet<S>& a) {
  std::vector<S> t(a.order() + 1);
  S s = std::sin(a.value()), c = std::cos(a.value());
  const S cyc[4] = {c, -s, -c, s};
  double f = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) f *= k;
    t[k] = cyc[k % 4] / f;
  }
  return compose(a, t);
}

template <typename S>
Jet<S> log(const Jet<S>& a) {
  S a0 = a.value();
  if (!detail::is_positive(a0)) throw DomainError("log of a jet with non-positive constant term");
  std::vector<S> t(a.order() + 1);
  t[0] = std::log(a0);
  S p = S(1);
  for (int k = 1; k <= a.order(); ++k) {
    p /= a0;
    t[k] = (k % 2 ? S(1) : S(-1)) * p / S(k);
  }
  return compose(a, t);
}

// a^c for real c; requires a positive constant term unless c is a
// non-negative integer.
template <typename S>
Jet<S> pow(const Jet<S>& a, double c);

template <typename S>
Jet<S> pow_int(const Jet<S>& a, int m);

template <typename S>
Jet<S> reciprocal(const Jet<S>& a) {
  S a0 = a.value();
  if (detail::is_zero(a0)) throw DomainError("division by a jet with zero constant term");
  std::vector<S> t(a.order() + 1);
  S p = S(1) / a0;
  for (int k = 0; k <= a.order(); ++k) {
    t[k] = (k % 2 ? S(-1) : S(1)) * p;
    p /= a0;
  }
  return compose(a, t);
}

template <typename S>
Jet<S> operator/(const Jet<S>& a, const Jet<S>& b) {
  return a * reciprocal(b);
}
template <typename S>
Jet<S> operator/(const Jet<S>& a, S s) {
  return a * (S(1) / s);
}

template <typename S>
Jet<S> pow_int(const Jet<S>& a, int m) {
  if (m < 0) return pow_int(reciprocal(a), -m);
  Jet<S> r = Jet<S>::constant(a.dim(), a.order(), S(1));
  Jet<S> base = a;
  while (m > 0) {
    if (m & 1) r = r * base;
    m >>= 1;
    if (m) base = base * base;
  }
  return r;
}

template <typename S>
Jet<S> pow(const Jet<S>& a, double c) {
  if (c == std::floor(c) && std::abs(c) <= 64) return pow_int(a, static_cast<int>(c));
  S a0 = a.value();
  if (!detail::is_positive(a0)) throw DomainError("non-integer power of a jet with non-positive constant term");
  std::vector<S> t(a.order() + 1);
  S base = std::pow(a0, S(c));
  double binom = 1.0;
  S p = S(1);
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) {
      binom *= (c - (k - 1)) / k;
      p /= a0;
    }
    t[k] = base * S(binom) * p;
  }
  return compose(a, t);
}

template <typename S>
Jet<S> sqrt(const Jet<S>& a) {
  if (!detail::is_positive(a.value())) throw DomainError("sqrt of a jet with non-positive constant term");
  return pow(a, 0.5);
}

// Dense row-major matrix of jets sharing one dimension.
template <typename S>
class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int rows, int cols, int dim, int order) : rows_(rows), cols_(cols), data_(rows * cols, Jet<S>(dim, order)) {}

  static JetMatrix identity(int n, int dim, int order) {
    JetMatrix m(n, n, dim, order);
    for (int i = 0; i < n; ++i) m(i, i)[0] = S(1);
    return m;
  }
  static JetMatrix constant(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& c, int dim, int order) {
    JetMatrix m(static_cast<int>(c.rows()), static_cast<int>(c.cols()), dim, order);
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) m(i, j)[0] = c(i, j);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Jet<S>& operator()(int i, int j) { return data_[i * cols_ + j]; }
  const Jet<S>& operator()(int i, int j) const { return data_[i * cols_ + j]; }

  int min_order() const {
    int k = kMaxJetOrder;
    for (const auto& j : data_) k = std::min(k, j.order());
    return k;
  }

  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> values() const {
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> m(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).value();
    return m;
  }

  JetMatrix transpose() const {
    JetMatrix t;
    t.rows_ = cols_;
    t.cols_ = rows_;
    t.data_.resize(data_.size());
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  JetMatrix map(const std::function<Jet<S>(const Jet<S>&)>& f) const {
    JetMatrix r(*this);
    for (auto& j : r.data_) j = f(j);
    return r;
  }

  template <typename U>
  JetMatrix<U> cast() const {
    JetMatrix<U> r;
    r.resize_empty(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j).template cast<U>();
    return r;
  }

  void resize_empty(int rows, int cols) {
    rows_ = rows;
    cols_ = cols;
    data_.assign(rows * cols, Jet<S>());
  }

  friend JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
    if (a.cols_ != b.rows_) throw JetMismatch("jet matrix shape mismatch");
    JetMatrix r;
    r.resize_empty(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int j = 0; j < b.cols_; ++j) {
        Jet<S> acc = a(i, 0) * b(0, j);
        for (int k = 1; k < a.cols_; ++k) acc += a(i, k) * b(k, j);
        r(i, j) = std::move(acc);
      }
    return r;
  }
  friend JetMatrix operator+(JetMatrix a, const JetMatrix& b) {
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
    return a;
  }
  friend JetMatrix operator-(JetMatrix a, const JetMatrix& b) {
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    return a;
  }
  friend JetMatrix operator*(JetMatrix a, S s) {
    for (auto& j : a.data_) j *= s;
    return a;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Jet<S>> data_;
};

using RJetMatrix = JetMatrix<double>;
using CJetMatrix = JetMatrix<std::complex<double>>;

// Hadamard ratio |det M| / prod ||col_j||, a scale-free regularity measure.
template <typename S>
double hadamard_ratio(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& m) {
  double denom = 1.0;
  for (int j = 0; j < m.cols(); ++j) denom *= m.col(j).norm();
  if (denom == 0.0) return 0.0;
  return std::abs(m.fullPivLu().determinant()) / denom;
}

inline constexpr double kDegeneracyTolerance = 1e-10;

// Inverse of a jet matrix: the constant term by pivoted LU, higher orders by
// the truncated Neumann series sum_k (-X0 dM)^k X0 with dM = M - M(u0).
template <typename S>
JetMatrix<S> jet_matrix_inverse(const JetMatrix<S>& m) {
  using Dense = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() != m.cols() || m.rows() == 0) throw JetMismatch("inverse of a non-square jet matrix");
  const int n = m.rows();
  const int dim = m(0, 0).dim();
  const int K = m.min_order();
  Dense m0 = m.values();
  if (hadamard_ratio<S>(m0) < kDegeneracyTolerance)
    throw DegenerateHessian("matrix constant term is singular (relative determinant below 1e-10)");
  Dense x0 = m0.fullPivLu().inverse();
  JetMatrix<S> X = JetMatrix<S>::constant(x0, dim, K);
  JetMatrix<S> dM(n, n, dim, K);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      dM(i, j) = m(i, j).truncated(K);
      dM(i, j)[0] = S(0);
    }
  JetMatrix<S> step = X * dM * S(-1);
  JetMatrix<S> term = X;
  JetMatrix<S> sum = X;
  for (int k = 1; k <= K; ++k) {
    term = step * term;
    sum = sum + term;
  }
  return sum;
}

}  // namespace hfq
