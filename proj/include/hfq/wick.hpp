#pragma once

// Formal Wick algebra: series sum a_{r,A,I}(u) v^r z^A e^I in the formal
// parameter v, fiber variables z^1..z^d and frame 1-forms e^1..e^d, with
// complex jet coefficients.
//
// Gradings: deg_v = r, deg_s = |A|, deg_a = |I|, Deg = 2 r + |A|.
// The product contracts z-slots with exp((i v / 2) Lambda^{ab} d_a d'_b)
// and wedges the form parts, left factor first.

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "hfq/jet.hpp"

namespace hfq {

using Complex = std::complex<double>;

inline constexpr double kWickPruneTolerance = 1e-14;

struct WickKey {
  int v = 0;
  std::uint32_t forms = 0;  // bit a set <=> e^a present
  int z = 0;                // graded-lex rank of the z monomial

  static std::uint64_t pack(int v, std::uint32_t forms, int z) {
    return (static_cast<std::uint64_t>(v) << 48) | (static_cast<std::uint64_t>(forms) << 32) |
           static_cast<std::uint32_t>(z);
  }
  static WickKey unpack(std::uint64_t k) {
    return {static_cast<int>(k >> 48), static_cast<std::uint32_t>((k >> 32) & 0xffffu),
            static_cast<int>(k & 0xffffffffu)};
  }
  std::uint64_t packed() const { return pack(v, forms, z); }
};

class WickElement {
 public:
  using Map = std::map<std::uint64_t, CJet>;

  WickElement() = default;

  static WickElement scalar(const CJet& c) {
    WickElement w;
    w.add(0, 0, 0, c);
    return w;
  }

  // this += s * c at the given slot.
  void add(int v, std::uint32_t forms, int z, const CJet& c, Complex s = 1.0) { add(WickKey::pack(v, forms, z), c, s); }
  void add(std::uint64_t key, const CJet& c, Complex s = 1.0);

  const Map& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const CJet* find(int v, std::uint32_t forms, int z) const;

  WickElement& operator+=(const WickElement& o);
  WickElement& operator-=(const WickElement& o);
  WickElement& operator*=(Complex s);
  friend WickElement operator+(WickElement a, const WickElement& b) { return a += b; }
  friend WickElement operator-(WickElement a, const WickElement& b) { return a -= b; }
  friend WickElement operator*(WickElement a, Complex s) { return a *= s; }
  friend WickElement operator*(Complex s, WickElement a) { return a *= s; }

  WickElement filtered(const std::function<bool(const WickKey&)>& keep) const;
  // Drop coefficients whose largest jet coefficient is below tol.
  void prune(double tol = kWickPruneTolerance);

  // Largest |constant term| over all terms (the value at the working point).
  double max_abs_value() const;
  // Largest jet coefficient over all terms.
  double max_abs() const;
  int min_jet_order() const;

 private:
  Map terms_;
};

struct Contraction {
  int k;    // number of contracted pairs (power of v gained)
  int z;    // rank of the surviving monomial
  Complex c;
};

// Truncation context and product tables for a fixed fiber dimension d and
// maximal z-degree.  Immutable after construction.
class WickAlgebra {
 public:
  WickAlgebra() = default;
  // Lambda: d x d complex matrix; max_z: largest z-degree ever stored.
  WickAlgebra(Eigen::MatrixXcd lambda, int max_z);

  int slots() const { return d_; }
  int max_z() const { return max_z_; }
  const Eigen::MatrixXcd& lambda() const { return lambda_; }
  const MonomialTable& z_table() const { return *z_; }

  int z_degree(int z) const { return z_->degree[z]; }
  int deg_total(const WickKey& k) const { return 2 * k.v + z_degree(k.z); }
  std::uint8_t z_exp(int z, int slot) const { return z_->exponents(z)[slot]; }
  // rank of z^A * z^slot, or -1 if beyond max_z
  int z_times(int z, int slot) const { return up_[static_cast<std::size_t>(z) * d_ + slot]; }
  // rank of z^A / z^slot (caller checks the exponent)
  int z_div(int z, int slot) const { return down_[static_cast<std::size_t>(z) * d_ + slot]; }
  int z_rank(const MultiIndex& m) const { return z_->rank(m); }

  // Wick product keeping terms with Deg <= limit.
  WickElement product(const WickElement& a, const WickElement& b, int limit) const;
  // Graded commutator a o b - (-1)^{deg_a a deg_a b} b o a, per homogeneous term.
  WickElement commutator(const WickElement& a, const WickElement& b, int limit) const;

  // Multiplication by 1/v: asserts that the v^0 part is negligible, then shifts.
  static WickElement divide_by_v(const WickElement& a, double tol = 1e-12);

  WickElement truncated(const WickElement& a, int limit) const;

  // Homogeneous pieces.
  WickElement deg_component(const WickElement& a, int deg) const;
  int max_deg(const WickElement& a) const;

  // delta(a) = e^a wedge d/dz^a (a)
  WickElement delta(const WickElement& a) const;
  // delta^{-1} on a (p, q) piece = 1/(p+q) z^a i_a, zero for p = q = 0
  WickElement delta_inv(const WickElement& a) const;
  // projection onto deg_s = deg_a = 0
  WickElement sigma(const WickElement& a) const;

  const std::vector<Contraction>& contractions(int za, int zb) const;

 private:
  int d_ = 0;
  int max_z_ = 0;
  Eigen::MatrixXcd lambda_;
  const MonomialTable* z_ = nullptr;
  std::vector<int> up_, down_;
  std::vector<std::vector<Contraction>> table_;  // za * count + zb
};

// Sign of e^I wedge e^J for disjoint masks (0 if they overlap).
int wedge_sign(std::uint32_t I, std::uint32_t J);
inline int form_degree(std::uint32_t I) { return __builtin_popcount(I); }

}  // namespace hfq
