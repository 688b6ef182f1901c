#include "hfq/wick.hpp"

#include <algorithm>
#include <cmath>

namespace hfq {

int wedge_sign(std::uint32_t I, std::uint32_t J) {
  if (I & J) return 0;
  int swaps = 0;
  for (std::uint32_t j = J; j; j &= j - 1) {
    int b = __builtin_ctz(j);
    swaps += __builtin_popcount(I >> (b + 1));
  }
  return swaps % 2 ? -1 : 1;
}

// WickElement ---------------------------------------------------------------

void WickElement::add(std::uint64_t key, const CJet& c, Complex s) {
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    CJet v = c;
    if (s != Complex(1.0)) v *= s;
    terms_.emplace(key, std::move(v));
  } else {
    it->second.add_scaled(c, s);
  }
}

const CJet* WickElement::find(int v, std::uint32_t forms, int z) const {
  auto it = terms_.find(WickKey::pack(v, forms, z));
  return it == terms_.end() ? nullptr : &it->second;
}

WickElement& WickElement::operator+=(const WickElement& o) {
  for (const auto& [k, c] : o.terms_) add(k, c);
  return *this;
}

WickElement& WickElement::operator-=(const WickElement& o) {
  for (const auto& [k, c] : o.terms_) add(k, c, -1.0);
  return *this;
}

WickElement& WickElement::operator*=(Complex s) {
  for (auto& [k, c] : terms_) c *= s;
  return *this;
}

WickElement WickElement::filtered(const std::function<bool(const WickKey&)>& keep) const {
  WickElement r;
  for (const auto& [k, c] : terms_)
    if (keep(WickKey::unpack(k))) r.terms_.emplace_hint(r.terms_.end(), k, c);
  return r;
}

void WickElement::prune(double tol) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (it->second.max_abs() <= tol)
      it = terms_.erase(it);
    else
      ++it;
  }
}

double WickElement::max_abs_value() const {
  double m = 0.0;
  for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c.value()));
  return m;
}

double WickElement::max_abs() const {
  double m = 0.0;
  for (const auto& [k, c] : terms_) m = std::max(m, c.max_abs());
  return m;
}

int WickElement::min_jet_order() const {
  int k = kMaxJetOrder;
  for (const auto& [key, c] : terms_) k = std::min(k, c.order());
  return k;
}

// WickAlgebra ---------------------------------------------------------------

WickAlgebra::WickAlgebra(Eigen::MatrixXcd lambda, int max_z)
    : d_(static_cast<int>(lambda.rows())), max_z_(max_z), lambda_(std::move(lambda)) {
  z_ = &MonomialTable::get(d_, max_z_);
  const int count = z_->count;
  up_.assign(static_cast<std::size_t>(count) * d_, -1);
  down_.assign(static_cast<std::size_t>(count) * d_, -1);
  std::vector<std::uint8_t> e(d_);
  for (int z = 0; z < count; ++z)
    for (int s = 0; s < d_; ++s) {
      std::copy_n(z_->exponents(z), d_, e.begin());
      if (z_->degree[z] < max_z_) {
        ++e[s];
        up_[static_cast<std::size_t>(z) * d_ + s] = z_->rank(e.data());
        --e[s];
      }
      if (e[s] > 0) {
        --e[s];
        down_[static_cast<std::size_t>(z) * d_ + s] = z_->rank(e.data());
      }
    }

  // Contractions exp((i/2) Lambda^{ab} d_a d'_b) z^A z'^B restricted to z = z'.
  table_.assign(static_cast<std::size_t>(count) * count, {});
  for (int za = 0; za < count; ++za)
    for (int zb = 0; zb < count; ++zb) {
      if (z_->degree[za] + z_->degree[zb] > max_z_) continue;
      std::map<std::pair<int, int>, Complex> poly{{{za, zb}, Complex(1.0)}};
      std::map<std::pair<int, int>, Complex> out;  // (k, zc) -> coefficient
      Complex pref(1.0);
      for (int k = 0; !poly.empty(); ++k) {
        if (k > 0) pref *= Complex(0.0, 0.5) / static_cast<double>(k);
        for (const auto& [ab, c] : poly) {
          std::copy_n(z_->exponents(ab.first), d_, e.begin());
          for (int s = 0; s < d_; ++s) e[s] += z_->exponents(ab.second)[s];
          out[{k, z_->rank(e.data())}] += pref * c;
        }
        std::map<std::pair<int, int>, Complex> next;
        for (const auto& [ab, c] : poly)
          for (int a = 0; a < d_; ++a) {
            int ea = z_->exponents(ab.first)[a];
            if (!ea) continue;
            for (int b = 0; b < d_; ++b) {
              int eb = z_->exponents(ab.second)[b];
              if (!eb || lambda_(a, b) == Complex(0.0)) continue;
              next[{z_div(ab.first, a), z_div(ab.second, b)}] += c * lambda_(a, b) * static_cast<double>(ea * eb);
            }
          }
        poly.swap(next);
      }
      auto& list = table_[static_cast<std::size_t>(za) * count + zb];
      for (const auto& [kz, c] : out)
        if (std::abs(c) > 0.0) list.push_back({kz.first, kz.second, c});
    }
}

const std::vector<Contraction>& WickAlgebra::contractions(int za, int zb) const {
  return table_[static_cast<std::size_t>(za) * z_->count + zb];
}

namespace {

template <typename SignFn>
void accumulate_product(const WickAlgebra& alg, const WickElement& a, const WickElement& b, int limit, SignFn sign,
                        WickElement& out) {
  for (const auto& [ka, ca] : a.terms()) {
    WickKey ta = WickKey::unpack(ka);
    int da = alg.deg_total(ta);
    for (const auto& [kb, cb] : b.terms()) {
      WickKey tb = WickKey::unpack(kb);
      if (da + alg.deg_total(tb) > limit) continue;
      int ws = wedge_sign(ta.forms, tb.forms);
      if (!ws) continue;
      double s = ws * sign(ta, tb);
      const auto& list = alg.contractions(ta.z, tb.z);
      if (list.empty()) continue;
      CJet prod = ca * cb;
      for (const auto& c : list) out.add(ta.v + tb.v + c.k, ta.forms | tb.forms, c.z, prod, s * c.c);
    }
  }
}

void check_limit(const WickAlgebra& alg, int limit) {
  if (limit > alg.max_z()) throw InsufficientJetOrder("Wick truncation exceeds the algebra's z-degree table");
}

}  // namespace

WickElement WickAlgebra::product(const WickElement& a, const WickElement& b, int limit) const {
  check_limit(*this, limit);
  WickElement out;
  accumulate_product(*this, a, b, limit, [](const WickKey&, const WickKey&) { return 1.0; }, out);
  out.prune();
  return out;
}

WickElement WickAlgebra::commutator(const WickElement& a, const WickElement& b, int limit) const {
  check_limit(*this, limit);
  WickElement out;
  accumulate_product(*this, a, b, limit, [](const WickKey&, const WickKey&) { return 1.0; }, out);
  accumulate_product(*this, b, a, limit,
                     [](const WickKey& tb, const WickKey& ta) {
                       return (form_degree(ta.forms) * form_degree(tb.forms)) % 2 ? 1.0 : -1.0;
                     },
                     out);
  out.prune();
  return out;
}

WickElement WickAlgebra::divide_by_v(const WickElement& a, double tol) {
  WickElement r;
  double scale = std::max(1.0, a.max_abs());
  for (const auto& [k, c] : a.terms()) {
    WickKey t = WickKey::unpack(k);
    if (t.v == 0) {
      if (c.max_abs() > tol * scale) throw MathError("division by v of an element with a non-zero v^0 part");
      continue;
    }
    r.add(t.v - 1, t.forms, t.z, c);
  }
  return r;
}

WickElement WickAlgebra::truncated(const WickElement& a, int limit) const {
  return a.filtered([&](const WickKey& k) { return deg_total(k) <= limit; });
}

WickElement WickAlgebra::deg_component(const WickElement& a, int deg) const {
  return a.filtered([&](const WickKey& k) { return deg_total(k) == deg; });
}

int WickAlgebra::max_deg(const WickElement& a) const {
  int m = -1;
  for (const auto& [k, c] : a.terms()) m = std::max(m, deg_total(WickKey::unpack(k)));
  return m;
}

WickElement WickAlgebra::delta(const WickElement& a) const {
  WickElement r;
  for (const auto& [k, c] : a.terms()) {
    WickKey t = WickKey::unpack(k);
    for (int s = 0; s < d_; ++s) {
      int e = z_exp(t.z, s);
      if (!e || (t.forms >> s & 1u)) continue;
      int sign = wedge_sign(1u << s, t.forms);
      r.add(t.v, t.forms | (1u << s), z_div(t.z, s), c, static_cast<double>(sign * e));
    }
  }
  r.prune();
  return r;
}

WickElement WickAlgebra::delta_inv(const WickElement& a) const {
  WickElement r;
  for (const auto& [k, c] : a.terms()) {
    WickKey t = WickKey::unpack(k);
    int pq = z_degree(t.z) + form_degree(t.forms);
    if (pq == 0) continue;
    for (int s = 0; s < d_; ++s) {
      if (!(t.forms >> s & 1u)) continue;
      int zr = z_times(t.z, s);
      if (zr < 0) throw InsufficientJetOrder("delta^{-1} exceeds the algebra's z-degree table");
      std::uint32_t rest = t.forms & ~(1u << s);
      int sign = wedge_sign(1u << s, rest);
      r.add(t.v, rest, zr, c, static_cast<double>(sign) / pq);
    }
  }
  r.prune();
  return r;
}

WickElement WickAlgebra::sigma(const WickElement& a) const {
  return a.filtered([](const WickKey& k) { return k.forms == 0 && k.z == 0; });
}

}  // namespace hfq
