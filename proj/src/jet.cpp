#include "hfq/jet.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace hfq {

double MultiIndex::factorial() const {
  double f = 1.0;
  for (int v : e_)
    for (int k = 2; k <= v; ++k) f *= k;
  return f;
}

int monomial_count(int dim, int order) {
  // C(dim + order, order)
  long long c = 1;
  for (int k = 1; k <= order; ++k) c = c * (dim + k) / k;
  return static_cast<int>(c);
}

namespace {

std::uint64_t pack(const std::uint8_t* e, int dim) {
  std::uint64_t key = 0;
  for (int i = 0; i < dim; ++i) key |= static_cast<std::uint64_t>(e[i]) << (4 * i);
  return key;
}

void enumerate_degree(int dim, int slot, int remaining, std::vector<std::uint8_t>& cur,
                      std::vector<std::uint8_t>& out) {
  if (slot == dim - 1) {
    cur[slot] = static_cast<std::uint8_t>(remaining);
    out.insert(out.end(), cur.begin(), cur.end());
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[slot] = static_cast<std::uint8_t>(e);
    enumerate_degree(dim, slot + 1, remaining - e, cur, out);
  }
}

}  // namespace

struct MonomialTableBuilder {
  static std::unique_ptr<MonomialTable> build(int dim, int order) {
    auto t = std::make_unique<MonomialTable>();
    t->dim = dim;
    t->order = order;
    std::vector<std::uint8_t> cur(dim, 0);
    t->degree_offset.push_back(0);
    for (int d = 0; d <= order; ++d) {
      enumerate_degree(dim, 0, d, cur, t->exps);
      t->degree_offset.push_back(static_cast<int>(t->exps.size() / dim));
    }
    t->count = static_cast<int>(t->exps.size() / dim);
    t->degree.resize(t->count);
    for (int d = 0; d <= order; ++d)
      for (int r = t->degree_offset[d]; r < t->degree_offset[d + 1]; ++r) t->degree[r] = d;

    t->lookup_.reserve(t->count);
    for (int r = 0; r < t->count; ++r) t->lookup_.emplace_back(pack(t->exponents(r), dim), r);
    std::sort(t->lookup_.begin(), t->lookup_.end());

    std::vector<std::uint8_t> sum(dim);
    for (int i = 0; i < t->count; ++i) {
      const int jmax = t->degree_offset[order - t->degree[i] + 1];
      const std::uint8_t* ei = t->exponents(i);
      for (int j = 0; j < jmax; ++j) {
        const std::uint8_t* ej = t->exponents(j);
        for (int s = 0; s < dim; ++s) sum[s] = static_cast<std::uint8_t>(ei[s] + ej[s]);
        t->products.push_back({i, j, t->rank(sum.data())});
      }
    }
    // Group by destination to keep the accumulation loop cache friendly.
    std::stable_sort(t->products.begin(), t->products.end(),
                     [](const auto& a, const auto& b) { return a.k < b.k; });

    t->partials.resize(dim);
    for (int v = 0; v < dim; ++v)
      for (int r = 0; r < t->count; ++r) {
        const std::uint8_t* e = t->exponents(r);
        if (e[v] == 0) continue;
        std::copy(e, e + dim, sum.begin());
        --sum[v];
        t->partials[v].push_back({r, t->rank(sum.data()), e[v]});
      }
    return t;
  }
};

int MonomialTable::rank(const std::uint8_t* e) const {
  const std::uint64_t key = pack(e, dim);
  auto it = std::lower_bound(lookup_.begin(), lookup_.end(), std::make_pair(key, -1));
  if (it == lookup_.end() || it->first != key) throw InsufficientJetOrder("multi-index beyond table order");
  return it->second;
}

int MonomialTable::rank(const MultiIndex& m) const {
  if (m.dim() != dim) throw JetMismatch("multi-index dimension mismatch");
  std::vector<std::uint8_t> e(dim);
  for (int i = 0; i < dim; ++i) {
    if (m[i] < 0) throw JetMismatch("negative exponent");
    e[i] = static_cast<std::uint8_t>(m[i]);
  }
  if (m.degree() > order) throw InsufficientJetOrder("multi-index beyond table order");
  return rank(e.data());
}

MultiIndex MonomialTable::index(int r) const {
  MultiIndex m(dim);
  const std::uint8_t* e = exponents(r);
  for (int i = 0; i < dim; ++i) m[i] = e[i];
  return m;
}

const MonomialTable& MonomialTable::get(int dim, int order) {
  if (dim < 1 || dim > kMaxJetDim || order < 0 || order > kMaxJetOrder)
    throw JetMismatch("monomial table shape out of range");
  thread_local std::array<std::array<const MonomialTable*, kMaxJetOrder + 1>, kMaxJetDim + 1> cache{};
  if (const MonomialTable* t = cache[dim][order]) return *t;
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<MonomialTable>> registry;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = registry[{dim, order}];
  if (!slot) slot = MonomialTableBuilder::build(dim, order);
  cache[dim][order] = slot.get();
  return *slot;
}

}  // namespace hfq
