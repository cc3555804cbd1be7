#include "mirs/multiindex.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace mirs {

Rational binom2(const Exponent2D& n, const Exponent2D& m) {
  if (!m.leq(n)) return Rational(0);
  return Rational::binomial(n.n1, m.n1) * Rational::binomial(n.n2, m.n2);
}

MultiIndex MultiIndex::unit_k(int k, int mult) {
  MultiIndex b;
  b.set_k(k, mult);
  return b;
}

MultiIndex MultiIndex::unit_n(Exponent2D n, int mult) {
  if (n.is_zero()) throw std::invalid_argument("unit_n: n must be nonzero");
  MultiIndex b;
  b.set_n(n, mult);
  return b;
}

void MultiIndex::set_k(int k, int mult) {
  if (k < 0) throw std::invalid_argument("negative k");
  if (mult <= 0) return;
  auto it = std::lower_bound(kf_.begin(), kf_.end(), k,
                             [](const KEntry& e, int kk) { return e.first < kk; });
  if (it != kf_.end() && it->first == k)
    it->second = mult;
  else
    kf_.insert(it, {k, mult});
}

void MultiIndex::set_n(Exponent2D n, int mult) {
  if (mult <= 0) return;
  auto it = std::lower_bound(nf_.begin(), nf_.end(), n,
                             [](const NEntry& e, const Exponent2D& nn) { return e.first < nn; });
  if (it != nf_.end() && it->first == n)
    it->second = mult;
  else
    nf_.insert(it, {n, mult});
}

int MultiIndex::k_mult(int k) const {
  for (const auto& [kk, m] : kf_)
    if (kk == k) return m;
  return 0;
}

int MultiIndex::n_mult(const Exponent2D& n) const {
  for (const auto& [nn, m] : nf_)
    if (nn == n) return m;
  return 0;
}

int MultiIndex::total_mult() const {
  int t = 0;
  for (const auto& [k, m] : kf_) t += m;
  for (const auto& [n, m] : nf_) t += m;
  return t;
}

int MultiIndex::noise_hom() const {
  int s = 0;
  for (const auto& [k, m] : kf_) s += k * m;
  for (const auto& [n, m] : nf_) s -= m;
  return s;
}

int MultiIndex::pnorm() const {
  int s = 0;
  for (const auto& [n, m] : nf_) s += n.pdeg() * m;
  return s;
}

IndexClass MultiIndex::classify() const {
  if (kf_.empty() && nf_.size() == 1 && nf_[0].second == 1)
    return IndexClass::PurelyPolynomial;
  return noise_hom() >= 0 ? IndexClass::PopulatedNonPolynomial : IndexClass::NotPopulated;
}

MultiIndex MultiIndex::plus(const MultiIndex& o) const {
  MultiIndex r = *this;
  for (const auto& [k, m] : o.kf_) r.set_k(k, r.k_mult(k) + m);
  for (const auto& [n, m] : o.nf_) r.set_n(n, r.n_mult(n) + m);
  return r;
}

std::optional<MultiIndex> MultiIndex::minus(const MultiIndex& o) const {
  MultiIndex r;
  for (const auto& [k, m] : kf_) r.set_k(k, m);
  for (const auto& [n, m] : nf_) r.set_n(n, m);
  for (const auto& [k, m] : o.kf_) {
    int cur = r.k_mult(k);
    if (cur < m) return std::nullopt;
    auto it = std::find_if(r.kf_.begin(), r.kf_.end(), [&](const KEntry& e) { return e.first == k; });
    if (cur == m)
      r.kf_.erase(it);
    else
      it->second = cur - m;
  }
  for (const auto& [n, m] : o.nf_) {
    int cur = r.n_mult(n);
    if (cur < m) return std::nullopt;
    auto it = std::find_if(r.nf_.begin(), r.nf_.end(), [&](const NEntry& e) { return e.first == n; });
    if (cur == m)
      r.nf_.erase(it);
    else
      it->second = cur - m;
  }
  return r;
}

void MultiIndex::for_each_subindex(const std::function<void(const MultiIndex&)>& f) const {
  // generators flattened; recursive choice of sub-multiplicity per generator
  struct Gen { bool is_k; int k; Exponent2D n; int mult; };
  std::vector<Gen> gens;
  for (const auto& [k, m] : kf_) gens.push_back({true, k, {}, m});
  for (const auto& [n, m] : nf_) gens.push_back({false, 0, n, m});
  MultiIndex cur;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == gens.size()) {
      f(cur);
      return;
    }
    for (int c = 0; c <= gens[i].mult; ++c) {
      MultiIndex saved = cur;
      if (c > 0) {
        if (gens[i].is_k)
          cur.set_k(gens[i].k, c);
        else
          cur.set_n(gens[i].n, c);
      }
      rec(i + 1);
      cur = saved;
    }
  };
  rec(0);
}

std::size_t MultiIndex::hash() const {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  for (const auto& [k, m] : kf_) { mix(std::size_t(k) * 2 + 1); mix(std::size_t(m)); }
  for (const auto& [n, m] : nf_) {
    mix(std::size_t(n.n1) * 1000003 + std::size_t(n.n2) * 2 + 0);
    mix(std::size_t(m));
  }
  return h;
}

bool MultiIndex::lex_n_less(const std::vector<NEntry>& a, const std::vector<NEntry>& b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(), [](const NEntry& x, const NEntry& y) {
        if (!(x.first == y.first)) return x.first < y.first;
        return x.second < y.second;
      });
}

std::string MultiIndex::str() const {
  if (is_zero()) return "0";
  std::string s;
  auto app = [&s](const std::string& g, int m) {
    if (!s.empty()) s += "*";
    s += g;
    if (m > 1) s += "^" + std::to_string(m);
  };
  for (const auto& [k, m] : kf_) app("e" + std::to_string(k), m);
  for (const auto& [n, m] : nf_) app("e" + n.str(), m);
  return s;
}

MultiIndex MultiIndex::parse(const std::string& s) {
  if (s == "0") return MultiIndex();
  MultiIndex b;
  std::size_t i = 0;
  auto fail = [&s]() -> void { throw std::invalid_argument("bad multi-index: " + s); };
  auto read_int = [&]() {
    std::size_t j = i;
    while (j < s.size() && (std::isdigit((unsigned char)s[j]) || s[j] == '-')) ++j;
    if (j == i) fail();
    int v = std::stoi(s.substr(i, j - i));
    i = j;
    return v;
  };
  while (i < s.size()) {
    if (s[i] != 'e') fail();
    ++i;
    if (i < s.size() && s[i] == '(') {
      ++i;
      int n1 = read_int();
      if (i >= s.size() || s[i] != ',') fail();
      ++i;
      int n2 = read_int();
      if (i >= s.size() || s[i] != ')') fail();
      ++i;
      int m = 1;
      if (i < s.size() && s[i] == '^') { ++i; m = read_int(); }
      b.set_n({n1, n2}, b.n_mult({n1, n2}) + m);
    } else {
      int k = read_int();
      int m = 1;
      if (i < s.size() && s[i] == '^') { ++i; m = read_int(); }
      b.set_k(k, b.k_mult(k) + m);
    }
    if (i < s.size()) {
      if (s[i] != '*') fail();
      ++i;
    }
  }
  return b;
}

bool enum_less(const MultiIndex& a, const MultiIndex& b, const Rational& alpha) {
  Rational ha = a.homogeneity(alpha), hb = b.homogeneity(alpha);
  if (ha != hb) return ha < hb;
  if (a.prec4() != b.prec4()) return a.prec4() < b.prec4();
  // ascending lex on k-frequency vector: (beta(0), beta(1), ...)
  int mk = std::max(a.max_k(), b.max_k());
  for (int k = 0; k <= mk; ++k) {
    int ma = a.k_mult(k), mb = b.k_mult(k);
    if (ma != mb) return ma < mb;
  }
  return a < b;
}

}  // namespace mirs
