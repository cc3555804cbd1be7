#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "mirs/index_set.hpp"
#include "mirs/multiindex.hpp"
#include "mirs/rational.hpp"

namespace mirs {

struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Coefficient-ring glue.  A ring type C needs operator+, operator*, a
/// zero-test and scaling by Rational; specialize where the defaults don't fit.
template <class C>
struct RingTraits {
  static bool is_zero(const C& c) { return c.is_zero(); }
  static C scale(const C& c, const Rational& r) { return c * C(r); }
  static C one() { return C(Rational(1)); }
};

template <>
struct RingTraits<double> {
  static bool is_zero(double c) { return c == 0.0; }
  static double scale(double c, const Rational& r) { return c * r.to_double(); }
  static double one() { return 1.0; }
};

template <>
struct RingTraits<Rational> {
  static bool is_zero(const Rational& c) { return c.is_zero(); }
  static Rational scale(const Rational& c, const Rational& r) { return c * r; }
  static Rational one() { return Rational(1); }
};

/// Element of the (truncated) formal power series algebra: finitely many
/// coefficients over populated multi-indices.  Absent keys are zero; keys
/// outside the declared working set are implicitly zero for all operations.
template <class C>
class TSeries {
 public:
  using Map = std::unordered_map<MultiIndex, C, MIHash>;

  TSeries() = default;

  static TSeries unit(C one) {  // the series 1
    TSeries s;
    s.set(MultiIndex(), std::move(one));
    return s;
  }
  static TSeries monomial(const MultiIndex& b, C coef) {
    TSeries s;
    s.set(b, std::move(coef));
    return s;
  }

  const Map& coeffs() const { return m_; }
  bool empty() const { return m_.empty(); }
  std::size_t size() const { return m_.size(); }

  /// coefficient at b (zero if absent); throws if b is outside the window S
  const C* find(const MultiIndex& b) const {
    auto it = m_.find(b);
    return it == m_.end() ? nullptr : &it->second;
  }
  C at_checked(const MultiIndex& b, const IndexSet& S) const {
    if (!S.contains(b))
      throw TruncationError("coefficient request outside working set: " + b.str());
    auto it = m_.find(b);
    return it == m_.end() ? C{} : it->second;
  }

  void set(const MultiIndex& b, C c) {
    if (RingTraits<C>::is_zero(c))
      m_.erase(b);
    else
      m_[b] = std::move(c);
  }
  void add_to(const MultiIndex& b, const C& c) {
    if (RingTraits<C>::is_zero(c)) return;
    auto [it, fresh] = m_.try_emplace(b, c);
    if (!fresh) {
      it->second = it->second + c;
      if (RingTraits<C>::is_zero(it->second)) m_.erase(it);
    }
  }

  TSeries& operator+=(const TSeries& o) {
    for (const auto& [b, c] : o.m_) add_to(b, c);
    return *this;
  }
  friend TSeries operator+(TSeries a, const TSeries& b) { return a += b; }

  TSeries scaled(const Rational& r) const {
    TSeries s;
    if (r.is_zero()) return s;
    for (const auto& [b, c] : m_) s.set(b, RingTraits<C>::scale(c, r));
    return s;
  }

  /// restrict support to a predicate
  TSeries filtered(const std::function<bool(const MultiIndex&)>& keep) const {
    TSeries s;
    for (const auto& [b, c] : m_)
      if (keep(b)) s.set(b, c);
    return s;
  }

  friend bool operator==(const TSeries& a, const TSeries& b) {
    if (a.m_.size() != b.m_.size()) return false;
    for (const auto& [k, c] : a.m_) {
      auto it = b.m_.find(k);
      if (it == b.m_.end() || !(it->second == c)) return false;
    }
    return true;
  }

 private:
  Map m_;
};

/// product restricted to a membership window; pairs outside are dropped,
/// which realizes the declared truncation semantics
template <class C>
TSeries<C> mul(const TSeries<C>& a, const TSeries<C>& b,
               const std::function<bool(const MultiIndex&)>& window) {
  TSeries<C> r;
  for (const auto& [ba, ca] : a.coeffs())
    for (const auto& [bb, cb] : b.coeffs()) {
      MultiIndex s = ba.plus(bb);
      if (window(s)) r.add_to(s, ca * cb);
    }
  return r;
}

template <class C>
TSeries<C> mul(const TSeries<C>& a, const TSeries<C>& b, const IndexSet& S) {
  return mul<C>(a, b, [&S](const MultiIndex& x) { return S.contains(x); });
}

/// mixed product: module coefficients V scaled by ring coefficients C
template <class C, class V>
TSeries<V> mul_module(const TSeries<C>& a, const TSeries<V>& v,
                      const std::function<bool(const MultiIndex&)>& window,
                      const std::function<V(const C&, const V&)>& act) {
  TSeries<V> r;
  for (const auto& [ba, ca] : a.coeffs())
    for (const auto& [bv, cv] : v.coeffs()) {
      MultiIndex s = ba.plus(bv);
      if (window(s)) r.add_to(s, act(ca, cv));
    }
  return r;
}

enum class D0Mode {
  Full,  // D0 = sum_k (k+1) z_{k+1} d/dz_k, all k >= 0
  A0,    // D0 = z_1 d/da0 + sum_{k>=1} (k+1) z_{k+1} d/dz_k  (beta(0)=0 sector)
};

/// D^(0) applied to a series.  In A0 mode the k=0 channel differentiates the
/// coefficient in a0; pass the coefficient derivation d_a0 (may be null in
/// Full mode).
template <class C>
TSeries<C> apply_D0(const TSeries<C>& s, D0Mode mode,
                    const std::function<C(const C&)>& d_a0 = nullptr) {
  TSeries<C> r;
  for (const auto& [g, c] : s.coeffs()) {
    for (const auto& [k, m] : g.kfreq()) {
      if (mode == D0Mode::A0 && k == 0)
        throw std::invalid_argument("A0 mode requires beta(0)=0 support");
      // z_{k+1} d/dz_k : lands at g - e_k + e_{k+1} with weight (k+1)*g(k)
      auto down = g.minus(MultiIndex::unit_k(k));
      MultiIndex target = down->plus(MultiIndex::unit_k(k + 1));
      r.add_to(target, RingTraits<C>::scale(c, Rational((k + 1) * m)));
    }
    if (mode == D0Mode::A0) {
      C dc = d_a0(c);
      if (!RingTraits<C>::is_zero(dc)) r.add_to(g.plus(MultiIndex::unit_k(1)), dc);
    }
  }
  return r;
}

/// D^(n) = d/dz_n for n != 0; routes n = 0 to apply_D0
template <class C>
TSeries<C> apply_Dn(const Exponent2D& n, const TSeries<C>& s, D0Mode mode = D0Mode::Full,
                    const std::function<C(const C&)>& d_a0 = nullptr) {
  if (n.is_zero()) return apply_D0(s, mode, d_a0);
  TSeries<C> r;
  for (const auto& [g, c] : s.coeffs()) {
    int m = g.n_mult(n);
    if (m == 0) continue;
    r.add_to(*g.minus(MultiIndex::unit_n(n)), RingTraits<C>::scale(c, Rational(m)));
  }
  return r;
}

/// P: kill purely polynomial components (projection onto the non-polynomial
/// sector)
template <class C>
TSeries<C> project_P(const TSeries<C>& s) {
  return s.filtered([](const MultiIndex& b) { return !b.is_purely_polynomial(); });
}

/// Q: keep components with |beta| < 2 (the singular window)
template <class C>
TSeries<C> project_Q(const TSeries<C>& s, const Rational& alpha) {
  return s.filtered([&alpha](const MultiIndex& b) { return b.homogeneity(alpha) < Rational(2); });
}

/// (z_k f1 ... f_{k+1})_beta = sum over e_k + b1 + ... + b_{k+1} = beta.
/// Components are produced for targets inside S; intermediates are pruned to
/// the sub-index closure of S, which preserves every in-set target exactly.
template <class C>
TSeries<C> zk_product(int k, const std::vector<TSeries<C>>& factors, const IndexSet& S) {
  if ((int)factors.size() != k + 1)
    throw std::invalid_argument("zk_product: need k+1 factors");
  std::function<bool(const MultiIndex&)> inter = [&S](const MultiIndex& b) {
    return S.in_sub_closure(b);
  };
  TSeries<C> prod;
  bool first = true;
  for (const auto& f : factors) {
    if (first) {
      prod = f.filtered(inter);
      first = false;
    } else {
      prod = mul(prod, f, inter);
    }
  }
  TSeries<C> out;
  MultiIndex ek = MultiIndex::unit_k(k);
  for (const auto& [b, c] : prod.coeffs()) {
    MultiIndex t = b.plus(ek);
    if (S.contains(t)) out.add_to(t, c);
  }
  return out;
}

/// sum_l (1/l!) Pi^l (D0)^l c restricted to S; the l-range is bounded through
/// the [.]-grading, which makes the sum finite on every component.
template <class C>
TSeries<C> iterate_D0_counterterm(const TSeries<C>& c, const TSeries<C>& Pi, const IndexSet& S,
                                  D0Mode mode = D0Mode::Full,
                                  const std::function<C(const C&)>& d_a0 = nullptr,
                                  int lmax = -1) {
  std::function<bool(const MultiIndex&)> inter = [&S](const MultiIndex& b) {
    return S.in_sub_closure(b);
  };
  // sound prunes for the D-iterates: along D0, [.] grows by one per step,
  // total multiplicity never decreases, and max k never decreases; any
  // component violating the caps of S can no longer reach an in-set target.
  int max_bracket = 0, max_mult = 0, max_k = 1;
  for (const auto& b : S.indices()) {
    int np = 0;
    for (const auto& [n, m] : b.nfreq()) np += m;
    max_bracket = std::max(max_bracket, b.noise_hom() + np);
    max_mult = std::max(max_mult, b.total_mult());
    max_k = std::max(max_k, b.max_k());
  }
  auto dl_keep = [&](const MultiIndex& b) {
    return b.noise_hom() <= max_bracket && b.total_mult() <= max_mult && b.max_k() <= max_k;
  };
  if (lmax < 0) lmax = max_bracket + 1;

  TSeries<C> out;
  TSeries<C> Dl = c.filtered(dl_keep);
  TSeries<C> PiPow;  // Pi^l restricted to the sub-closure
  Rational fact(1);
  for (int l = 0; l <= lmax && !Dl.empty(); ++l) {
    TSeries<C> term = (l == 0) ? Dl : mul(PiPow, Dl, inter);
    for (const auto& [b, cc] : term.coeffs())
      if (S.contains(b)) out.add_to(b, RingTraits<C>::scale(cc, fact));
    PiPow = (l == 0) ? Pi.filtered(inter) : mul(PiPow, Pi, inter);
    Dl = apply_D0(Dl, mode, d_a0).filtered(dl_keep);
    fact = fact / Rational(l + 1);
  }
  return out;
}

}  // namespace mirs
