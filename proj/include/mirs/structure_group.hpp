#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mirs/series.hpp"

namespace mirs {

/// Sparse row vector over the working set: coefficient type used to
/// materialize matrices by pushing a generic element through the algebra.
template <class C>
struct RowVec {
  std::map<int, C> v;  // column position -> coefficient

  RowVec() = default;
  explicit RowVec(const Rational& r) {
    // scalar embedding is not meaningful for row vectors
    if (!r.is_zero()) throw std::logic_error("RowVec: no scalar embedding");
  }
  bool is_zero() const { return v.empty(); }
  friend RowVec operator+(const RowVec& a, const RowVec& b) {
    RowVec r = a;
    for (const auto& [j, c] : b.v) {
      auto [it, fresh] = r.v.try_emplace(j, c);
      if (!fresh) {
        it->second = it->second + c;
        if (RingTraits<C>::is_zero(it->second)) r.v.erase(it);
      }
    }
    return r;
  }
};

template <class C>
struct RingTraits<RowVec<C>> {
  static bool is_zero(const RowVec<C>& x) { return x.is_zero(); }
  static RowVec<C> scale(const RowVec<C>& x, const Rational& r) {
    RowVec<C> y;
    if (r.is_zero()) return y;
    for (const auto& [j, c] : x.v) y.v[j] = RingTraits<C>::scale(c, r);
    return y;
  }
};

template <class C>
RowVec<C> act_on_row(const C& a, const RowVec<C>& x) {
  RowVec<C> y;
  for (const auto& [j, c] : x.v) {
    C p = a * c;
    if (!RingTraits<C>::is_zero(p)) y.v[j] = p;
  }
  return y;
}

/// Group element: family {pi^(n)} supported on non-purely-polynomial indices
/// plus a shift vector h fixing the purely polynomial part
///   pi^(n)_{e_m} = binom(m, n) h^{m-n}   for m > n.
/// The induced endomorphism Gamma^* acts through the exponential formula.
template <class C>
class GroupElement {
 public:
  GroupElement(const IndexSet* S, std::array<C, 2> h) : S_(S), h_(std::move(h)) {}

  const IndexSet& set() const { return *S_; }
  const std::array<C, 2>& shift() const { return h_; }

  /// declare pi^(n) on the non-pp sector; the population condition
  /// |n| < |beta| is enforced
  void set_pi(const Exponent2D& n, TSeries<C> s) {
    for (const auto& [b, c] : s.coeffs()) {
      if (b.is_purely_polynomial())
        throw std::invalid_argument("set_pi: purely polynomial part is fixed by h");
      if (!(Rational(n.pdeg()) < b.homogeneity(S_->alpha())))
        throw std::invalid_argument("pi^(n) population violated at " + b.str() +
                                    " for n=" + n.str());
    }
    if (!s.empty()) pis_[n] = std::move(s);
  }
  const std::map<Exponent2D, TSeries<C>>& pis() const { return pis_; }

  /// pi^(n) including the purely polynomial part synthesized from h
  TSeries<C> full_pi(const Exponent2D& n) const {
    TSeries<C> s;
    auto it = pis_.find(n);
    if (it != pis_.end()) s = it->second;
    for (const auto& b : S_->indices()) {
      if (!b.is_purely_polynomial()) continue;
      Exponent2D m = b.nfreq()[0].first;
      if (!(n.leq(m)) || m == n) continue;
      Rational bc = binom2(m, n);
      C val = RingTraits<C>::scale(pow_h(m.n1 - n.n1, m.n2 - n.n2), bc);
      if (!RingTraits<C>::is_zero(val)) s.add_to(b, val);
    }
    return s;
  }

  /// n-values that can act at all (population keeps |n| below the top
  /// homogeneity of the working set)
  std::vector<Exponent2D> active_n() const {
    std::vector<Exponent2D> v{{0, 0}};
    Rational top(0);
    for (const auto& b : S_->indices()) {
      Rational h = b.homogeneity(S_->alpha());
      if (top < h) top = h;
    }
    for (int d = 1; Rational(d) < top; ++d)
      for (int n1 = 0; n1 <= d; ++n1)
        if ((d - n1) % 2 == 0) v.push_back({n1, (d - n1) / 2});
    return v;
  }

 private:
  C pow_h(int p1, int p2) const {
    C r = one_();
    for (int i = 0; i < p1; ++i) r = r * h_[0];
    for (int i = 0; i < p2; ++i) r = r * h_[1];
    return r;
  }
  static C one_() { return RingTraits<C>::one(); }

  const IndexSet* S_;
  std::array<C, 2> h_;
  std::map<Exponent2D, TSeries<C>> pis_;
};

namespace detail {

/// callback invoked per multiplication step; used by the dependency
/// instrumentation (which pi^(n)_{beta'} feed which output rows)
template <class V>
using StepHook = std::function<void(const Exponent2D& n, const TSeries<V>& before)>;

}  // namespace detail

/// Gamma^* sigma via the exponential formula, restricted to the working set.
/// V is a module over C (V = C, or RowVec<C> for matrix materialization).
/// Termination is guaranteed by the population condition; the recursion depth
/// is asserted against the ordinal bound rather than truncated.
template <class C, class V>
TSeries<V> gamma_apply_module(const GroupElement<C>& g, const TSeries<V>& sigma,
                              const std::function<V(const C&, const V&)>& act,
                              D0Mode mode = D0Mode::Full,
                              const std::function<V(const V&)>& d_a0 = nullptr) {
  const IndexSet& S = g.set();
  std::function<bool(const MultiIndex&)> inter = [&S](const MultiIndex& b) {
    return S.in_sub_closure(b);
  };
  std::vector<Exponent2D> ns = g.active_n();
  // ordinal budget: every factor of the exponential formula raises the prec
  // ordinal by at least one quarter unit, so chains longer than the ordinal
  // span of the working set cannot contribute
  int prec_hi = 0, prec_lo = 0;
  for (const auto& b : S.indices()) {
    prec_hi = std::max(prec_hi, b.prec4());
    prec_lo = std::min(prec_lo, b.prec4());
  }
  const int depth_cap = prec_hi - prec_lo + 1;
  std::function<bool(const MultiIndex&)> in_set = [&S](const MultiIndex& b) {
    return S.contains(b);
  };

  TSeries<V> total;
  // peel one n-class at a time:
  //   A(sigma, [n | rest]) = sum_m (1/m!) (pi^(n))^m * A((D^(n))^m sigma, rest)
  std::function<void(std::size_t, const TSeries<V>&, int)> rec =
      [&](std::size_t i, const TSeries<V>& sig, int depth) {
        if (sig.empty()) return;
        if (i == ns.size()) {
          total += sig;
          return;
        }
        const TSeries<C> pin = g.full_pi(ns[i]);
        // m = 0
        rec(i + 1, sig, depth);
        if (pin.empty()) return;
        TSeries<V> Dm = sig;
        TSeries<C> pin_pow;
        Rational fact(1);
        for (int m = 1;; ++m) {
          Dm = apply_Dn<V>(ns[i], Dm, mode, d_a0);
          if (Dm.empty()) break;
          pin_pow = (m == 1) ? pin.filtered(inter) : mul(pin_pow, pin, inter);
          if (pin_pow.empty()) break;
          if (depth + m > depth_cap) {
            // past the budget nothing may land in the set; assert instead of
            // silently truncating
            if (!mul_module<C, V>(pin_pow, Dm, in_set, act).empty())
              throw std::logic_error(
                  "exponential formula failed to terminate within ordinal bound");
            break;
          }
          fact = fact / Rational(m);
          TSeries<V> contrib = mul_module<C, V>(pin_pow, Dm, inter, act);
          rec(i + 1, contrib.scaled(fact), depth + m);
        }
      };
  rec(0, sigma, 0);
  return total.filtered(in_set);
}

template <class C>
TSeries<C> gamma_apply(const GroupElement<C>& g, const TSeries<C>& sigma,
                       D0Mode mode = D0Mode::Full) {
  std::function<C(const C&, const C&)> act = [](const C& a, const C& b) { return a * b; };
  return gamma_apply_module<C, C>(g, sigma, act, mode);
}

/// Sparse matrix of Gamma^* on the working set: entry(beta, gamma).
template <class C>
class GammaMatrix {
 public:
  GammaMatrix() = default;
  GammaMatrix(const IndexSet* S, std::vector<std::map<int, C>> rows)
      : S_(S), rows_(std::move(rows)) {}

  const IndexSet& set() const { return *S_; }
  const std::map<int, C>& row(int i) const { return rows_[i]; }
  C entry(const MultiIndex& beta, const MultiIndex& gamma) const {
    int i = S_->position(beta), j = S_->position(gamma);
    auto it = rows_[i].find(j);
    return it == rows_[i].end() ? C{} : it->second;
  }
  TSeries<C> apply(const TSeries<C>& sigma) const {
    TSeries<C> out;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      C acc{};
      bool any = false;
      for (const auto& [j, e] : rows_[i]) {
        const C* c = sigma.find(S_->indices()[j]);
        if (!c) continue;
        C p = e * (*c);
        acc = any ? acc + p : p;
        any = true;
      }
      if (any && !RingTraits<C>::is_zero(acc)) out.add_to(S_->indices()[i], acc);
    }
    return out;
  }
  /// matrix product: (this * other)(beta,gamma) = sum_delta this(beta,delta) other(delta,gamma)
  GammaMatrix product(const GammaMatrix& o) const {
    std::vector<std::map<int, C>> rows(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (const auto& [d, a] : rows_[i])
        for (const auto& [j, b] : o.rows_[d]) {
          C p = a * b;
          if (RingTraits<C>::is_zero(p)) continue;
          auto [it, fresh] = rows[i].try_emplace(j, p);
          if (!fresh) {
            it->second = it->second + p;
            if (RingTraits<C>::is_zero(it->second)) rows[i].erase(it);
          }
        }
    return GammaMatrix(S_, std::move(rows));
  }
  friend bool operator==(const GammaMatrix& a, const GammaMatrix& b) {
    return a.rows_ == b.rows_;
  }

 private:
  const IndexSet* S_ = nullptr;
  std::vector<std::map<int, C>> rows_;
};

/// materialize Gamma^* by pushing the generic element through the formula
template <class C>
GammaMatrix<C> gamma_matrix(const GroupElement<C>& g, D0Mode mode = D0Mode::Full) {
  const IndexSet& S = g.set();
  TSeries<RowVec<C>> generic;
  for (std::size_t j = 0; j < S.size(); ++j) {
    RowVec<C> e;
    e.v[(int)j] = RingTraits<C>::one();
    generic.set(S.indices()[j], e);
  }
  std::function<RowVec<C>(const C&, const RowVec<C>&)> act =
      [](const C& a, const RowVec<C>& x) { return act_on_row<C>(a, x); };
  TSeries<RowVec<C>> out = gamma_apply_module<C, RowVec<C>>(g, generic, act, mode);
  std::vector<std::map<int, C>> rows(S.size());
  for (const auto& [b, rv] : out.coeffs()) rows[S.position(b)] = rv.v;
  return GammaMatrix<C>(&S, std::move(rows));
}

/// composition: {pi^(n) + Gamma^* pibar^(n)} with shifts adding
template <class C>
GroupElement<C> compose(const GroupElement<C>& g, const GroupElement<C>& gbar,
                        D0Mode mode = D0Mode::Full) {
  std::array<C, 2> h{g.shift()[0] + gbar.shift()[0], g.shift()[1] + gbar.shift()[1]};
  GroupElement<C> r(&g.set(), h);
  std::map<Exponent2D, TSeries<C>> acc;
  for (const auto& [n, s] : g.pis()) acc[n] += s;
  for (const auto& n : g.active_n()) {
    TSeries<C> pb = gbar.full_pi(n);
    if (pb.empty()) continue;
    acc[n] += project_P(gamma_apply(g, pb, mode));
  }
  for (auto& [n, s] : acc)
    if (!s.empty()) r.set_pi(n, s);
  return r;
}

/// inverse: solved inductively in the prec order; within one index, the
/// purely polynomial couplings are resolved in decreasing |n|
template <class C>
GroupElement<C> invert(const GroupElement<C>& g, D0Mode mode = D0Mode::Full) {
  const IndexSet& S = g.set();
  C zero{};
  std::array<C, 2> hinv{zero - g.shift()[0], zero - g.shift()[1]};
  GroupElement<C> inv(&S, hinv);
  // indices ascending in prec order
  std::vector<MultiIndex> order;
  for (const auto& b : S.indices())
    if (!b.is_purely_polynomial()) order.push_back(b);
  std::sort(order.begin(), order.end(), [](const MultiIndex& a, const MultiIndex& b) {
    if (a.prec4() != b.prec4()) return a.prec4() < b.prec4();
    return a < b;
  });
  std::vector<Exponent2D> ns = g.active_n();
  std::sort(ns.begin(), ns.end(),
            [](const Exponent2D& a, const Exponent2D& b) { return b < a; });  // descending
  std::map<Exponent2D, TSeries<C>> acc;
  for (const auto& beta : order) {
    for (const auto& n : ns) {
      // pi_inv^(n)_beta = -(Gamma_inv^* pi^(n))_beta; the right-hand side uses
      // inv data at beta' < beta (non-pp columns) and, for pp columns e_m with
      // m > n, pi_inv^(m)_beta already fixed in this sweep
      TSeries<C> pin = g.full_pi(n);
      if (pin.empty()) continue;
      TSeries<C> img = gamma_apply(inv, pin, mode);
      const C* c = img.find(beta);
      if (!c) continue;
      C val = zero - *c;
      if (RingTraits<C>::is_zero(val)) continue;
      acc[n].add_to(beta, val);
      // rebuild inv with the new coefficient so later (n, beta) see it
      GroupElement<C> next(&S, hinv);
      for (const auto& [nn, s] : acc) next.set_pi(nn, s);
      inv = std::move(next);
    }
  }
  return inv;
}

/// report of a triangularity scan: violating (beta, gamma) pairs
struct TriangularReport {
  std::vector<std::pair<MultiIndex, MultiIndex>> violations;
  bool ok() const { return violations.empty(); }
};

/// (Gamma^* - id)_beta^gamma != 0  =>  gamma < beta in prec and |gamma| < |beta|
template <class C>
TriangularReport check_triangular(const GammaMatrix<C>& M) {
  const IndexSet& S = M.set();
  TriangularReport rep;
  for (std::size_t i = 0; i < S.size(); ++i) {
    const MultiIndex& beta = S.indices()[i];
    for (const auto& [j, c] : M.row((int)i)) {
      const MultiIndex& gamma = S.indices()[j];
      if (gamma == beta) continue;  // diagonal holds the id part
      bool prec_ok = gamma.prec4() < beta.prec4();
      bool hom_ok = gamma.homogeneity(S.alpha()) < beta.homogeneity(S.alpha());
      if (!prec_ok || !hom_ok) rep.violations.push_back({beta, gamma});
    }
  }
  return rep;
}

/// truncated modelled-distribution transform dGamma^* built from dpi^(0),
/// dpi^(1,0) riding on a base group element
template <class C>
struct DGammaElement {
  TSeries<C> dpi0;    // in the non-pp sector
  TSeries<C> dpi10;   // in Q(non-pp): |beta| < 2
  const GroupElement<C>* base = nullptr;

  void validate() const {
    const Rational& alpha = base->set().alpha();
    for (const auto& [b, c] : dpi0.coeffs())
      if (b.is_purely_polynomial())
        throw std::invalid_argument("dpi^(0) must be non purely polynomial");
    for (const auto& [b, c] : dpi10.coeffs())
      if (b.is_purely_polynomial() || !(b.homogeneity(alpha) < Rational(2)))
        throw std::invalid_argument("dpi^(1,0) must lie in Q of the non-pp sector");
  }
};

/// dGamma^* sigma = sum_{n = 0,(1,0)} dpi^(n) . Gamma^* D^(n) sigma
template <class C>
TSeries<C> dgamma_apply(const DGammaElement<C>& d, const TSeries<C>& sigma,
                        D0Mode mode = D0Mode::Full) {
  const IndexSet& S = d.base->set();
  std::function<bool(const MultiIndex&)> inter = [&S](const MultiIndex& b) {
    return S.in_sub_closure(b);
  };
  TSeries<C> out;
  const Exponent2D n10{1, 0};
  for (int which = 0; which < 2; ++which) {
    const TSeries<C>& dpi = which == 0 ? d.dpi0 : d.dpi10;
    if (dpi.empty()) continue;
    TSeries<C> ds = apply_Dn<C>(which == 0 ? Exponent2D{0, 0} : n10, sigma, mode);
    if (ds.empty()) continue;
    TSeries<C> gds = gamma_apply(*d.base, ds, mode);
    out += mul(dpi, gds, inter);
  }
  return out.filtered([&S](const MultiIndex& b) { return S.contains(b); });
}

template <class C>
GammaMatrix<C> dgamma_matrix(const DGammaElement<C>& d, D0Mode mode = D0Mode::Full) {
  const IndexSet& S = d.base->set();
  TSeries<RowVec<C>> generic;
  for (std::size_t j = 0; j < S.size(); ++j) {
    RowVec<C> e;
    e.v[(int)j] = RingTraits<C>::one();
    generic.set(S.indices()[j], e);
  }
  // dGamma on the generic element, assembled from the module action
  std::function<RowVec<C>(const C&, const RowVec<C>&)> act =
      [](const C& a, const RowVec<C>& x) { return act_on_row<C>(a, x); };
  std::function<bool(const MultiIndex&)> inter = [&S](const MultiIndex& b) {
    return S.in_sub_closure(b);
  };
  TSeries<RowVec<C>> out;
  const Exponent2D n10{1, 0};
  for (int which = 0; which < 2; ++which) {
    const TSeries<C>& dpi = which == 0 ? d.dpi0 : d.dpi10;
    if (dpi.empty()) continue;
    TSeries<RowVec<C>> ds =
        apply_Dn<RowVec<C>>(which == 0 ? Exponent2D{0, 0} : n10, generic, mode);
    if (ds.empty()) continue;
    TSeries<RowVec<C>> gds = gamma_apply_module<C, RowVec<C>>(*d.base, ds, act, mode);
    std::function<bool(const MultiIndex&)> win = inter;
    out += mul_module<C, RowVec<C>>(dpi, gds, win, act);
  }
  std::vector<std::map<int, C>> rows(S.size());
  for (const auto& [b, rv] : out.coeffs())
    if (S.contains(b)) rows[S.position(b)] = rv.v;
  return GammaMatrix<C>(&S, std::move(rows));
}

/// (dGamma^*)_beta^gamma != 0 => gamma < beta in prec and |gamma| <= |beta| + 1 - alpha
template <class C>
TriangularReport check_dgamma_triangular(const GammaMatrix<C>& M) {
  const IndexSet& S = M.set();
  const Rational& alpha = S.alpha();
  TriangularReport rep;
  for (std::size_t i = 0; i < S.size(); ++i) {
    const MultiIndex& beta = S.indices()[i];
    for (const auto& [j, c] : M.row((int)i)) {
      const MultiIndex& gamma = S.indices()[j];
      bool prec_ok = gamma.prec4() < beta.prec4();
      bool hom_ok =
          gamma.homogeneity(alpha) <= beta.homogeneity(alpha) + Rational(1) - alpha;
      if (!prec_ok || !hom_ok) rep.violations.push_back({beta, gamma});
    }
  }
  return rep;
}

/// rows beta in N0*e0 of dGamma^* vanish on non purely polynomial columns
template <class C>
TriangularReport check_dgamma_e0(const GammaMatrix<C>& M) {
  const IndexSet& S = M.set();
  TriangularReport rep;
  for (std::size_t i = 0; i < S.size(); ++i) {
    const MultiIndex& beta = S.indices()[i];
    bool e0_row = beta.nfreq().empty() && beta.total_mult() == beta.beta0();
    if (!e0_row) continue;
    for (const auto& [j, c] : M.row((int)i)) {
      const MultiIndex& gamma = S.indices()[j];
      if (!gamma.is_purely_polynomial()) rep.violations.push_back({beta, gamma});
    }
  }
  return rep;
}

}  // namespace mirs
