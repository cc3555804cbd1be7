#include "mirs/checks.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <sstream>

namespace mirs {

void CheckReport::add(const std::string& name, bool pass, const std::string& detail) {
  results.push_back({name, pass, detail});
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

/// linear regression slope of y against x
double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

// ---------------------------------------------------------------------------
// algebra

IndexSet algebra_working_set(const GlobalConfig& cfg, int prec_le4) {
  EnumFilter f;
  f.prec_le4 = prec_le4;
  std::vector<MultiIndex> v = enumerate_indices(cfg, f);
  return IndexSet(v, cfg.alpha);
}

GroupElement<Rational> random_group_element(const IndexSet& S, std::uint64_t seed,
                                            int denom_bound) {
  Rng rng(seed);
  auto coin = [&rng](double p) { return rng.uniform() < p; };
  // dyadic random coefficients keep denominators of long sums bounded
  auto rnd = [&]() {
    int num = (int)(rng.next_u64() % 9) - 4;
    int den = 1 << (int)(rng.next_u64() % 3);
    (void)denom_bound;
    return Rational(num, den);
  };
  GroupElement<Rational> g(&S, {rnd(), rnd()});
  std::map<Exponent2D, TSeries<Rational>> pis;
  for (const auto& n : g.active_n()) {
    TSeries<Rational> s;
    for (const auto& b : S.indices()) {
      if (b.is_purely_polynomial()) continue;
      if (!(Rational(n.pdeg()) < b.homogeneity(S.alpha()))) continue;
      if (coin(0.5)) s.add_to(b, rnd());
    }
    if (!s.empty()) g.set_pi(n, s);
  }
  return g;
}

DGammaElement<Rational> random_dgamma(const GroupElement<Rational>& base, std::uint64_t seed) {
  Rng rng(seed);
  auto rnd = [&]() {
    int num = (int)(rng.next_u64() % 9) - 4;
    int den = 1 << (int)(rng.next_u64() % 3);
    return Rational(num, den);
  };
  const IndexSet& S = base.set();
  DGammaElement<Rational> d;
  d.base = &base;
  for (const auto& b : S.indices()) {
    if (b.is_purely_polynomial()) continue;
    if (rng.uniform() < 0.7) d.dpi0.add_to(b, rnd());
    if (b.homogeneity(S.alpha()) < Rational(2) && rng.uniform() < 0.7) d.dpi10.add_to(b, rnd());
  }
  d.validate();
  return d;
}

CheckReport check_product_structure(const IndexSet& S) {
  CheckReport rep;
  const Rational& alpha = S.alpha();
  long checked = 0;
  bool prec_ok = true, hom_ok = true;
  std::string witness;
  for (const auto& beta : S.indices()) {
    for (int k = 0; k <= beta.max_k(); ++k) {
      auto rem0 = beta.minus(MultiIndex::unit_k(k));
      if (!rem0) continue;
      // ordered decompositions of rem into k+1 populated parts
      std::function<void(const MultiIndex&, int, std::vector<MultiIndex>&)> rec =
          [&](const MultiIndex& rem, int parts, std::vector<MultiIndex>& acc) {
            if (!prec_ok || !hom_ok) return;
            if (parts == 1) {
              if (!rem.is_populated()) return;
              acc.push_back(rem);
              ++checked;
              Rational hom_sum(0);
              for (const auto& p : acc) {
                if (!(p.prec4() < beta.prec4())) {
                  prec_ok = false;
                  witness = beta.str() + " <- " + p.str();
                }
                hom_sum += p.homogeneity(alpha);
              }
              if (!(hom_sum == beta.homogeneity(alpha))) {
                hom_ok = false;
                witness = beta.str();
              }
              acc.pop_back();
              return;
            }
            rem.for_each_subindex([&](const MultiIndex& part) {
              if (!part.is_populated()) return;
              acc.push_back(part);
              rec(*rem.minus(part), parts - 1, acc);
              acc.pop_back();
            });
          };
      std::vector<MultiIndex> acc;
      rec(*rem0, k + 1, acc);
    }
  }
  rep.add("product-prec-triangularity", prec_ok,
          prec_ok ? std::to_string(checked) + " decompositions" : witness);
  rep.add("product-homogeneity-additivity", hom_ok, hom_ok ? "" : witness);
  return rep;
}

CheckReport check_counterterm_structure(const IndexSet& S, const GlobalConfig& cfg) {
  CheckReport rep;
  // symbolic run over the full working set: c and Pi as per-index symbols
  TSeries<Expr> c, Pi;
  for (const auto& b : S.indices()) {
    if (b.nfreq().empty() && b.homogeneity(cfg.alpha) < Rational(2)) c.add_to(b, expr_C(b));
    Pi.add_to(b, expr_Pi(b));
  }
  TSeries<Expr> out = iterate_D0_counterterm<Expr>(c, Pi, S, D0Mode::Full);
  bool dep_ok = true, grading_ok = true;
  std::string witness;
  for (const auto& [beta, e] : out.coeffs()) {
    for (const Atom& a : e.support_atoms()) {
      if (a.index == beta && a.kind == Atom::Kind::C) continue;  // the k=0 term
      if (!(a.index.prec4() < beta.prec4())) {
        dep_ok = false;
        witness = beta.str() + " <- " + a.index.str();
      }
    }
  }
  // [beta] >= 0 for every k >= 1 contribution: purely polynomial targets
  // must come out structurally zero
  for (const auto& [beta, e] : out.coeffs()) {
    if (beta.noise_hom() < 0 && !e.is_zero()) {
      grading_ok = false;
      witness = beta.str();
    }
  }
  rep.add("counterterm-dependency-triangularity", dep_ok, dep_ok ? "" : witness);
  rep.add("counterterm-grading", grading_ok, grading_ok ? "" : witness);
  return rep;
}

namespace {

/// rational value with a high-water mark of consumed pi rows (prec4 units);
/// verifies dependency locality through the real computation
struct TrackedRat {
  Rational v;
  int mx = INT_MIN;
  TrackedRat() = default;
  TrackedRat(const Rational& r) : v(r) {}
  bool is_zero() const { return v.is_zero(); }
  friend TrackedRat operator+(const TrackedRat& a, const TrackedRat& b) {
    TrackedRat r;
    r.v = a.v + b.v;
    r.mx = std::max(a.mx, b.mx);
    return r;
  }
  friend TrackedRat operator-(const TrackedRat& a, const TrackedRat& b) {
    TrackedRat r;
    r.v = a.v - b.v;
    r.mx = std::max(a.mx, b.mx);
    return r;
  }
  friend TrackedRat operator*(const TrackedRat& a, const TrackedRat& b) {
    TrackedRat r;
    r.v = a.v * b.v;
    r.mx = std::max(a.mx, b.mx);
    return r;
  }
  friend bool operator==(const TrackedRat& a, const TrackedRat& b) { return a.v == b.v; }
};

}  // namespace

template <>
struct RingTraits<TrackedRat> {
  static bool is_zero(const TrackedRat& c) { return c.v.is_zero(); }
  static TrackedRat scale(const TrackedRat& c, const Rational& r) {
    TrackedRat t;
    t.v = c.v * r;
    t.mx = c.mx;
    return t;
  }
  static TrackedRat one() { return TrackedRat(Rational(1)); }
};

CheckReport check_gamma_structure(const GroupElement<Rational>& g) {
  CheckReport rep;
  const IndexSet& S = g.set();
  // tracked clone: every stored pi coefficient carries its row's ordinal
  GroupElement<TrackedRat> gt(&S, {TrackedRat(g.shift()[0]), TrackedRat(g.shift()[1])});
  for (const auto& [n, s] : g.pis()) {
    TSeries<TrackedRat> ts;
    for (const auto& [b, coef] : s.coeffs()) {
      TrackedRat t(coef);
      t.mx = b.prec4();
      ts.add_to(b, t);
    }
    gt.set_pi(n, ts);
  }
  GammaMatrix<TrackedRat> M = gamma_matrix(gt);
  bool dep_ok = true, tri_ok = true;
  std::string w1, w2;
  const Rational& alpha = S.alpha();
  for (std::size_t i = 0; i < S.size(); ++i) {
    const MultiIndex& beta = S.indices()[i];
    for (const auto& [j, e] : M.row((int)i)) {
      const MultiIndex& gamma = S.indices()[j];
      // dependency locality: strict below beta for non-pp columns, and
      // never above beta for any column
      if (!gamma.is_purely_polynomial() && e.mx >= beta.prec4()) {
        dep_ok = false;
        if (w1.empty()) w1 = beta.str() + " -> " + gamma.str();
      }
      if (e.mx > beta.prec4()) {
        dep_ok = false;
        if (w1.empty()) w1 = beta.str() + " -> " + gamma.str();
      }
      if (gamma == beta) continue;
      if (!(gamma.prec4() < beta.prec4()) ||
          !(gamma.homogeneity(alpha) < beta.homogeneity(alpha))) {
        tri_ok = false;
        if (w2.empty()) w2 = beta.str() + " -> " + gamma.str();
      }
    }
  }
  rep.add("gamma-dependency-locality", dep_ok, w1);
  rep.add("gamma-strict-triangularity", tri_ok, w2);
  return rep;
}

CheckReport check_multiplicativity(const GroupElement<Rational>& g, std::uint64_t seed,
                                   int trials) {
  CheckReport rep;
  const IndexSet& S = g.set();
  Rng rng(seed);
  int half = 0;
  for (const auto& b : S.indices()) half = std::max(half, b.prec4());
  half /= 2;
  bool ok = true;
  std::string witness;
  for (int t = 0; t < trials && ok; ++t) {
    TSeries<Rational> p1, p2;
    for (const auto& b : S.indices()) {
      if (b.is_purely_polynomial() || b.prec4() > half) continue;
      if (rng.uniform() < 0.6)
        p1.add_to(b, Rational((int)(rng.next_u64() % 7) - 3, 1 << (int)(rng.next_u64() % 3)));
      if (rng.uniform() < 0.6)
        p2.add_to(b, Rational((int)(rng.next_u64() % 7) - 3, 1 << (int)(rng.next_u64() % 3)));
    }
    TSeries<Rational> lhs = gamma_apply(g, mul(p1, p2, S));
    TSeries<Rational> rhs = mul(gamma_apply(g, p1), gamma_apply(g, p2), S);
    if (!(lhs == rhs)) {
      ok = false;
      witness = "trial " + std::to_string(t);
    }
  }
  // Gamma^* 1 = 1
  TSeries<Rational> one = TSeries<Rational>::unit(Rational(1));
  if (!(gamma_apply(g, one) == one)) {
    ok = false;
    witness = "Gamma 1 != 1";
  }
  rep.add("gamma-multiplicativity", ok, witness);
  return rep;
}

CheckReport check_commutation(const GroupElement<Rational>& g) {
  CheckReport rep;
  const IndexSet& S = g.set();
  TSeries<RowVec<Rational>> generic;
  for (std::size_t j = 0; j < S.size(); ++j) {
    RowVec<Rational> e;
    e.v[(int)j] = Rational(1);
    generic.set(S.indices()[j], e);
  }
  auto act = [](const Rational& a, const RowVec<Rational>& x) { return act_on_row<Rational>(a, x); };
  using V = RowVec<Rational>;
  TSeries<V> gsig = gamma_apply_module<Rational, V>(g, generic, act);
  bool ok = true;
  std::string witness;
  std::vector<Exponent2D> ds = {{0, 0}, {1, 0}, {0, 1}, {2, 0}};
  for (const auto& m : ds) {
    TSeries<V> lhs = apply_Dn<V>(m, gsig);
    TSeries<V> rhs = gamma_apply_module<Rational, V>(g, apply_Dn<V>(m, generic), act);
    for (const auto& n : g.active_n()) {
      TSeries<Rational> dpin = apply_Dn<Rational>(m, g.full_pi(n));
      if (dpin.empty()) continue;
      TSeries<V> gd = gamma_apply_module<Rational, V>(g, apply_Dn<V>(n, generic), act);
      std::function<bool(const MultiIndex&)> win = [&S](const MultiIndex& b) {
        return S.contains(b);
      };
      std::function<V(const Rational&, const V&)> a2 = act;
      rhs += mul_module<Rational, V>(dpin, gd, win, a2);
    }
    // compare on rows whose D-preimages stay inside the set
    for (const auto& beta : S.indices()) {
      bool comparable = true;
      if (m.is_zero()) {
        for (const auto& [k, mm] : beta.kfreq()) {
          if (k == 0) continue;
          MultiIndex pre = beta.minus(MultiIndex::unit_k(k))->plus(MultiIndex::unit_k(k - 1));
          if (pre.is_populated() && !S.contains(pre)) comparable = false;
        }
      } else {
        MultiIndex pre = beta.plus(MultiIndex::unit_n(m));
        if (pre.is_populated() && !S.contains(pre)) comparable = false;
      }
      if (!comparable) continue;
      const V* a = lhs.find(beta);
      const V* b = rhs.find(beta);
      V va = a ? *a : V{};
      V vb = b ? *b : V{};
      if (!(va.v == vb.v)) {
        ok = false;
        witness = "D^" + m.str() + " at " + beta.str();
      }
    }
  }
  rep.add("gamma-commutation-template", ok, witness);
  return rep;
}

CheckReport check_dgamma_structure(const DGammaElement<Rational>& d) {
  CheckReport rep;
  GammaMatrix<Rational> M = dgamma_matrix(d);
  TriangularReport t1 = check_dgamma_triangular(M);
  rep.add("dgamma-triangularity", t1.ok(),
          t1.ok() ? "" : t1.violations[0].first.str() + " -> " + t1.violations[0].second.str());
  TriangularReport t2 = check_dgamma_e0(M);
  rep.add("dgamma-e0-rows", t2.ok(),
          t2.ok() ? "" : t2.violations[0].first.str() + " -> " + t2.violations[0].second.str());
  return rep;
}

CheckReport check_group_laws(const GlobalConfig& cfg, int prec_le4, int n_elements,
                             std::uint64_t seed) {
  CheckReport rep;
  IndexSet S = algebra_working_set(cfg, prec_le4);
  bool id_ok = true, inv_ok = true, assoc_ok = true, mat_ok = true;
  std::string w;
  GroupElement<Rational> id(&S, {Rational(0), Rational(0)});
  GammaMatrix<Rational> id_matrix = gamma_matrix(id);
  auto same_element = [&](const GroupElement<Rational>& a, const GroupElement<Rational>& b) {
    for (const auto& n : a.active_n())
      if (!(a.full_pi(n) == b.full_pi(n))) return false;
    return a.shift()[0] == b.shift()[0] && a.shift()[1] == b.shift()[1];
  };
  for (int i = 0; i < n_elements; ++i) {
    GroupElement<Rational> g = random_group_element(S, seed + 977 * i);
    if (!same_element(compose(g, id), g) || !same_element(compose(id, g), g)) {
      id_ok = false;
      w = "identity, element " + std::to_string(i);
    }
    GroupElement<Rational> gi = invert(g);
    GammaMatrix<Rational> prod = gamma_matrix(compose(g, gi));
    if (!(prod == id_matrix)) {
      inv_ok = false;
      w = "inverse, element " + std::to_string(i);
    }
    if (i % 7 == 0) {
      GroupElement<Rational> h = random_group_element(S, seed + 977 * i + 13);
      GroupElement<Rational> k = random_group_element(S, seed + 977 * i + 29);
      if (!same_element(compose(compose(g, h), k), compose(g, compose(h, k)))) {
        assoc_ok = false;
        w = "associativity, element " + std::to_string(i);
      }
      GammaMatrix<Rational> lhs = gamma_matrix(compose(g, h));
      GammaMatrix<Rational> rhs = gamma_matrix(g).product(gamma_matrix(h));
      if (!(lhs == rhs)) {
        mat_ok = false;
        w = "matrix of compose, element " + std::to_string(i);
      }
    }
  }
  rep.add("group-identity", id_ok, id_ok ? "" : w);
  rep.add("group-inverse", inv_ok, inv_ok ? "" : w);
  rep.add("group-associativity", assoc_ok, assoc_ok ? "" : w);
  rep.add("group-compose-matrix", mat_ok, mat_ok ? "" : w);
  return rep;
}

std::map<MultiIndex, std::set<MultiIndex>> dgamma_population_pattern(
    const GlobalConfig& cfg, const std::vector<MultiIndex>& rows) {
  // envelope working set for the pattern rows: prec strictly below the rows,
  // multiplicity/k caps sound for every contribution chain
  int prec_cap = 0, mult_cap = 0, k_cap = 1;
  for (const auto& b : rows) {
    prec_cap = std::max(prec_cap, b.prec4());
    mult_cap = std::max(mult_cap, b.total_mult() + b.noise_hom() + 2);
    k_cap = std::max(k_cap, b.max_k() + b.total_mult() + 1);
  }
  EnumFilter f;
  f.prec_le4 = prec_cap + 2;
  std::vector<MultiIndex> all = enumerate_indices(cfg, f);
  std::vector<MultiIndex> keep;
  for (const auto& b : all)
    if (b.total_mult() <= mult_cap && b.max_k() <= k_cap) keep.push_back(b);
  IndexSet S(keep, cfg.alpha);
  // formal-symbol mode: distinct opaque symbols for every input coefficient,
  // so only structural zeros vanish
  GroupElement<Expr> g(&S, {expr_Sym("h1"), expr_Sym("h2")});
  for (const auto& n : g.active_n()) {
    TSeries<Expr> s;
    for (const auto& b : S.indices()) {
      if (b.is_purely_polynomial()) continue;
      if (!(Rational(n.pdeg()) < b.homogeneity(S.alpha()))) continue;
      s.add_to(b, expr_Sym("pi^" + n.str(), b, n));
    }
    if (!s.empty()) g.set_pi(n, s);
  }
  DGammaElement<Expr> d;
  d.base = &g;
  for (const auto& b : S.indices()) {
    if (b.is_purely_polynomial()) continue;
    d.dpi0.add_to(b, expr_Sym("dpi0", b));
    if (b.homogeneity(S.alpha()) < Rational(2)) d.dpi10.add_to(b, expr_Sym("dpi10", b));
  }
  GammaMatrix<Expr> M = dgamma_matrix(d);
  std::map<MultiIndex, std::set<MultiIndex>> out;
  for (const auto& beta : rows) {
    std::set<MultiIndex> cols;
    for (const auto& [j, e] : M.row(S.position(beta)))
      if (!e.is_zero()) cols.insert(S.indices()[j]);
    out[beta] = cols;
  }
  return out;
}

std::map<MultiIndex, std::set<MultiIndex>> figure3_reference() {
  auto P = [](const char* s) { return MultiIndex::parse(s); };
  std::map<MultiIndex, std::set<MultiIndex>> ref;
  ref[P("0")] = {P("e(1,0)")};
  ref[P("e1")] = {P("e0"), P("e(1,0)"), P("e1*e(1,0)")};
  ref[P("e1^2")] = {P("e0"),          P("e0^2"),          P("e0*e1"), P("e(1,0)"),
                    P("e1*e(1,0)"),   P("e0*e1*e(1,0)"),  P("e1^2*e(1,0)")};
  ref[P("e1^3")] = {P("e0"),
                    P("e0^2"),
                    P("e0^3"),
                    P("e0*e1"),
                    P("e0^2*e1"),
                    P("e(1,0)"),
                    P("e0*e1^2"),
                    P("e1*e(1,0)"),
                    P("e0*e1*e(1,0)"),
                    P("e0^2*e1*e(1,0)"),
                    P("e1^2*e(1,0)"),
                    P("e0*e1^2*e(1,0)"),
                    P("e1^3*e(1,0)")};
  return ref;
}

CheckReport check_figure3(const GlobalConfig& cfg) {
  CheckReport rep;
  auto ref = figure3_reference();
  std::vector<MultiIndex> rows;
  for (const auto& [b, s] : ref) rows.push_back(b);
  auto got = dgamma_population_pattern(cfg, rows);
  for (const auto& [b, want] : ref) {
    bool ok = got[b] == want;
    std::string detail;
    if (!ok) {
      detail = "got {";
      for (const auto& g : got[b]) detail += g.str() + " ";
      detail += "}";
    }
    rep.add("dgamma-population-" + b.str(), ok, detail);
  }
  return rep;
}

CheckReport check_algebra_suite(const GlobalConfig& cfg, int prec_le4, std::uint64_t seed) {
  CheckReport rep;
  IndexSet S = algebra_working_set(cfg, prec_le4);
  S.check_non_integrality();
  rep.add("working-set", true, std::to_string(S.size()) + " indices");
  rep.merge(check_product_structure(S));
  rep.merge(check_counterterm_structure(S, cfg));
  GroupElement<Rational> g = random_group_element(S, seed);
  rep.merge(check_gamma_structure(g));
  rep.merge(check_multiplicativity(g, seed + 1));
  rep.merge(check_commutation(g));
  rep.merge(check_dgamma_structure(random_dgamma(g, seed + 2)));
  rep.merge(check_figure3(cfg));
  return rep;
}

// ---------------------------------------------------------------------------
// kernel

CheckReport check_kernel_suite(const KernelCheckConfig& kc) {
  CheckReport rep;
  SpectralGrid G(kc.n1, kc.n2, kc.h1, kc.h2);
  Rng rng(kc.seed);
  LatticeField f = G.make_field();
  for (auto& v : f.data()) v = rng.gauss();
  f = G.semigroup(f, 1e-4);  // smooth start

  // semigroup property
  double worst = 0;
  for (double t : {1e-3, 1e-2, 1e-1}) {
    LatticeField a = G.semigroup(G.semigroup(f, t), 2 * t);
    LatticeField b = G.semigroup(f, 3 * t);
    worst = std::max(worst, (a - b).max_abs() / std::max(b.max_abs(), 1e-300));
  }
  rep.add("kernel-semigroup-property", worst <= 1e-10, "rel err " + fmt(worst));

  // spatial parity: even input stays even
  LatticeField even = G.make_field();
  for (int i2 = 0; i2 < kc.n2; ++i2)
    for (int i1 = 0; i1 < kc.n1; ++i1) even.at(i1, i2) = f.at(i1, i2) + f.at((kc.n1 - i1) % kc.n1, i2);
  LatticeField se = G.semigroup(even, 1e-2);
  double par = 0;
  for (int i2 = 0; i2 < kc.n2; ++i2)
    for (int i1 = 0; i1 < kc.n1; ++i1)
      par = std::max(par, std::abs(se.at(i1, i2) - se.at((kc.n1 - i1) % kc.n1, i2)));
  rep.add("kernel-parity", par <= 1e-10 * std::max(1.0, se.max_abs()), fmt(par));

  // parabolic scaling across two resolutions:
  // psi_t(x) = t^{-3/4} psi_1(x1/t^{1/4}, x2/t^{1/2})
  {
    double t1 = 0.01, s = 2.0;  // compare psi_{t1} and psi_{s^4 t1} at scaled points
    SpectralGrid G2(kc.n1, kc.n2, kc.h1 * s, kc.h2 * s * s);
    LatticeField k1f = G.kernel(t1);
    LatticeField k2f = G2.kernel(t1 * s * s * s * s);
    double dev = 0, ref = k1f.max_abs();
    for (int i2 = -6; i2 <= 6; ++i2)
      for (int i1 = -24; i1 <= 24; ++i1) {
        double a = k1f.at((i1 + kc.n1) % kc.n1, (i2 + kc.n2) % kc.n2);
        double b = k2f.at((i1 + kc.n1) % kc.n1, (i2 + kc.n2) % kc.n2) * (s * s * s);
        dev = std::max(dev, std::abs(a - b));
      }
    rep.add("kernel-parabolic-scaling", dev <= 0.01 * ref,
            "dev " + fmt(dev / std::max(ref, 1e-300)));
  }

  // moment bound: constants stable within a factor 2 across the t range
  for (Exponent2D n : {Exponent2D{0, 0}, Exponent2D{1, 0}}) {
    auto rows = moment_bound_probe(G, n, kc.ts, 0.0);
    double lo = 1e300, hi = 0;
    for (const auto& r : rows) {
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
    rep.add("kernel-moment-bound-n" + n.str(), hi / lo <= 2.0,
            "ratio spread " + fmt(hi / lo));
    if (n.pdeg() == 1) {
      std::vector<double> xs, ys;
      for (const auto& r : rows) {
        xs.push_back(std::log(std::pow(r.t, 0.25)));
        ys.push_back(std::log(r.lhs));
      }
      double sl = slope_fit(xs, ys);
      rep.add("kernel-moment-slope-n(1,0)", std::abs(sl + 1.0) <= 0.05, "slope " + fmt(sl));
    }
  }
  {
    bool threw = false;
    try {
      moment_bound_probe(G, {0, 0}, {1.0}, -3.01);
    } catch (const std::invalid_argument&) {
      threw = true;
    }
    auto fine = moment_bound_probe(G, {0, 0}, {1.0}, -2.9);
    rep.add("kernel-moment-theta-gate", threw && std::isfinite(fine[0].ratio), "");
  }

  // taylor subtraction kills low-degree polynomials
  {
    LatticeField p = G.make_field();
    GridPoint x{kc.n1 / 3, kc.n2 / 3};
    for (int i2 = 0; i2 < kc.n2; ++i2)
      for (int i1 = 0; i1 < kc.n1; ++i1) {
        double d1 = p.disp1({i1, i2}, x), d2 = p.disp2({i1, i2}, x);
        p.at(i1, i2) = 0.7 - 1.3 * d1 + 0.25 * d2 + 0.5 * d1 * d1;
      }
    SplitField r = taylor_subtract(G, p, x, 2.9, 0.0);
    double resid = r.materialize().max_abs();
    rep.add("kernel-taylor-poly-annihilation", resid <= 1e-8 * p.max_abs(), fmt(resid));
  }

  // integrate_model: analytic single-mode inverse and PDE round trip
  {
    LatticeField gfield = G.make_field();
    double kk1 = 2.0 * 3.14159265358979323846 * 3 / (kc.n1 * kc.h1);
    double kk2 = 2.0 * 3.14159265358979323846 * 2 / (kc.n2 * kc.h2);
    for (int i2 = 0; i2 < kc.n2; ++i2)
      for (int i1 = 0; i1 < kc.n1; ++i1)
        gfield.at(i1, i2) = std::cos(kk1 * i1 * kc.h1 + kk2 * i2 * kc.h2);
    LatticeField pim = G.heat_op(gfield, 1.0);
    IntegrateOptions opt;
    GridPoint x{5, 9};
    SplitField sol = integrate_model(G, pim, 0.45, x, opt);
    LatticeField expect = gfield;
    for (auto& v : expect.data()) v -= gfield.at(x);
    double err = (sol.materialize() - expect).max_abs() / gfield.max_abs();
    rep.add("kernel-integrate-analytic", err <= 1e-8, "rel err " + fmt(err));
    LatticeField back = split_heat_op(G, sol, 1.0).materialize();
    double mean = pim.mean();
    LatticeField target = pim;
    for (auto& v : target.data()) v -= mean;
    double pde = (back - target).max_abs() / std::max(target.max_abs(), 1e-300);
    rep.add("kernel-integrate-pde-residual", pde <= 1e-6, "rel err " + fmt(pde));
    // t-quadrature self-convergence: halving the log-step barely moves it
    IntegrateOptions opt2 = opt;
    opt2.quad.ratio = std::sqrt(opt.quad.ratio);
    SplitField sol2 = integrate_model(G, pim, 0.45, x, opt2);
    double dq = (sol.materialize() - sol2.materialize()).max_abs() / gfield.max_abs();
    rep.add("kernel-quadrature-self-convergence", dq <= 1e-9, fmt(dq));
  }
  return rep;
}

}  // namespace mirs
