#include "mirs/hierarchy.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace mirs {

bool counterterm_eligible(const MultiIndex& g, const Rational& alpha, HierarchyMode mode) {
  if (!g.nfreq().empty()) return false;
  if (!(g.homogeneity(alpha) < Rational(2))) return false;
  if (mode == HierarchyMode::A0 && g.beta0() > 0) return false;
  return true;
}

TSeries<Expr> symbolic_counterterm(const std::vector<MultiIndex>& targets, const Rational& alpha,
                                   HierarchyMode mode) {
  // sound reach bounds: a c index gamma can feed a target beta only with
  // max k(gamma) <= max k(beta) and total mult(gamma) <= total mult(beta)
  int max_k = 1, max_mult = 0;
  for (const auto& b : targets) {
    max_k = std::max(max_k, b.max_k());
    max_mult = std::max(max_mult, b.total_mult() + std::max(0, b.noise_hom()));
  }
  TSeries<Expr> c;
  std::function<void(int, MultiIndex, int)> rec = [&](int k, MultiIndex cur, int mleft) {
    if (k > max_k) {  // each k-multiset is reached exactly once
      if (counterterm_eligible(cur, alpha, mode)) c.add_to(cur, expr_C(cur));
      return;
    }
    rec(k + 1, cur, mleft);
    MultiIndex nxt = cur;
    for (int m = 1; m <= mleft; ++m) {
      nxt = nxt.plus(MultiIndex::unit_k(k));
      rec(k + 1, nxt, mleft - m);
    }
  };
  rec(mode == HierarchyMode::A0 ? 1 : 0, MultiIndex(), max_mult);
  return c;
}

namespace {

// working set for one target: populated sub-indices plus the counterterm
// support (which reaches outside the sub-index lattice through D0 shifts)
IndexSet equation_set(const MultiIndex& beta, const Rational& alpha, HierarchyMode mode) {
  std::set<MultiIndex> s;
  beta.for_each_subindex([&](const MultiIndex& b) {
    if (b.is_populated()) s.insert(b);
  });
  TSeries<Expr> c = symbolic_counterterm({beta}, alpha, mode);
  for (const auto& [g, e] : c.coeffs()) s.insert(g);
  // D0 iterates wander between the c support and beta; include the sound
  // envelope so no intermediate is dropped
  int max_k = std::max(1, beta.max_k());
  int max_mult = beta.total_mult() + std::max(0, beta.noise_hom());
  int max_br = beta.noise_hom();
  for (const auto& [n, m] : beta.nfreq()) max_br += m;
  std::function<void(int, MultiIndex, int)> rec = [&](int k, MultiIndex cur, int mleft) {
    if (cur.noise_hom() <= max_br && cur.is_populated()) s.insert(cur);
    if (k > max_k + 1 || mleft == 0) return;
    rec(k + 1, cur, mleft);
    MultiIndex nxt = cur;
    for (int m = 1; m <= mleft; ++m) {
      nxt = nxt.plus(MultiIndex::unit_k(k));
      rec(k + 1, nxt, mleft - m);
    }
  };
  rec(mode == HierarchyMode::A0 ? 1 : 0, MultiIndex(), max_mult);
  return IndexSet(std::vector<MultiIndex>(s.begin(), s.end()), alpha);
}

}  // namespace

std::vector<HierarchyEquation> generate_hierarchy(const GlobalConfig& cfg,
                                                  const std::vector<MultiIndex>& indices,
                                                  HierarchyMode mode) {
  cfg.validate();
  std::vector<HierarchyEquation> out;
  auto d_a0 = [](const Expr& e) { return e.d_a0(); };
  for (const auto& beta : indices) {
    if (!beta.is_populated() || beta.is_purely_polynomial())
      throw std::invalid_argument("hierarchy: index must be populated, not purely polynomial: " +
                                  beta.str());
    if (mode == HierarchyMode::A0 && beta.beta0() > 0)
      throw std::invalid_argument("hierarchy (a0 mode): index must have beta(0)=0: " + beta.str());

    IndexSet S = equation_set(beta, cfg.alpha, mode);

    // symbolic model on the sub-indices: Pi and d1^2 Pi atoms; d1^2 of a
    // purely polynomial component vanishes unless n1 >= 2
    TSeries<Expr> Pi, dPi;
    beta.for_each_subindex([&](const MultiIndex& b) {
      if (!b.is_populated()) return;
      Pi.add_to(b, expr_Pi(b));
      if (b.is_purely_polynomial()) {
        Exponent2D n = b.nfreq()[0].first;
        if (n.n1 >= 2) dPi.add_to(b, expr_D1sqPi(b));
      } else {
        dPi.add_to(b, expr_D1sqPi(b));
      }
    });

    Expr rhs;
    int kmin = mode == HierarchyMode::A0 ? 1 : 0;
    for (int k = kmin;; ++k) {
      if (!beta.minus(MultiIndex::unit_k(k))) {
        if (k > beta.max_k()) break;
        continue;
      }
      std::vector<TSeries<Expr>> factors((std::size_t)k, Pi);
      factors.push_back(dPi);
      TSeries<Expr> term = zk_product<Expr>(k, factors, S);
      if (const Expr* e = term.find(beta)) rhs = rhs + *e;
    }

    TSeries<Expr> c = symbolic_counterterm({beta}, cfg.alpha, mode);
    TSeries<Expr> counter = iterate_D0_counterterm<Expr>(
        c, Pi, S, mode == HierarchyMode::A0 ? D0Mode::A0 : D0Mode::Full, d_a0);
    if (const Expr* e = counter.find(beta)) rhs = rhs + e->scaled(Rational(-1));
    if (beta.is_zero()) rhs = rhs + expr_Xi();

    out.push_back({beta, std::move(rhs)});
  }
  return out;
}

std::vector<MultiIndex> dependency_closure(const GlobalConfig& cfg,
                                           const std::vector<MultiIndex>& targets,
                                           HierarchyMode mode) {
  std::set<MultiIndex> done;
  std::vector<MultiIndex> frontier = targets;
  while (!frontier.empty()) {
    MultiIndex b = frontier.back();
    frontier.pop_back();
    if (done.count(b)) continue;
    done.insert(b);
    if (b.is_purely_polynomial()) continue;
    auto eqs = generate_hierarchy(cfg, {b}, mode);
    for (const Atom& a : eqs[0].rhs.support_atoms()) {
      if (a.kind == Atom::Kind::Pi || a.kind == Atom::Kind::D1sqPi || a.kind == Atom::Kind::C)
        if (!done.count(a.index)) frontier.push_back(a.index);
    }
  }
  std::vector<MultiIndex> v(done.begin(), done.end());
  std::sort(v.begin(), v.end(),
            [&](const MultiIndex& a, const MultiIndex& b) { return enum_less(a, b, cfg.alpha); });
  return v;
}

// ---------------------------------------------------------------------------
// rendering

namespace {

struct AtomKey {
  int cls;  // 0 = Pi, 1 = D1sqPi, 2 = c, 3 = xi
  double hom;
  std::string text;
  int order;
  friend bool operator<(const AtomKey& a, const AtomKey& b) {
    if (a.cls != b.cls) return a.cls < b.cls;
    if (a.hom != b.hom) return a.hom < b.hom;
    if (a.text != b.text) return a.text < b.text;
    return a.order < b.order;
  }
};

AtomKey key_of(const Atom& a, const Rational& alpha) {
  AtomKey k;
  k.order = a.order;
  k.text = a.index.str();
  k.hom = a.index.is_zero() ? 0.0 : a.index.homogeneity(alpha).to_double();
  switch (a.kind) {
    case Atom::Kind::Pi: k.cls = 0; break;
    case Atom::Kind::D1sqPi: k.cls = 1; break;
    case Atom::Kind::C: k.cls = 2; break;
    default: k.cls = 3; break;
  }
  return k;
}

std::string atom_text(const Atom& a, RenderFormat fmt) {
  switch (a.kind) {
    case Atom::Kind::Pi:
      return fmt == RenderFormat::Latex ? "\\Pi_{" + a.index.str() + "}" : "Pi[" + a.index.str() + "]";
    case Atom::Kind::D1sqPi:
      return fmt == RenderFormat::Latex ? "\\partial_1^2\\Pi_{" + a.index.str() + "}"
                                        : "d1^2Pi[" + a.index.str() + "]";
    case Atom::Kind::C: {
      std::string pre;
      if (a.order == 1) pre = fmt == RenderFormat::Latex ? "\\partial_{a_0}" : "da0 ";
      else if (a.order > 1)
        pre = fmt == RenderFormat::Latex
                  ? "\\partial_{a_0}^{" + std::to_string(a.order) + "}"
                  : "da0^" + std::to_string(a.order) + " ";
      return pre + (fmt == RenderFormat::Latex ? "c_{" + a.index.str() + "}"
                                               : "c[" + a.index.str() + "]");
    }
    case Atom::Kind::Xi:
      return fmt == RenderFormat::Latex ? "\\xi_\\tau" : "xi";
    case Atom::Kind::Sym:
      return a.tag;
  }
  return "?";
}

}  // namespace

std::string render_equation(const HierarchyEquation& eq, RenderFormat fmt, const Rational& alpha) {
  const AtomTable& T = AtomTable::instance();
  // canonical term order: atoms sorted by (class, homogeneity, text), terms
  // sorted lexicographically by their sorted atom keys
  struct Term {
    std::vector<std::pair<AtomKey, std::pair<Atom, int>>> atoms;
    Rational coef;
  };
  std::vector<Term> terms;
  for (const auto& [m, coef] : eq.rhs.terms()) {
    Term t;
    t.coef = coef;
    for (const auto& [id, p] : m) {
      Atom a = T.atom(id);
      t.atoms.push_back({key_of(a, alpha), {a, p}});
    }
    std::sort(t.atoms.begin(), t.atoms.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    terms.push_back(std::move(t));
  }
  std::sort(terms.begin(), terms.end(), [](const Term& x, const Term& y) {
    auto kx = [&]() {
      std::vector<AtomKey> v;
      for (const auto& a : x.atoms) v.push_back(a.first);
      return v;
    }();
    auto ky = [&]() {
      std::vector<AtomKey> v;
      for (const auto& a : y.atoms) v.push_back(a.first);
      return v;
    }();
    return kx < ky;
  });

  std::ostringstream os;
  if (fmt == RenderFormat::Latex)
    os << "(\\partial_2 - a_0\\partial_1^2)\\Pi_{" << eq.index.str() << "} &= ";
  else
    os << "(d2 - a0*d1^2) Pi[" << eq.index.str() << "] = ";
  if (terms.empty()) os << "0";
  bool first = true;
  for (const auto& t : terms) {
    Rational c = t.coef;
    bool neg = c < Rational(0);
    if (neg) c = -c;
    if (first) {
      if (neg) os << "-";
      first = false;
    } else {
      os << (neg ? " - " : " + ");
    }
    bool coef_shown = !(c == Rational(1)) || t.atoms.empty();
    if (coef_shown) os << c.str();
    bool need_star = coef_shown;
    for (const auto& [k, ap] : t.atoms) {
      if (need_star && fmt != RenderFormat::Latex) os << "*";
      if (need_star && fmt == RenderFormat::Latex) os << " ";
      os << atom_text(ap.first, fmt);
      if (ap.second > 1) os << "^" << ap.second;
      need_star = true;
    }
  }
  return os.str();
}

std::string render_hierarchy(const std::vector<HierarchyEquation>& eqs, RenderFormat fmt,
                             const Rational& alpha) {
  std::ostringstream os;
  if (fmt == RenderFormat::Json) {
    os << "[\n";
    for (std::size_t i = 0; i < eqs.size(); ++i) {
      const AtomTable& T = AtomTable::instance();
      os << "  {\"index\": \"" << eqs[i].index.str() << "\", \"terms\": [";
      bool first = true;
      for (const auto& [m, coef] : eqs[i].rhs.terms()) {
        if (!first) os << ", ";
        first = false;
        os << "{\"coef\": \"" << coef.str() << "\", \"atoms\": [";
        bool f2 = true;
        for (const auto& [id, p] : m) {
          if (!f2) os << ", ";
          f2 = false;
          Atom a = T.atom(id);
          os << "{\"atom\": \"" << atom_text(a, RenderFormat::Text) << "\", \"power\": " << p
             << "}";
        }
        os << "]}";
      }
      os << "]}" << (i + 1 < eqs.size() ? ",\n" : "\n");
    }
    os << "]\n";
    return os.str();
  }
  for (const auto& eq : eqs) {
    os << render_equation(eq, fmt, alpha);
    os << (fmt == RenderFormat::Latex ? " \\\\\n" : "\n");
  }
  return os.str();
}

// --- text format parser (round trips render_equation Text output) ----------

namespace {

struct Cursor {
  const std::string& s;
  std::size_t i = 0;
  void skip_ws() {
    while (i < s.size() && s[i] == ' ') ++i;
  }
  bool eat(const std::string& tok) {
    skip_ws();
    if (s.compare(i, tok.size(), tok) == 0) {
      i += tok.size();
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return i < s.size() ? s[i] : '\0';
  }
};

std::string parse_bracketed(Cursor& c) {
  if (!c.eat("[")) throw std::invalid_argument("parse: expected [");
  std::string idx;
  while (c.i < c.s.size() && c.s[c.i] != ']') idx += c.s[c.i++];
  ++c.i;
  return idx;
}

int parse_int(Cursor& c) {
  c.skip_ws();
  std::size_t j = c.i;
  while (j < c.s.size() && (std::isdigit((unsigned char)c.s[j]) || c.s[j] == '-')) ++j;
  int v = std::stoi(c.s.substr(c.i, j - c.i));
  c.i = j;
  return v;
}

Rational parse_rational(Cursor& c) {
  int num = parse_int(c);
  if (c.peek() == '/') {
    c.eat("/");
    int den = parse_int(c);
    return Rational(num, den);
  }
  return Rational(num);
}

Expr parse_factor(Cursor& c) {
  c.skip_ws();
  Expr e;
  if (std::isdigit((unsigned char)c.peek())) {
    e = Expr(parse_rational(c));
  } else if (c.eat("d1^2Pi")) {
    e = expr_D1sqPi(MultiIndex::parse(parse_bracketed(c)));
  } else if (c.eat("Pi")) {
    e = expr_Pi(MultiIndex::parse(parse_bracketed(c)));
  } else if (c.eat("da0^")) {
    int ord = parse_int(c);
    if (!c.eat("c")) throw std::invalid_argument("parse: expected c after da0^m");
    e = expr_C(MultiIndex::parse(parse_bracketed(c)), ord);
  } else if (c.eat("da0")) {
    if (!c.eat("c")) throw std::invalid_argument("parse: expected c after da0");
    e = expr_C(MultiIndex::parse(parse_bracketed(c)), 1);
  } else if (c.eat("c")) {
    e = expr_C(MultiIndex::parse(parse_bracketed(c)));
  } else if (c.eat("xi")) {
    e = expr_Xi();
  } else {
    throw std::invalid_argument("parse: unknown factor near '" + c.s.substr(c.i, 12) + "'");
  }
  if (c.peek() == '^') {
    c.eat("^");
    int p = parse_int(c);
    Expr r(Rational(1));
    for (int q = 0; q < p; ++q) r = r * e;
    return r;
  }
  return e;
}

Expr parse_term(Cursor& c) {
  Expr e = parse_factor(c);
  while (c.peek() == '*') {
    c.eat("*");
    e = e * parse_factor(c);
  }
  return e;
}

}  // namespace

HierarchyEquation parse_equation(const std::string& line) {
  Cursor c{line};
  if (!c.eat("(d2 - a0*d1^2) Pi")) throw std::invalid_argument("parse: bad lhs");
  HierarchyEquation eq;
  eq.index = MultiIndex::parse(parse_bracketed(c));
  if (!c.eat("=")) throw std::invalid_argument("parse: expected =");
  if (c.eat("0") && c.peek() == '\0') return eq;
  bool neg = c.eat("-");
  Expr rhs = parse_term(c);
  if (neg) rhs = rhs.scaled(Rational(-1));
  for (;;) {
    c.skip_ws();
    if (c.peek() == '+') {
      c.eat("+");
      rhs = rhs + parse_term(c);
    } else if (c.peek() == '-') {
      c.eat("-");
      rhs = rhs + parse_term(c).scaled(Rational(-1));
    } else {
      break;
    }
  }
  eq.rhs = rhs;
  return eq;
}

std::string render_h_formula(const std::vector<MultiIndex>& csupport, const Rational& alpha,
                             RenderFormat fmt) {
  std::vector<MultiIndex> sup = csupport;
  std::sort(sup.begin(), sup.end(),
            [&](const MultiIndex& a, const MultiIndex& b) { return enum_less(a, b, alpha); });
  std::ostringstream os;
  os << (fmt == RenderFormat::Latex ? "h(u) &= " : "h(u) = ");
  bool first = true;
  for (const auto& b : sup) {
    if (!counterterm_eligible(b, alpha, HierarchyMode::A0)) continue;
    if (!first) os << " + ";
    first = false;
    if (fmt == RenderFormat::Latex)
      os << "c_{" << b.str() << "}(a(u))";
    else
      os << "c[" << b.str() << "](a(u))";
    for (const auto& [k, m] : b.kfreq()) {
      if (fmt == RenderFormat::Latex) {
        os << " \\left(\\tfrac{1}{" << k << "!} a^{(" << k << ")}(u)\\right)";
        if (m > 1) os << "^{" << m << "}";
      } else {
        os << "*((1/" << k << "!)a^(" << k << ")(u))";
        if (m > 1) os << "^" << m;
      }
    }
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace mirs
