#include "mirs/expr.hpp"

#include <algorithm>

namespace mirs {

AtomTable& AtomTable::instance() {
  static AtomTable t;
  return t;
}

std::string AtomTable::key(const Atom& a) {
  std::string s;
  switch (a.kind) {
    case Atom::Kind::Pi: s = "P"; break;
    case Atom::Kind::D1sqPi: s = "D"; break;
    case Atom::Kind::C: s = "C"; break;
    case Atom::Kind::Xi: s = "X"; break;
    case Atom::Kind::Sym: s = "S"; break;
  }
  s += a.index.str();
  s += "|" + a.n.str();
  s += "|" + std::to_string(a.order);
  s += "|" + a.tag;
  return s;
}

int AtomTable::id(const Atom& a) {
  std::lock_guard<std::mutex> lk(mu_);
  std::string k = key(a);
  auto it = lookup_.find(k);
  if (it != lookup_.end()) return it->second;
  atoms_.push_back(a);
  int id = (int)atoms_.size() - 1;
  lookup_[k] = id;
  return id;
}

Atom AtomTable::atom(int id) const {
  std::lock_guard<std::mutex> lk(mu_);
  return atoms_.at(id);
}

void Expr::add_term(const Monomial& m, const Rational& c) {
  if (c.is_zero()) return;
  auto [it, fresh] = terms_.try_emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

Expr::Monomial Expr::mul_mono(const Monomial& a, const Monomial& b) {
  Monomial r;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first))
      r.push_back(a[i++]);
    else if (i == a.size() || b[j].first < a[i].first)
      r.push_back(b[j++]);
    else {
      r.push_back({a[i].first, a[i].second + b[j].second});
      ++i;
      ++j;
    }
  }
  return r;
}

Expr Expr::d_a0() const {
  Expr out;
  const AtomTable& T = AtomTable::instance();
  for (const auto& [m, coef] : terms_) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      Atom a = T.atom(m[i].first);
      if (a.kind != Atom::Kind::C) continue;
      if (a.index.is_zero()) continue;  // c_0 constant in a0 (centered noise)
      Atom da = a;
      da.order += 1;
      Monomial nm = m;
      if (nm[i].second == 1)
        nm.erase(nm.begin() + i);
      else
        nm[i].second -= 1;
      Monomial one{{AtomTable::instance().id(da), 1}};
      out.add_term(mul_mono(nm, one), coef * Rational(m[i].second));
    }
  }
  return out;
}

std::vector<Atom> Expr::support_atoms() const {
  std::vector<Atom> v;
  const AtomTable& T = AtomTable::instance();
  std::vector<int> seen;
  for (const auto& [m, c] : terms_)
    for (const auto& [id, p] : m)
      if (std::find(seen.begin(), seen.end(), id) == seen.end()) {
        seen.push_back(id);
        v.push_back(T.atom(id));
      }
  return v;
}

Expr expr_Pi(const MultiIndex& b) { return Expr::atom({Atom::Kind::Pi, b, {}, 0, ""}); }
Expr expr_D1sqPi(const MultiIndex& b) { return Expr::atom({Atom::Kind::D1sqPi, b, {}, 0, ""}); }
Expr expr_C(const MultiIndex& b, int order) { return Expr::atom({Atom::Kind::C, b, {}, order, ""}); }
Expr expr_Xi() { return Expr::atom({Atom::Kind::Xi, {}, {}, 0, ""}); }
Expr expr_Sym(const std::string& tag, const MultiIndex& b, Exponent2D n) {
  return Expr::atom({Atom::Kind::Sym, b, n, 0, tag});
}

}  // namespace mirs
