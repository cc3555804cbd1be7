#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "mirs/multiindex.hpp"
#include "mirs/rational.hpp"

namespace mirs {

/// Atom of the symbolic coefficient ring: a model component, a counterterm
/// (with an a0-derivative order), the driving noise, or an opaque symbol.
struct Atom {
  enum class Kind { Pi, D1sqPi, C, Xi, Sym };
  Kind kind = Kind::Xi;
  MultiIndex index;    // Pi / D1sqPi / C / Sym payload
  Exponent2D n;        // Sym payload (e.g. the n of a pi^(n) coefficient)
  int order = 0;       // a0-derivative order for C
  std::string tag;     // Sym name

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Interned atom ids; interning keeps monomials as small int vectors.
class AtomTable {
 public:
  static AtomTable& instance();
  int id(const Atom& a);
  Atom atom(int id) const;  // by value: the table may grow concurrently

 private:
  mutable std::mutex mu_;
  std::vector<Atom> atoms_;
  std::map<std::string, int> lookup_;  // keyed by a serialized form
  static std::string key(const Atom& a);
};

/// Commutative polynomial over interned atoms with exact rational
/// coefficients.  Distinct atoms never cancel, so structural (non)vanishing
/// is decided exactly; this is the formal-symbol mode of the algebra checks.
class Expr {
 public:
  using Monomial = std::vector<std::pair<int, int>>;  // sorted (atom id, power)

  Expr() = default;
  Expr(const Rational& r) {
    if (!r.is_zero()) terms_[{}] = r;
  }
  static Expr atom(const Atom& a) {
    Expr e;
    e.terms_[{{AtomTable::instance().id(a), 1}}] = Rational(1);
    return e;
  }

  bool is_zero() const { return terms_.empty(); }
  const std::map<Monomial, Rational>& terms() const { return terms_; }

  friend Expr operator+(const Expr& a, const Expr& b) {
    Expr r = a;
    for (const auto& [m, c] : b.terms_) r.add_term(m, c);
    return r;
  }
  friend Expr operator*(const Expr& a, const Expr& b) {
    Expr r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(mul_mono(ma, mb), ca * cb);
    return r;
  }
  friend bool operator==(const Expr& a, const Expr& b) { return a.terms_ == b.terms_; }
  Expr scaled(const Rational& r) const {
    Expr e;
    if (r.is_zero()) return e;
    for (const auto& [m, c] : terms_) e.terms_[m] = c * r;
    return e;
  }

  /// derivation in a0: acts on C-atoms (raising their order); C at the empty
  /// index is a0-independent under the renormalization choice and drops out
  Expr d_a0() const;

  void add_term(const Monomial& m, const Rational& c);

  /// every atom mentioned, with multiplicity collapsed
  std::vector<Atom> support_atoms() const;

 private:
  static Monomial mul_mono(const Monomial& a, const Monomial& b);
  std::map<Monomial, Rational> terms_;
};

template <class C>
struct RingTraits;

template <>
struct RingTraits<Expr> {
  static bool is_zero(const Expr& e) { return e.is_zero(); }
  static Expr scale(const Expr& e, const Rational& r) { return e.scaled(r); }
  static Expr one() { return Expr(Rational(1)); }
};

Expr expr_Pi(const MultiIndex& b);
Expr expr_D1sqPi(const MultiIndex& b);
Expr expr_C(const MultiIndex& b, int order = 0);
Expr expr_Xi();
Expr expr_Sym(const std::string& tag, const MultiIndex& b = {}, Exponent2D n = {});

}  // namespace mirs
