#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mirs/rational.hpp"

namespace mirs {

/// Spatial/temporal derivative exponent n = (n1, n2), parabolic degree n1 + 2*n2.
struct Exponent2D {
  int n1 = 0;
  int n2 = 0;

  int pdeg() const { return n1 + 2 * n2; }
  bool is_zero() const { return n1 == 0 && n2 == 0; }

  friend bool operator==(const Exponent2D&, const Exponent2D&) = default;
  // ordered by parabolic degree, then n1; the canonical generator order
  friend bool operator<(const Exponent2D& a, const Exponent2D& b) {
    if (a.pdeg() != b.pdeg()) return a.pdeg() < b.pdeg();
    return a.n1 < b.n1;
  }
  friend Exponent2D operator+(const Exponent2D& a, const Exponent2D& b) {
    return {a.n1 + b.n1, a.n2 + b.n2};
  }
  /// componentwise m <= n
  bool leq(const Exponent2D& o) const { return n1 <= o.n1 && n2 <= o.n2; }

  std::string str() const { return "(" + std::to_string(n1) + "," + std::to_string(n2) + ")"; }
};

/// binom(n, m) componentwise, zero unless m <= n
Rational binom2(const Exponent2D& n, const Exponent2D& m);

enum class IndexClass { PurelyPolynomial, PopulatedNonPolynomial, NotPopulated };

/// Sparse multi-index beta over the generators {z_k} and {z_n}.
/// Both maps are kept sorted with strictly positive multiplicities.
class MultiIndex {
 public:
  using KEntry = std::pair<int, int>;          // (k, multiplicity)
  using NEntry = std::pair<Exponent2D, int>;   // (n, multiplicity)

  MultiIndex() = default;

  static MultiIndex unit_k(int k, int mult = 1);
  static MultiIndex unit_n(Exponent2D n, int mult = 1);

  const std::vector<KEntry>& kfreq() const { return kf_; }
  const std::vector<NEntry>& nfreq() const { return nf_; }

  int k_mult(int k) const;
  int n_mult(const Exponent2D& n) const;
  int beta0() const { return k_mult(0); }

  bool is_zero() const { return kf_.empty() && nf_.empty(); }
  int total_mult() const;
  int max_k() const { return kf_.empty() ? -1 : kf_.back().first; }

  /// [beta] = sum k*beta(k) - sum beta(n)
  int noise_hom() const;
  /// |beta|_p = sum |n| beta(n)
  int pnorm() const;
  /// 4*|beta|_prec = 4[beta] + 2|beta|_p + beta(0); exact quarter-integer ordinal
  int prec4() const { return 4 * noise_hom() + 2 * pnorm() + beta0(); }
  /// |beta| = alpha(1+[beta]) + |beta|_p
  Rational homogeneity(const Rational& alpha) const {
    return alpha * Rational(1 + noise_hom()) + Rational(pnorm());
  }

  IndexClass classify() const;
  bool is_purely_polynomial() const { return classify() == IndexClass::PurelyPolynomial; }
  bool is_populated() const { return classify() != IndexClass::NotPopulated; }

  MultiIndex plus(const MultiIndex& o) const;
  /// componentwise difference; nullopt if any multiplicity would go negative
  std::optional<MultiIndex> minus(const MultiIndex& o) const;
  bool contains(const MultiIndex& o) const { return minus(o).has_value(); }

  /// visits every componentwise sub-index (including 0 and *this)
  void for_each_subindex(const std::function<void(const MultiIndex&)>& f) const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  /// plain structural order (for std::map keys); not the enumeration order
  friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
    if (a.kf_ != b.kf_) return a.kf_ < b.kf_;
    return lex_n_less(a.nf_, b.nf_);
  }

  std::size_t hash() const;

  /// text format: e1^2*e(1,0), or "0" for the empty index
  std::string str() const;
  static MultiIndex parse(const std::string& s);

 private:
  static bool lex_n_less(const std::vector<NEntry>& a, const std::vector<NEntry>& b);
  void set_k(int k, int mult);
  void set_n(Exponent2D n, int mult);

  std::vector<KEntry> kf_;
  std::vector<NEntry> nf_;
};

struct MIHash {
  std::size_t operator()(const MultiIndex& b) const { return b.hash(); }
};

/// Enumeration-order comparison: homogeneity, then prec ordinal, then
/// ascending lexicographic on the k-frequency vector, then on n-frequencies.
/// Reproduces the row order of the singular-index table.
bool enum_less(const MultiIndex& a, const MultiIndex& b, const Rational& alpha);

}  // namespace mirs
