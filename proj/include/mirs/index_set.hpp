#pragma once

#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mirs/multiindex.hpp"

namespace mirs {

struct FilterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Global algebra parameters.
struct GlobalConfig {
  Rational alpha{9, 20};   // in (1/4, 1/2), kept away from the endpoints
  double a0 = 1.0;         // elliptic coefficient, Re a0 > 0
  Rational hom_cutoff{2};  // singularity threshold |beta| < 2

  void validate() const {
    if (!(alpha > Rational(1, 4) && alpha < Rational(1, 2)))
      throw std::invalid_argument("alpha must lie in (1/4, 1/2)");
    if (alpha.to_double() < 0.26 || alpha.to_double() > 0.49)
      throw std::invalid_argument("alpha too close to an endpoint of (1/4, 1/2)");
    if (!(a0 > 0)) throw std::invalid_argument("a0 must have positive real part");
  }
};

struct EnumFilter {
  bool populated = true;     // restrict to populated indices
  bool exclude_pp = false;   // drop purely polynomial indices
  bool zero_k0 = false;      // restrict to beta(0) = 0
  std::optional<Rational> hom_lt;  // |beta| < hom_lt
  std::optional<int> prec_le4;     // 4|beta|_prec <= prec_le4 (quarter units)
};

/// Complete, duplicate-free enumeration under a coercive cutoff, sorted by
/// (homogeneity, prec ordinal, lex).  Throws FilterError for non-coercive
/// filter combinations (hom_lt alone without zero_k0 is not coercive).
std::vector<MultiIndex> enumerate_indices(const GlobalConfig& cfg, const EnumFilter& f);

/// An explicit, ordered working index set; the truncation window for all
/// series operations.  Coefficients outside the set are implicitly zero.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::vector<MultiIndex> indices, Rational alpha);

  const std::vector<MultiIndex>& indices() const { return idx_; }
  const Rational& alpha() const { return alpha_; }
  std::size_t size() const { return idx_.size(); }
  bool contains(const MultiIndex& b) const { return pos_.count(b) > 0; }
  int position(const MultiIndex& b) const;

  /// membership in the componentwise sub-index closure of the set; the sound
  /// pruning window for intermediate products
  bool in_sub_closure(const MultiIndex& b) const { return sub_.count(b) > 0; }

  /// asserts that every homogeneity in the set stays away from the integers
  /// (the non-integrality required by the Schauder/Liouville steps)
  void check_non_integrality(double eps = 1e-9) const;

 private:
  std::vector<MultiIndex> idx_;
  std::unordered_map<MultiIndex, int, MIHash> pos_;
  std::unordered_set<MultiIndex, MIHash> sub_;
  Rational alpha_{9, 20};
};

}  // namespace mirs
