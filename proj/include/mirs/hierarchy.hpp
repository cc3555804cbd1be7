#pragma once

#include <string>
#include <vector>

#include "mirs/expr.hpp"
#include "mirs/index_set.hpp"
#include "mirs/series.hpp"

namespace mirs {

enum class HierarchyMode {
  A0,    // a0-parametrized: beta(0)=0, counterterms carry d/da0 powers
  Full,  // z_0 retained; a0-derivatives appear as e0-shifted counterterms
};

/// One equation (d2 - a0 d1^2) Pi_beta = rhs of the renormalized hierarchy.
struct HierarchyEquation {
  MultiIndex index;
  Expr rhs;
};

/// indices eligible to carry a counterterm: |gamma| < 2, k-only, and in A0
/// mode also gamma(0) = 0
bool counterterm_eligible(const MultiIndex& g, const Rational& alpha, HierarchyMode mode);

/// symbolic c series (all eligible indices within sound reach bounds for
/// the targets)
TSeries<Expr> symbolic_counterterm(const std::vector<MultiIndex>& targets, const Rational& alpha,
                                   HierarchyMode mode);

/// rhs = sum_k z_k Pi^k d1^2 Pi - sum_l (1/l!) Pi^l (D0)^l c + xi at beta=0,
/// expanded componentwise over symbolic model atoms
std::vector<HierarchyEquation> generate_hierarchy(const GlobalConfig& cfg,
                                                  const std::vector<MultiIndex>& indices,
                                                  HierarchyMode mode = HierarchyMode::A0);

/// smallest dependency-closed index family containing the targets: every
/// Pi / d1^2 Pi / c atom of every equation is itself in the family
std::vector<MultiIndex> dependency_closure(const GlobalConfig& cfg,
                                           const std::vector<MultiIndex>& targets,
                                           HierarchyMode mode = HierarchyMode::Full);

enum class RenderFormat { Text, Latex, Json };

std::string render_equation(const HierarchyEquation& eq, RenderFormat fmt, const Rational& alpha);
std::string render_hierarchy(const std::vector<HierarchyEquation>& eqs, RenderFormat fmt,
                             const Rational& alpha);

/// parse the text rendering back into an equation (round-trip check support)
HierarchyEquation parse_equation(const std::string& line);

/// the counterterm function h(u) = sum_beta c_beta(a(u)) prod_k ((1/k!) a^(k)(u))^{beta(k)}
/// over the singular k-only indices; rendered in the requested format
std::string render_h_formula(const std::vector<MultiIndex>& csupport, const Rational& alpha,
                             RenderFormat fmt);

}  // namespace mirs
