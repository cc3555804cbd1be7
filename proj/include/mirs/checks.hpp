#pragma once

#include <map>
#include <set>
#include <string>

#include "mirs/model.hpp"

namespace mirs {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckResult> results;
  bool ok() const {
    for (const auto& r : results)
      if (!r.pass) return false;
    return true;
  }
  void add(const std::string& name, bool pass, const std::string& detail = "");
  void merge(const CheckReport& o) {
    results.insert(results.end(), o.results.begin(), o.results.end());
  }
};

// ---------------------------------------------------------------------------
// algebra suites (exact rational arithmetic)

/// working set for the algebra checks: populated indices with
/// 4|beta|_prec <= prec_le4, plus purely polynomial indices up to the top
/// homogeneity
IndexSet algebra_working_set(const GlobalConfig& cfg, int prec_le4);

/// a reproducible random rational GroupElement on S (population-respecting)
GroupElement<Rational> random_group_element(const IndexSet& S, std::uint64_t seed,
                                            int denom_bound = 7);
DGammaElement<Rational> random_dgamma(const GroupElement<Rational>& base, std::uint64_t seed);

/// zk-product structure: homogeneity additivity (ord18-style) and strict
/// prec-triangularity of every decomposition on the set
CheckReport check_product_structure(const IndexSet& S);

/// counterterm iteration: consumed indices strictly below the output, and
/// [beta] >= 0 for every k >= 1 contribution
CheckReport check_counterterm_structure(const IndexSet& S, const GlobalConfig& cfg);

/// dependency locality of Gamma^* (non-pp columns consume only pi at
/// strictly smaller rows) plus strict triangularity of Gamma^* - id
CheckReport check_gamma_structure(const GroupElement<Rational>& g);

/// multiplicativity Gamma^*(pi pi') = (Gamma^* pi)(Gamma^* pi') and
/// Gamma^* 1 = 1 on random series
CheckReport check_multiplicativity(const GroupElement<Rational>& g, std::uint64_t seed,
                                   int trials = 3);

/// commutation template D Gamma^* = Gamma^* D + sum_n (D pi^(n)) Gamma^* D^(n)
CheckReport check_commutation(const GroupElement<Rational>& g);

/// dGamma^* triangularity, e0-row vanishing, and the dGamma population
CheckReport check_dgamma_structure(const DGammaElement<Rational>& d);

/// group laws: identity, compose/invert round trips, associativity, and
/// matrix(compose) = matrix * matrix on random elements
CheckReport check_group_laws(const GlobalConfig& cfg, int prec_le4, int n_elements,
                             std::uint64_t seed);

/// structural population pattern of (dGamma^*)_beta rows in formal-symbol
/// mode (distinct symbols; exact rational arithmetic)
std::map<MultiIndex, std::set<MultiIndex>> dgamma_population_pattern(
    const GlobalConfig& cfg, const std::vector<MultiIndex>& rows);

/// the paper's four frozen rows for beta in {0, e1, 2e1, 3e1}
std::map<MultiIndex, std::set<MultiIndex>> figure3_reference();

CheckReport check_figure3(const GlobalConfig& cfg);

/// full algebra suite (product + counterterm + gamma + dgamma + mult + fig3)
CheckReport check_algebra_suite(const GlobalConfig& cfg, int prec_le4, std::uint64_t seed);

// ---------------------------------------------------------------------------
// kernel suite

struct KernelCheckConfig {
  int n1 = 256, n2 = 256;
  double h1 = 0.04, h2 = 0.09;
  std::vector<double> ts = {1e-3, 1e-2, 1e-1, 1e0, 1e1};
  std::uint64_t seed = 7;
};

CheckReport check_kernel_suite(const KernelCheckConfig& kc);

// ---------------------------------------------------------------------------
// model suites

/// exact pathwise shift and reflection covariance for one sample
CheckReport check_symmetries(const ModelBuilder& mb, std::uint64_t sample_seed,
                             const CountertermTable& c, double tol = 1e-9);

/// pass-2 BPHZ verification: |ensemble mean of the space-time average of
/// Pi^-_beta| <= 3 sigma for every singular beta, with c frozen
struct BphzRow {
  MultiIndex beta;
  double mean;
  double ci3;
  bool forced_zero;
  double c_value;
};
std::vector<BphzRow> bphz_verify(const ModelBuilder& mb, const CountertermTable& c, int samples,
                                 std::uint64_t seed);

/// recentering / three-point suite on independently built models
struct RecenterReport {
  double pi0_vs_eval;       // max |pi^(0) - Pi_x(y)| over indices
  double pp_binom_residual; // purely polynomial block vs binomials (exact formula)
  double fit_residual_max;
  double transitivity_residual_max;
  double fit_tolerance;     // residual budget from the fits
  bool ok = false;
};
RecenterReport check_recentering(const ModelBuilder& mb, SpectralGrid& G, std::uint64_t sample_seed,
                                 const CountertermTable& c, int n_triples, std::uint64_t point_seed);

/// directional-derivative suite: linearity, finite-difference slope,
/// the c-free identity at a secondary base point, first-order vanishing
struct DerivativeReport {
  double linearity_residual;
  double fd_slope;            // should be ~1 (error O(eps))
  double magic_residual_max;  // componentwise relative
  double vanishing_slope;     // should be >= 0.9
  bool ok = false;
};
DerivativeReport check_derivative_suite(const ModelBuilder& mb, SpectralGrid& G,
                                        std::uint64_t sample_seed, const CountertermTable& c);

/// scaling of E|Pi_beta(y)|^2 against the parabolic distance
struct ScalingRow {
  MultiIndex beta;
  double slope;      // fitted d log E|Pi|^2 / d log r
  double expected;   // 2 |beta|
};
std::vector<ScalingRow> scaling_regression(const ModelBuilder& mb,
                                           const std::vector<MultiIndex>& betas, int samples,
                                           std::uint64_t seed, double r_min, double r_max);

/// log-log slope of |c_beta| against tau^{1/4} over the given tau values
double counterterm_divergence_slope(const SimConfig& base, const MultiIndex& beta,
                                    const std::vector<double>& taus, int samples,
                                    std::uint64_t seed);

/// noise increment scaling probe: slope of log(tau * E|xi_tau(x+r e1) - xi_tau(x)|^2)
/// against log tau^{1/4} at the matched scale r = tau^{1/4}
double noise_increment_slope(const SimConfig& base, const std::vector<double>& taus, int samples,
                             std::uint64_t seed);

}  // namespace mirs
