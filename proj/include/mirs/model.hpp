#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>

#include "mirs/hierarchy.hpp"
#include "mirs/noise.hpp"
#include "mirs/structure_group.hpp"

namespace mirs {

/// Deterministic counterterm table with Monte Carlo confidence intervals.
/// Population: c_beta = 0 unless |beta| < 2 and beta(n) = 0; entries that
/// violate the reflection selection rule are forced to zero but keep their
/// measured value for the consistency report.
class CountertermTable {
 public:
  struct Entry {
    double value = 0.0;
    double ci = 0.0;  // 3 sigma of the ensemble mean
    bool forced_zero = false;
    double measured = 0.0;
    double measured_ci = 0.0;
  };

  explicit CountertermTable(Rational alpha = Rational(9, 20)) : alpha_(alpha) {}

  double value(const MultiIndex& b) const {
    auto it = m_.find(b);
    return it == m_.end() ? 0.0 : it->second.value;
  }
  const Entry* entry(const MultiIndex& b) const {
    auto it = m_.find(b);
    return it == m_.end() ? nullptr : &it->second;
  }
  void set(const MultiIndex& b, Entry e);
  const std::unordered_map<MultiIndex, Entry, MIHash>& entries() const { return m_; }
  const Rational& alpha() const { return alpha_; }

 private:
  std::unordered_map<MultiIndex, Entry, MIHash> m_;
  Rational alpha_;
};

/// One additive term of a compiled right-hand side:
///   coef * prod Pi_gamma * (d1^2 Pi_delta) * c_gamma'' * (xi | dxi)
struct PlanTerm {
  double coef = 1.0;
  std::vector<MultiIndex> pi;           // plain model factors
  std::optional<MultiIndex> d1sq;       // second-derivative factor
  std::optional<MultiIndex> cref;       // counterterm scalar factor
  bool xi = false;                      // driving noise
  int delta_slot = -1;                  // derivative plans: -1 none, 0.. = pi slot,
                                        // -2 = d1sq slot, -3 = xi -> dxi
};

/// Compiled recipe for Pi^-tilde_beta (the k=0 bare counterterm removed).
struct BuildPlan {
  MultiIndex beta;
  double hom = 0.0;
  std::vector<PlanTerm> terms;        // Pi^-tilde assembly
  std::vector<PlanTerm> delta_terms;  // Leibniz linearization (c frozen)
};

struct SimConfig {
  GlobalConfig algebra;
  int n1 = 256, n2 = 256;
  double h1 = 1.0 / 256;
  double h2 = 1.0 / 65536;  // parabolic default h2 = h1^2
  double tau = 0.0;         // default (8 h1)^4
  NoiseSpectrum spectrum = NoiseSpectrum::PowerLaw;
  bool ircutoff = true;
  std::uint64_t seed = 1;
  int samples = 200;        // pass-1 ensemble (counterterm estimation)
  int samples_pass2 = 200;  // pass-2 ensemble (verification)
  int basepoint_i1 = -1, basepoint_i2 = -1;  // default: grid center
  double t0_smooth = 0.0;   // Taylor smoothing; default (2 h1)^4
  double quad_ratio = 0.0;  // 0 = default 2^{1/4}
  int jobs = 1;
  std::vector<MultiIndex> targets;  // empty: the whole singular window

  double tau_eff() const { return tau > 0 ? tau : std::pow(8.0 * h1, 4); }
  GridPoint basepoint() const {
    return {basepoint_i1 >= 0 ? basepoint_i1 : n1 / 2, basepoint_i2 >= 0 ? basepoint_i2 : n2 / 2};
  }
  NoiseConfig noise() const {
    return {algebra.alpha.to_double(), tau_eff(), spectrum, ircutoff};
  }
  IntegrateOptions integrate() const {
    IntegrateOptions o;
    o.a0 = algebra.a0;
    o.t0_smooth = t0_smooth;
    if (quad_ratio > 0) o.quad.ratio = quad_ratio;
    return o;
  }
  void validate() const;
};

/// Per-sample model state: the centered model anchored at one base point.
struct ModelState {
  GridPoint x;
  LatticeField xi_tau;
  std::unordered_map<MultiIndex, SplitField, MIHash> Pi;
  std::unordered_map<MultiIndex, double, MIHash> removed_mean;  // of Pi^-_beta
};

/// Directional (Malliavin) derivative of a model state along dxi.
struct PerturbationState {
  LatticeField dxi;
  std::unordered_map<MultiIndex, SplitField, MIHash> dPi;
  std::unordered_map<MultiIndex, double, MIHash> removed_mean;
};

/// Estimated recentering data between two base points of one sample.
struct GammaEstimate {
  GridPoint x, y;
  GroupElement<double> gamma;  // pi^(n) family with h = y - x
  // fit diagnostics per index
  std::unordered_map<MultiIndex, double, MIHash> fit_residual;
  double pi0_vs_eval = 0.0;  // max |pi^(0)_beta - Pi_x beta(y)|
};

/// Orchestrates the inductive construction on a dependency-closed working
/// set of populated indices (full mode: a0-derivative counterterms appear as
/// e0-padded indices).
class ModelBuilder {
 public:
  explicit ModelBuilder(const SimConfig& cfg);

  const SimConfig& config() const { return cfg_; }
  const IndexSet& set() const { return S_; }
  const std::vector<BuildPlan>& plans() const { return plans_; }
  const std::vector<MultiIndex>& singular() const { return singular_; }

  SpectralGrid* make_grid() const {
    return new SpectralGrid(cfg_.n1, cfg_.n2, cfg_.h1, cfg_.h2);
  }

  /// purely polynomial component (z-based wrapped monomial field)
  SplitField polynomial_component(const MultiIndex& b, const GridPoint& x) const;

  /// assemble Pi^-tilde_beta from already-built lower levels
  LatticeField assemble_tilde(SpectralGrid& G, const ModelState& st, const BuildPlan& plan,
                              const CountertermTable& c) const;
  /// one inductive level: Pi^-_beta = tilde - c_beta, then integration
  void build_level(SpectralGrid& G, ModelState& st, const BuildPlan& plan,
                   const CountertermTable& c) const;
  /// full per-sample construction at base point x with frozen c
  ModelState build_sample(SpectralGrid& G, std::uint64_t sample_seed, const GridPoint& x,
                          const CountertermTable& c) const;
  ModelState build_from_noise(SpectralGrid& G, LatticeField xi_tau, const GridPoint& x,
                              const CountertermTable& c) const;

  /// two-pass inductive BPHZ estimation on the pass-1 ensemble
  CountertermTable estimate_counterterms(int samples, std::uint64_t seed) const;

  /// directional derivative of a built model along dxi (c frozen)
  PerturbationState directional_derivative(SpectralGrid& G, const ModelState& st,
                                           const LatticeField& dxi,
                                           const CountertermTable& c) const;

  /// least-squares extraction of pi^(n)_{xy} from two models of one sample
  GammaEstimate extract_pi_n(SpectralGrid& G, const ModelState& mx, const ModelState& my) const;

 private:
  void compile_plans();
  SimConfig cfg_;
  IndexSet S_;
  std::vector<BuildPlan> plans_;       // ascending build order
  std::vector<MultiIndex> singular_;   // |beta| < 2, not purely polynomial
};

}  // namespace mirs
