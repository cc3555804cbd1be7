#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "mirs/lattice.hpp"

namespace mirs {

/// Quadrature for the t-integral behind the heat-operator inverse: geometric
/// midpoint rule in log t with analytic head and tail.  W(lambda) approximates
/// integral_0^inf exp(-lambda t) dt = 1/lambda; the subdivision ratio is the
/// self-convergence knob.
struct TQuadrature {
  double ratio = std::pow(2.0, 0.25);
  double t_min = 1e-12;
  double t_max = 1e12;

  double weight(double lambda) const;
};

/// FFT workspace bound to one grid geometry.  Not thread-safe; use one
/// instance per worker.
class SpectralGrid {
 public:
  SpectralGrid(int n1, int n2, double h1, double h2);
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double h1() const { return h1_; }
  double h2() const { return h2_; }
  LatticeField make_field() const { return LatticeField(n1_, n2_, h1_, h2_); }
  bool matches(const LatticeField& f) const {
    return f.n1() == n1_ && f.n2() == n2_ && f.h1() == h1_ && f.h2() == h2_;
  }

  /// apply a Fourier multiplier m(k1, k2); m must satisfy m(-k) = conj(m(k))
  LatticeField apply_multiplier(const LatticeField& f,
                                const std::function<std::complex<double>(double, double)>& m) const;

  /// semigroup exp(-t (a0^2 k1^4 + k2^2)); the anisotropic mollifier
  LatticeField semigroup(const LatticeField& f, double t, double a0 = 1.0) const;
  /// kernel psi_t as a field (inverse transform of the multiplier)
  LatticeField kernel(double t, double a0 = 1.0, int dn1 = 0, int dn2 = 0) const;

  LatticeField dx1(const LatticeField& f) const;
  LatticeField dx1sq(const LatticeField& f) const;
  LatticeField dx2(const LatticeField& f) const;
  /// (d2 - a0 d1^2) f, spectral
  LatticeField heat_op(const LatticeField& f, double a0) const;

  /// mean-zero solve of (d2 - a0 d1^2) u = f - mean(f) through the kernel
  /// representation; quad controls the t-quadrature
  LatticeField solve_heat(const LatticeField& f, double a0, const TQuadrature& quad) const;

  /// synthesize a real field from a Hermitian spectrum functional:
  /// amp(k1,k2) is the per-mode standard deviation, g the unit Gaussian
  /// draws supplied in a fixed deterministic mode order
  LatticeField synthesize_gaussian(const std::function<double(double, double)>& amp,
                                   const std::function<double()>& gauss) const;

  double k1(int j1) const;
  double k2(int j2) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n1_, n2_;
  double h1_, h2_;
};

/// smoothed Taylor subtraction: f minus its parabolic Taylor polynomial of
/// degree < theta at x.  The constant coefficient is the exact field value
/// (anchoring); higher coefficients are read from the t0-smoothed field.
SplitField taylor_subtract(const SpectralGrid& G, const LatticeField& f, const GridPoint& x,
                           double theta, double t0, double a0 = 1.0);

struct IntegrateOptions {
  double a0 = 1.0;
  double t0_smooth = 0.0;  // smoothing scale for Taylor derivatives; default (2 h1)^4
  TQuadrature quad;
};

struct IntegrateDiagnostics {
  double removed_mean = 0.0;
};

/// Pi_beta from Pi^-_beta: mean-mode removal (the torus stand-in for the
/// whole-space decay normalization), kernel-representation solve of
/// (d2 - a0 d1^2), then Taylor subtraction of degree < hom at x
SplitField integrate_model(const SpectralGrid& G, const LatticeField& pi_minus, double hom,
                           const GridPoint& x, const IntegrateOptions& opt,
                           IntegrateDiagnostics* diag = nullptr);

/// split-aware derivatives: spectral on the periodic slot, exact on the
/// polynomial slot
SplitField split_dx1(const SpectralGrid& G, const SplitField& f);
SplitField split_dx1sq(const SpectralGrid& G, const SplitField& f);
SplitField split_dx2(const SpectralGrid& G, const SplitField& f);
SplitField split_heat_op(const SpectralGrid& G, const SplitField& f, double a0);

/// max over the t grid of lhs/rhs for the kernel moment bound
///   integral |d^n psi_t(z-y)| (t^{1/4} + |y-z| + |z-x|)^theta dz
///   <= C t^{-|n|/4} (t^{1/4} + |y-x|)^theta        (x = y = 0 probe)
struct MomentProbeRow {
  double t;
  double lhs;
  double rhs;
  double ratio;
};
std::vector<MomentProbeRow> moment_bound_probe(const SpectralGrid& G, Exponent2D n,
                                               const std::vector<double>& ts, double theta,
                                               double a0 = 1.0);

}  // namespace mirs
