#include "mirs/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace mirs {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

double TQuadrature::weight(double lambda) const {
  if (!(lambda > 0)) throw std::invalid_argument("TQuadrature: lambda must be positive");
  // analytic head over [0, a] and tail over [b, inf); geometric midpoint
  // rule in log t in between, with per-lambda effective limits so the work
  // stays bounded for very stiff modes
  double a = std::max(t_min, 1e-9 / lambda);
  double b = std::min(t_max, 5e1 / lambda);
  double head = (1.0 - std::exp(-lambda * a)) / lambda;
  double tail = std::exp(-lambda * b) / lambda;
  if (b <= a) return head + tail;
  double lstep = std::log(ratio);
  int m = (int)std::ceil(std::log(b / a) / lstep);
  double step = std::log(b / a) / m;  // snap so the range is covered exactly
  double sum = 0.0;
  for (int j = 0; j < m; ++j) {
    double t = a * std::exp((j + 0.5) * step);
    sum += t * std::exp(-lambda * t);
  }
  return head + sum * step + tail;
}

struct SpectralGrid::Impl {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  int n1, n2, nc;

  Impl(int n1_, int n2_) : n1(n1_), n2(n2_), nc(n1_ / 2 + 1) {
    real = fftw_alloc_real(std::size_t(n1) * n2);
    spec = fftw_alloc_complex(std::size_t(nc) * n2);
    std::lock_guard<std::mutex> lk(planner_mutex());
    fwd = fftw_plan_dft_r2c_2d(n2, n1, real, spec, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_2d(n2, n1, spec, real, FFTW_ESTIMATE);
  }
  ~Impl() {
    std::lock_guard<std::mutex> lk(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(spec);
  }
};

SpectralGrid::SpectralGrid(int n1, int n2, double h1, double h2)
    : impl_(new Impl(n1, n2)), n1_(n1), n2_(n2), h1_(h1), h2_(h2) {
  LatticeField probe(n1, n2, h1, h2);  // validates powers of two and spacings
}

SpectralGrid::~SpectralGrid() = default;

double SpectralGrid::k1(int j1) const {
  return 2.0 * std::numbers::pi * j1 / (n1_ * h1_);
}
double SpectralGrid::k2(int j2) const {
  int j = j2 <= n2_ / 2 ? j2 : j2 - n2_;
  return 2.0 * std::numbers::pi * j / (n2_ * h2_);
}

LatticeField SpectralGrid::apply_multiplier(
    const LatticeField& f, const std::function<std::complex<double>(double, double)>& m) const {
  if (!matches(f)) throw std::invalid_argument("apply_multiplier: grid mismatch");
  auto& I = *impl_;
  std::copy(f.data().begin(), f.data().end(), I.real);
  fftw_execute(I.fwd);
  for (int j2 = 0; j2 < n2_; ++j2)
    for (int j1 = 0; j1 < I.nc; ++j1) {
      std::complex<double> mv = m(k1(j1), k2(j2));
      auto& c = I.spec[std::size_t(j2) * I.nc + j1];
      std::complex<double> v(c[0], c[1]);
      v *= mv;
      c[0] = v.real();
      c[1] = v.imag();
    }
  fftw_execute(I.bwd);
  LatticeField out = make_field();
  double scale = 1.0 / (double(n1_) * n2_);
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] = I.real[i] * scale;
  return out;
}

LatticeField SpectralGrid::semigroup(const LatticeField& f, double t, double a0) const {
  if (t < 0) throw std::invalid_argument("semigroup: negative time");
  if (t == 0) return f;
  return apply_multiplier(f, [t, a0](double k1, double k2) {
    double l = a0 * a0 * k1 * k1 * k1 * k1 + k2 * k2;
    return std::complex<double>(std::exp(-t * l), 0.0);
  });
}

LatticeField SpectralGrid::kernel(double t, double a0, int dn1, int dn2) const {
  auto& I = *impl_;
  for (int j2 = 0; j2 < n2_; ++j2)
    for (int j1 = 0; j1 < I.nc; ++j1) {
      double kk1 = k1(j1), kk2 = k2(j2);
      double l = a0 * a0 * kk1 * kk1 * kk1 * kk1 + kk2 * kk2;
      std::complex<double> v = std::exp(-t * l);
      for (int q = 0; q < dn1; ++q) v *= std::complex<double>(0.0, kk1);
      for (int q = 0; q < dn2; ++q) v *= std::complex<double>(0.0, kk2);
      auto& c = I.spec[std::size_t(j2) * I.nc + j1];
      c[0] = v.real();
      c[1] = v.imag();
    }
  fftw_execute(I.bwd);
  LatticeField out = make_field();
  double scale = 1.0 / (n1_ * h1_ * n2_ * h2_);
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] = I.real[i] * scale;
  return out;
}

LatticeField SpectralGrid::dx1(const LatticeField& f) const {
  return apply_multiplier(f, [](double k1, double) { return std::complex<double>(0.0, k1); });
}
LatticeField SpectralGrid::dx1sq(const LatticeField& f) const {
  return apply_multiplier(f, [](double k1, double) { return std::complex<double>(-k1 * k1, 0.0); });
}
LatticeField SpectralGrid::dx2(const LatticeField& f) const {
  return apply_multiplier(f, [](double, double k2) { return std::complex<double>(0.0, k2); });
}
LatticeField SpectralGrid::heat_op(const LatticeField& f, double a0) const {
  return apply_multiplier(
      f, [a0](double k1, double k2) { return std::complex<double>(a0 * k1 * k1, k2); });
}

LatticeField SpectralGrid::solve_heat(const LatticeField& f, double a0,
                                      const TQuadrature& quad) const {
  // Pi = -int_0^inf dt (d2 + a0 d1^2) psi_t * f; per mode the integral is
  // W(lambda) with lambda = a0^2 k1^4 + k2^2, so the multiplier is
  // -(i k2 - a0 k1^2) W(lambda); the zero mode is removed
  return apply_multiplier(f, [a0, &quad](double k1, double k2) -> std::complex<double> {
    double l = a0 * a0 * k1 * k1 * k1 * k1 + k2 * k2;
    if (l == 0.0) return {0.0, 0.0};
    double w = quad.weight(l);
    return std::complex<double>(a0 * k1 * k1, -k2) * w;
  });
}

LatticeField SpectralGrid::synthesize_gaussian(const std::function<double(double, double)>& amp,
                                               const std::function<double()>& gauss) const {
  auto& I = *impl_;
  // deterministic mode order: j2 rows, then j1 columns of the half spectrum
  for (int j2 = 0; j2 < n2_; ++j2)
    for (int j1 = 0; j1 < I.nc; ++j1) {
      auto& c = I.spec[std::size_t(j2) * I.nc + j1];
      bool self_conj = (j1 == 0 || j1 == n1_ / 2) && (j2 == 0 || j2 == n2_ / 2);
      double a = amp(k1(j1), k2(j2));
      if (self_conj) {
        c[0] = a * gauss();
        c[1] = 0.0;
        gauss();  // keep the draw count per mode fixed
      } else {
        const double inv_sqrt2 = 0.7071067811865475244;
        c[0] = a * inv_sqrt2 * gauss();
        c[1] = a * inv_sqrt2 * gauss();
      }
    }
  // columns j1 = 0 and j1 = n1/2 must be Hermitian within themselves
  for (int j1c : {0, n1_ / 2}) {
    for (int j2 = 1; j2 < n2_ / 2; ++j2) {
      auto& c = I.spec[std::size_t(j2) * I.nc + j1c];
      auto& cc = I.spec[std::size_t(n2_ - j2) * I.nc + j1c];
      cc[0] = c[0];
      cc[1] = -c[1];
    }
  }
  fftw_execute(I.bwd);
  LatticeField out = make_field();
  double scale = 1.0 / (n1_ * h1_ * n2_ * h2_);
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] = I.real[i] * scale;
  return out;
}

SplitField taylor_subtract(const SpectralGrid& G, const LatticeField& f, const GridPoint& x,
                           double theta, double t0, double a0) {
  SplitField out;
  out.periodic = f;
  if (theta <= 0) return out;
  PolyPart poly;
  poly.base = x;
  poly.coef[{0, 0}] = -f.at(x);
  if (theta > 1) {
    LatticeField sm = t0 > 0 ? G.semigroup(f, t0, a0) : f;
    for (int d = 1; d < theta; ++d) {
      for (int n1 = 0; n1 <= d; ++n1) {
        if ((d - n1) % 2 != 0) continue;
        int n2 = (d - n1) / 2;
        LatticeField der = sm;
        for (int q = 0; q < n1; ++q) der = G.dx1(der);
        for (int q = 0; q < n2; ++q) der = G.dx2(der);
        double fact = 1.0;
        for (int q = 2; q <= n1; ++q) fact *= q;
        for (int q = 2; q <= n2; ++q) fact *= q;
        poly.coef[{n1, n2}] = -der.at(x) / fact;
      }
    }
  }
  out.add_poly(poly);
  return out;
}

SplitField integrate_model(const SpectralGrid& G, const LatticeField& pi_minus, double hom,
                           const GridPoint& x, const IntegrateOptions& opt,
                           IntegrateDiagnostics* diag) {
  double m = pi_minus.mean();
  if (diag) diag->removed_mean = m;
  LatticeField A = G.solve_heat(pi_minus, opt.a0, opt.quad);
  double t0 = opt.t0_smooth > 0 ? opt.t0_smooth : std::pow(2.0 * G.h1(), 4);
  return taylor_subtract(G, A, x, hom, t0, opt.a0);
}

SplitField split_dx1(const SpectralGrid& G, const SplitField& f) {
  SplitField out;
  if (f.periodic.n1()) out.periodic = G.dx1(f.periodic);
  for (const auto& q : f.polys) out.add_poly(q.derivative(1, 0));
  return out;
}

SplitField split_dx1sq(const SpectralGrid& G, const SplitField& f) {
  SplitField out;
  if (f.periodic.n1()) out.periodic = G.dx1sq(f.periodic);
  for (const auto& q : f.polys) out.add_poly(q.derivative(2, 0));
  return out;
}

SplitField split_dx2(const SpectralGrid& G, const SplitField& f) {
  SplitField out;
  if (f.periodic.n1()) out.periodic = G.dx2(f.periodic);
  for (const auto& q : f.polys) out.add_poly(q.derivative(0, 1));
  return out;
}

SplitField split_heat_op(const SpectralGrid& G, const SplitField& f, double a0) {
  SplitField out;
  if (f.periodic.n1()) out.periodic = G.heat_op(f.periodic, a0);
  for (const auto& q : f.polys) {
    out.add_poly(q.derivative(0, 1));
    out.add_poly(q.derivative(2, 0).scaled(-a0));
  }
  return out;
}

std::vector<MomentProbeRow> moment_bound_probe(const SpectralGrid& G, Exponent2D n,
                                               const std::vector<double>& ts, double theta,
                                               double a0) {
  if (theta <= -3.0)
    throw std::invalid_argument("moment probe: theta must exceed -3");
  std::vector<MomentProbeRow> out;
  GridPoint origin{0, 0};
  for (double t : ts) {
    if (!(t > 0)) throw std::invalid_argument("moment probe: t must be positive");
    LatticeField psi = G.kernel(t, a0, n.n1, n.n2);
    double q = std::pow(t, 0.25);
    double lhs = 0.0;
    for (int i2 = 0; i2 < G.n2(); ++i2)
      for (int i1 = 0; i1 < G.n1(); ++i1) {
        double dist = psi.pdist({i1, i2}, origin);
        lhs += std::abs(psi.at(i1, i2)) * std::pow(q + 2.0 * dist, theta);
      }
    lhs *= G.h1() * G.h2();
    double rhs = std::pow(q, -n.pdeg()) * std::pow(q, theta);
    out.push_back({t, lhs, rhs, lhs / rhs});
  }
  return out;
}

}  // namespace mirs
