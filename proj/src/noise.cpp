#include "mirs/noise.hpp"

#include <cmath>

namespace mirs {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (int i = 0; i < 4; ++i) s[i] = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
  std::uint64_t r = rotl(s[0] + s[3], 23) + s[0];
  std::uint64_t t = s[1] << 17;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = rotl(s[3], 45);
  return r;
}

double Rng::uniform() {
  // 53-bit mantissa, strictly inside (0,1)
  return (double)((next_u64() >> 11) + 1) * 0x1.0p-53 * (1.0 - 0x1.0p-53) + 0x1.0p-54;
}

double Rng::gauss() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform(), u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i) {
  std::uint64_t x = master ^ (0xa076'1d64'78bd'642full * (i + 1));
  std::uint64_t a = splitmix64(x);
  return a ^ splitmix64(x);
}

LatticeField sample_noise(const SpectralGrid& G, const NoiseConfig& cfg, std::uint64_t seed) {
  if (!(cfg.tau > 0)) throw std::invalid_argument("noise: tau must be positive");
  if (std::pow(cfg.tau, 0.25) < 4.0 * G.h1() * (1.0 - 1e-12))
    throw NumericalError("noise: grid does not resolve tau^{1/4} (need >= 4 cells)");
  double L12 = (G.n1() * G.h1()) * (G.n2() * G.h2());
  double expo = 0.5 * (0.5 - cfg.alpha);
  NoiseSpectrum sp = cfg.spectrum;
  bool ir = cfg.ircutoff;
  auto amp = [L12, expo, sp, ir](double k1, double k2) -> double {
    double l = k1 * k1 * k1 * k1 + k2 * k2;
    if (l == 0.0) return ir ? 0.0 : std::sqrt(L12);
    double fc = sp == NoiseSpectrum::PowerLaw ? std::pow(l, expo) : 1.0;
    return std::sqrt(fc * L12);
  };
  Rng rng(seed);
  LatticeField xi = G.synthesize_gaussian(amp, [&rng]() { return rng.gauss(); });
  return G.semigroup(xi, cfg.tau, 1.0);
}

}  // namespace mirs
