#pragma once

#include <cstdint>

#include "mirs/spectral.hpp"

namespace mirs {

/// Deterministic, portable RNG stack: splitmix64 for seeding/derivation,
/// xoshiro256++ as the generator, Box-Muller for Gaussians.  Independent of
/// libstdc++ distribution internals so runs are reproducible bit-for-bit.
struct Rng {
  std::uint64_t s[4];

  explicit Rng(std::uint64_t seed);
  std::uint64_t next_u64();
  double uniform();  // in (0,1)
  double gauss();

 private:
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// seed for ensemble member i derived from the master seed
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i);

enum class NoiseSpectrum {
  MollifiedWhite,  // flat spectrum, then psi_tau convolution
  PowerLaw,        // Fc(k) = (k1^4 + k2^2)^{(1/2)(1/2 - alpha)}, then psi_tau
};

struct NoiseConfig {
  double alpha = 0.45;
  double tau = 0.0;  // mollification scale; UV length is tau^{1/4}
  NoiseSpectrum spectrum = NoiseSpectrum::PowerLaw;
  bool ircutoff = true;  // zero the spatial-temporal mean mode
};

/// stationary centered Gaussian field with the configured spectrum,
/// convolved with psi_tau.  Requires tau^{1/4} >= 4 h1.
LatticeField sample_noise(const SpectralGrid& G, const NoiseConfig& cfg, std::uint64_t seed);

}  // namespace mirs
