#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mirs/checks.hpp"

using namespace mirs;

TEST_CASE("semigroup: identity at t = 0 and single-mode damping") {
  SpectralGrid G(64, 64, 1.0 / 64, 1.0 / 64);
  LatticeField f = G.make_field();
  double k1 = G.k1(3), k2 = G.k2(5);
  for (int i2 = 0; i2 < 64; ++i2)
    for (int i1 = 0; i1 < 64; ++i1)
      f.at(i1, i2) = std::cos(k1 * i1 / 64.0 + k2 * i2 / 64.0);
  CHECK((G.semigroup(f, 0.0) - f).max_abs() == 0.0);
  double t = 0.37;
  LatticeField g = G.semigroup(f, t);
  double damp = std::exp(-t * (k1 * k1 * k1 * k1 + k2 * k2));
  LatticeField expect = f;
  expect *= damp;
  CHECK((g - expect).max_abs() <= 1e-12 * damp + 1e-300);
  CHECK_THROWS_AS(G.semigroup(f, -1.0), std::invalid_argument);
}

TEST_CASE("taylor subtraction orders follow the parabolic degree") {
  SpectralGrid G(64, 64, 1.0 / 64, 1.0 / 64);
  LatticeField f = G.make_field();
  Rng rng(3);
  for (auto& v : f.data()) v = rng.gauss();
  f = G.semigroup(f, 1e-3);
  GridPoint x{10, 20};
  // theta in (0,1): only the constant goes
  SplitField s1 = taylor_subtract(G, f, x, 0.45, 0.0);
  REQUIRE(s1.polys.size() == 1);
  CHECK(s1.polys[0].coef.size() == 1);
  CHECK(s1.polys[0].coef.count({0, 0}) == 1);
  CHECK(s1.eval(x) == 0.0);
  // theta = 2 alpha + 1 = 1.9: orders (0,0) and (1,0)
  SplitField s2 = taylor_subtract(G, f, x, 1.9, 1e-4);
  REQUIRE(s2.polys.size() == 1);
  CHECK(s2.polys[0].coef.size() == 2);
  CHECK(s2.polys[0].coef.count({1, 0}) == 1);
  // theta <= 0: identity
  SplitField s0 = taylor_subtract(G, f, x, 0.0, 0.0);
  CHECK(s0.polys.empty());
}

TEST_CASE("split fields differentiate polynomials exactly") {
  SpectralGrid G(32, 32, 0.1, 0.05);
  SplitField f;
  PolyPart p;
  p.base = {7, 9};
  p.coef[{2, 1}] = 3.0;  // 3 (x1)^2 (x2)
  f.polys.push_back(p);
  SplitField d = split_dx1sq(G, f);
  REQUIRE(d.polys.size() == 1);
  CHECK(d.polys[0].coef.at({0, 1}) == 6.0);
  SplitField h = split_heat_op(G, f, 2.0);
  // d2 -> 3 x1^2, -2 d1^2 -> -12 x2
  CHECK(h.polys[0].coef.at({2, 0}) == 3.0);
  CHECK(h.polys[0].coef.at({0, 1}) == -12.0);
}

TEST_CASE("kernel suite passes at the default probe configuration") {
  KernelCheckConfig kc;
  kc.n1 = 256;
  kc.n2 = 256;
  auto rep = check_kernel_suite(kc);
  for (const auto& r : rep.results) {
    INFO(r.name, " ", r.detail);
    CHECK(r.pass);
  }
}

TEST_CASE("field io round trip") {
  LatticeField f(32, 16, 0.25, 0.125);
  Rng rng(9);
  for (auto& v : f.data()) v = rng.gauss();
  f.save("/tmp/mirs_field_test.bin");
  LatticeField g = LatticeField::load("/tmp/mirs_field_test.bin");
  CHECK(g.n1() == 32);
  CHECK(g.n2() == 16);
  CHECK(g.h1() == 0.25);
  CHECK((f - g).max_abs() == 0.0);
  f.save_npy("/tmp/mirs_field_test.npy");
}

TEST_CASE("noise sampling: determinism, stationarity, resolution gate") {
  SpectralGrid G(64, 64, 1.0 / 64, 1.0 / 4096);
  NoiseConfig nc;
  nc.alpha = 0.45;
  nc.tau = std::pow(8.0 / 64, 4);
  LatticeField a = sample_noise(G, nc, 42);
  LatticeField b = sample_noise(G, nc, 42);
  CHECK((a - b).max_abs() == 0.0);
  LatticeField c = sample_noise(G, nc, 43);
  CHECK((a - c).max_abs() > 0.0);
  CHECK(std::abs(a.mean()) <= 1e-12);  // ircutoff zeroes the mean mode
  NoiseConfig bad = nc;
  bad.tau = std::pow(2.0 / 64, 4);
  CHECK_THROWS_AS(sample_noise(G, bad, 1), NumericalError);

  // stationarity: spatial variance profile flattens under ensemble averaging
  LatticeField var = G.make_field();
  int M = 48;
  for (int i = 0; i < M; ++i) {
    LatticeField xi = sample_noise(G, nc, derive_seed(7, (std::uint64_t)i));
    for (std::size_t j = 0; j < var.data().size(); ++j)
      var.data()[j] += xi.data()[j] * xi.data()[j] / M;
  }
  double lo = 1e300, hi = 0;
  for (double v : var.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi / lo <= 2.5);  // CLT-level flatness at M = 48
}
