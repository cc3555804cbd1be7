#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mirs/checks.hpp"
#include "mirs/manifest.hpp"

using namespace mirs;

namespace {
MultiIndex P(const char* s) { return MultiIndex::parse(s); }

SimConfig quick_cfg() {
  SimConfig cfg;
  cfg.n1 = 64;
  cfg.n2 = 64;
  cfg.h1 = 1.0 / 64;
  cfg.h2 = cfg.h1 * cfg.h1;
  cfg.samples = 16;
  cfg.samples_pass2 = 16;
  cfg.jobs = 2;
  return cfg;
}
}  // namespace

TEST_CASE("builder closes over the e0-padded working set and orders it") {
  ModelBuilder mb(quick_cfg());
  CHECK(mb.set().size() == 18);
  CHECK(mb.singular().size() == 17);
  // build order respects the prec ordering within dependencies
  int last = -100;
  for (const auto& plan : mb.plans()) {
    for (const auto& t : plan.terms) {
      for (const auto& g : t.pi) CHECK(g.prec4() < plan.beta.prec4());
      if (t.cref) CHECK(t.cref->prec4() < plan.beta.prec4());
    }
    (void)last;
  }
}

TEST_CASE("truncated model: Pi_0 solves the mollified equation with c_0 = 0") {
  SimConfig cfg = quick_cfg();
  cfg.targets = {P("0")};
  ModelBuilder mb(cfg);
  CHECK(mb.set().size() == 1);
  std::unique_ptr<SpectralGrid> G(mb.make_grid());
  CountertermTable c = mb.estimate_counterterms(8, 1);
  // centered noise: c_0 vanishes to solver precision
  CHECK(std::abs(c.value(P("0"))) <= 1e-12);
  ModelState st = mb.build_sample(*G, 5, cfg.basepoint(), c);
  const SplitField& Pi0 = st.Pi.at(P("0"));
  // anchoring
  CHECK(Pi0.eval(cfg.basepoint()) == 0.0);
  // PDE: (d2 - d1^2) Pi_0 = xi_tau - mean
  LatticeField lhs = split_heat_op(*G, Pi0, 1.0).materialize();
  LatticeField rhs = st.xi_tau;
  double m = rhs.mean();
  for (auto& v : rhs.data()) v -= m;
  CHECK((lhs - rhs).max_abs() <= 1e-6 * rhs.max_abs());
}

TEST_CASE("purely polynomial components are exact monomials") {
  ModelBuilder mb(quick_cfg());
  std::unique_ptr<SpectralGrid> G(mb.make_grid());
  CountertermTable c(Rational(9, 20));
  ModelState st = mb.build_from_noise(*G, sample_noise(*G, quick_cfg().noise(), 3),
                                      quick_cfg().basepoint(), c);
  const SplitField& pp = st.Pi.at(P("e(1,0)"));
  LatticeField probe = G->make_field();
  GridPoint x = quick_cfg().basepoint();
  for (int i1 = 0; i1 < 64; i1 += 7)
    CHECK(pp.eval({i1, 5}) == probe.disp1({i1, 5}, x));
}

TEST_CASE("per-level PDE residual on the full working set") {
  SimConfig cfg = quick_cfg();
  ModelBuilder mb(cfg);
  std::unique_ptr<SpectralGrid> G(mb.make_grid());
  CountertermTable c = mb.estimate_counterterms(8, 2);
  ModelState st = mb.build_sample(*G, 11, cfg.basepoint(), c);
  for (const auto& plan : mb.plans()) {
    LatticeField tilde = mb.assemble_tilde(*G, st, plan, c);
    double cb = c.value(plan.beta);
    for (auto& v : tilde.data()) v -= cb;
    double m = st.removed_mean.at(plan.beta);
    for (auto& v : tilde.data()) v -= m;
    LatticeField lhs = split_heat_op(*G, st.Pi.at(plan.beta), 1.0).materialize();
    double scale = std::max(tilde.max_abs(), 1e-10);
    INFO(plan.beta.str());
    CHECK((lhs - tilde).max_abs() / scale <= 1e-6);
    // anchoring at the base point
    CHECK(std::abs(st.Pi.at(plan.beta).eval(cfg.basepoint())) <= 1e-12 * scale);
  }
}

TEST_CASE("determinism: same seed, same model") {
  SimConfig cfg = quick_cfg();
  ModelBuilder mb(cfg);
  std::unique_ptr<SpectralGrid> G(mb.make_grid());
  CountertermTable c = mb.estimate_counterterms(6, 3);
  ModelState a = mb.build_sample(*G, 21, cfg.basepoint(), c);
  ModelState b = mb.build_sample(*G, 21, cfg.basepoint(), c);
  for (const auto& bb : mb.set().indices())
    CHECK((a.Pi.at(bb).materialize() - b.Pi.at(bb).materialize()).max_abs() == 0.0);
}

TEST_CASE("pathwise shift and reflection covariance") {
  SimConfig cfg = quick_cfg();
  ModelBuilder mb(cfg);
  CountertermTable c = mb.estimate_counterterms(6, 4);
  auto rep = check_symmetries(mb, 31, c, 1e-9);
  for (const auto& r : rep.results) {
    INFO(r.name, " ", r.detail);
    CHECK(r.pass);
  }
}

TEST_CASE("two-pass protocol: pass-2 means are within three sigma") {
  SimConfig cfg = quick_cfg();
  cfg.samples = 32;
  ModelBuilder mb(cfg);
  CountertermTable c = mb.estimate_counterterms(cfg.samples, 7);
  auto rows = bphz_verify(mb, c, 32, 1234567);
  int fails = 0;
  for (const auto& r : rows)
    if (std::abs(r.mean) > r.ci3) ++fails;
  // 17 singular indices at 3 sigma: more than two excursions flags a bias
  CHECK(fails <= 2);
}

TEST_CASE("counterterm table enforces population") {
  CountertermTable c(Rational(9, 20));
  CountertermTable::Entry e;
  e.value = 1.0;
  CHECK_THROWS_AS(c.set(P("e2*e(1,0)"), e), std::invalid_argument);  // carries an n
  CHECK_NOTHROW(c.set(P("e0*e1"), e));
}

TEST_CASE("recentering and transitivity at desk scale") {
  SimConfig cfg = quick_cfg();
  ModelBuilder mb(cfg);
  std::unique_ptr<SpectralGrid> G(mb.make_grid());
  CountertermTable c = mb.estimate_counterterms(12, 8);
  RecenterReport rr = check_recentering(mb, *G, 55, c, 4, 99);
  INFO("pi0 ", rr.pi0_vs_eval, " fit ", rr.fit_residual_max, " trans ",
       rr.transitivity_residual_max, " pp ", rr.pp_binom_residual);
  CHECK(rr.ok);
}

TEST_CASE("derivative suite: linearity, finite differences, c-free identity") {
  SimConfig cfg = quick_cfg();
  ModelBuilder mb(cfg);
  std::unique_ptr<SpectralGrid> G(mb.make_grid());
  CountertermTable c = mb.estimate_counterterms(12, 9);
  DerivativeReport dr = check_derivative_suite(mb, *G, 77, c);
  INFO("lin ", dr.linearity_residual, " fd ", dr.fd_slope, " magic ", dr.magic_residual_max,
       " vanish ", dr.vanishing_slope);
  CHECK(dr.linearity_residual <= 1e-10);
  CHECK(std::abs(dr.fd_slope - 1.0) <= 0.25);
  CHECK(dr.magic_residual_max <= 1e-8);
  CHECK(dr.vanishing_slope >= 0.9);
}

TEST_CASE("config parsing rejects unknown keys") {
  CHECK_THROWS_AS(sim_config_from_kv({{"alhpa", "0.45"}}), ConfigError);
  SimConfig cfg = sim_config_from_kv({{"alpha", "0.45"}, {"n1", "64"}, {"n2", "64"},
                                      {"h1", "0.015625"}, {"h2", "0.000244140625"}});
  CHECK(cfg.algebra.alpha == Rational(9, 20));
}
