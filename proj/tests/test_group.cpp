#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mirs/checks.hpp"

using namespace mirs;

namespace {
MultiIndex P(const char* s) { return MultiIndex::parse(s); }

IndexSet work_set(int prec4 = 8) {
  GlobalConfig cfg;
  return algebra_working_set(cfg, prec4);
}
}  // namespace

TEST_CASE("gamma on coordinates: z_n column and the purely polynomial block") {
  IndexSet S = work_set();
  GroupElement<Rational> g(&S, {Rational(1, 2), Rational(-1, 3)});
  TSeries<Rational> pi10;
  pi10.add_to(P("e1"), Rational(2));
  pi10.add_to(P("0"), Rational(1, 4));
  g.set_pi({1, 0}, pi10);

  GammaMatrix<Rational> M = gamma_matrix(g);
  // (Gamma)_beta^{e_n} = pi^(n)_beta off the polynomial block
  CHECK(M.entry(P("e1"), P("e(1,0)")) == Rational(2));
  CHECK(M.entry(P("0"), P("e(1,0)")) == Rational(1, 4));
  // polynomial block: binom(n, m) h^{n-m}
  CHECK(M.entry(P("e(0,1)"), P("e(0,1)")) == Rational(1));
  CHECK(M.entry(P("e(2,0)"), P("e(1,0)")) == Rational(2) * Rational(1, 2));
  CHECK(M.entry(P("e(2,0)"), P("e(2,0)")) == Rational(1));
  CHECK(M.entry(P("e(1,1)"), P("e(1,0)")) == Rational(-1, 3));
  // row 0 only meets column 0
  for (const auto& [j, e] : M.row(S.position(P("0"))))
    CHECK(S.indices()[j] == P("0"));
  CHECK(M.entry(P("0"), P("0")) == Rational(1));
}

TEST_CASE("identity element acts as the identity") {
  IndexSet S = work_set();
  GroupElement<Rational> id(&S, {Rational(0), Rational(0)});
  Rng rng(5);
  TSeries<Rational> s;
  for (const auto& b : S.indices())
    if (rng.uniform() < 0.4) s.add_to(b, Rational((int)(rng.next_u64() % 7) - 3, 2));
  CHECK(gamma_apply(id, s) == s);
  TSeries<Rational> one = TSeries<Rational>::unit(Rational(1));
  CHECK(gamma_apply(id, one) == one);
}

TEST_CASE("structural checks on a random element") {
  IndexSet S = work_set();
  GroupElement<Rational> g = random_group_element(S, 1234);
  CHECK(check_gamma_structure(g).ok());
  CHECK(check_multiplicativity(g, 99).ok());
  CHECK(check_commutation(g).ok());
  CHECK(check_triangular(gamma_matrix(g)).ok());
}

TEST_CASE("population condition is enforced") {
  IndexSet S = work_set();
  GroupElement<Rational> g(&S, {Rational(0), Rational(0)});
  TSeries<Rational> bad;
  bad.add_to(P("0"), Rational(1));  // |(0,1)| = 2 is not below |0| = alpha
  CHECK_THROWS_AS(g.set_pi({0, 1}, bad), std::invalid_argument);
}

TEST_CASE("compose and invert") {
  IndexSet S = work_set(6);
  GroupElement<Rational> g = random_group_element(S, 77);
  GroupElement<Rational> h = random_group_element(S, 78);
  // shifts add
  GroupElement<Rational> gh = compose(g, h);
  CHECK(gh.shift()[0] == g.shift()[0] + h.shift()[0]);
  CHECK(gh.shift()[1] == g.shift()[1] + h.shift()[1]);
  // matrix of the composition is the product of the matrices
  CHECK(gamma_matrix(gh) == gamma_matrix(g).product(gamma_matrix(h)));
  // inverse composes to the identity
  GroupElement<Rational> id(&S, {Rational(0), Rational(0)});
  CHECK(gamma_matrix(compose(g, invert(g))) == gamma_matrix(id));
}

TEST_CASE("dgamma triangularity and the e1 boundary row") {
  IndexSet S = work_set();
  GroupElement<Rational> g = random_group_element(S, 31);
  DGammaElement<Rational> d = random_dgamma(g, 32);
  GammaMatrix<Rational> M = dgamma_matrix(d);
  CHECK(check_dgamma_triangular(M).ok());
  CHECK(check_dgamma_e0(M).ok());
  // the homogeneity bound is saturated at (e1, e1 + e_(1,0)):
  // |gamma| = alpha + 1 = |e1| + 1 - alpha, allowed by the dGamma bound
  //(and realized with generic inputs)
  CHECK(M.entry(P("e1"), P("e1*e(1,0)")) != Rational(0));
}

TEST_CASE("dgamma population pattern matches the frozen rows") {
  GlobalConfig cfg;
  CHECK(check_figure3(cfg).ok());
}

TEST_CASE("dgamma validation rejects out-of-window dpi10") {
  IndexSet S = work_set();
  GroupElement<Rational> g = random_group_element(S, 41);
  DGammaElement<Rational> d;
  d.base = &g;
  d.dpi10.add_to(P("e1*e2"), Rational(1));  // homogeneity 4 alpha < 2 is fine
  CHECK_NOTHROW(d.validate());
  DGammaElement<Rational> d2;
  d2.base = &g;
  d2.dpi10.add_to(P("e(1,0)"), Rational(1));  // purely polynomial: rejected
  CHECK_THROWS_AS(d2.validate(), std::invalid_argument);
}
