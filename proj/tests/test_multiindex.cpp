#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mirs/index_set.hpp"

using namespace mirs;

namespace {
MultiIndex P(const char* s) { return MultiIndex::parse(s); }
}  // namespace

TEST_CASE("noise homogeneity is the signed generator count") {
  CHECK(P("e(1,0)").noise_hom() == -1);
  CHECK(P("e2").noise_hom() == 2);
  CHECK(P("e1*e2*e(1,0)").noise_hom() == 2);
  CHECK(P("0").noise_hom() == 0);
}

TEST_CASE("homogeneity values match the singular table rows") {
  Rational a(9, 20);  // 0.45
  CHECK(P("0").homogeneity(a) == a);
  CHECK(P("e1").homogeneity(a) == a * Rational(2));
  CHECK(P("e1^2*e(1,0)").homogeneity(a) == a * Rational(2) + Rational(1));
  // |e_n| = |n|
  CHECK(P("e(1,0)").homogeneity(a) == Rational(1));
  CHECK(P("e(0,1)").homogeneity(a) == Rational(2));
  CHECK(P("e(2,1)").homogeneity(a) == Rational(4));
}

TEST_CASE("prec ordinal quarter-units") {
  CHECK(P("e(1,0)").prec4() == -2);  // -1 + 1/2 in quarters
  CHECK(P("e0").prec4() == 1);
  CHECK(P("0").prec4() == 0);
  // lower bound -1/2 on arbitrary populated indices
  EnumFilter f;
  f.prec_le4 = 12;
  GlobalConfig cfg;
  for (const auto& b : enumerate_indices(cfg, f)) {
    CHECK(b.prec4() >= -2);
    if (!b.is_purely_polynomial()) {
      CHECK(b.prec4() >= 0);
      if (b.prec4() == 0) CHECK(b.is_zero());
    }
  }
}

TEST_CASE("classification") {
  CHECK(P("e(0,1)").classify() == IndexClass::PurelyPolynomial);
  CHECK(P("e1*e(1,0)").classify() == IndexClass::PopulatedNonPolynomial);
  CHECK(P("e(1,0)*e(0,1)").classify() == IndexClass::NotPopulated);
  CHECK(P("0").classify() == IndexClass::PopulatedNonPolynomial);
}

TEST_CASE("gradings are additive") {
  Rational a(9, 20);
  auto bs = std::vector<MultiIndex>{P("0"), P("e1"), P("e0^2*e1"), P("e2*e(1,0)"), P("e(2,1)")};
  for (const auto& x : bs)
    for (const auto& y : bs) {
      MultiIndex s = x.plus(y);
      CHECK(s.noise_hom() == x.noise_hom() + y.noise_hom());
      CHECK(s.prec4() == x.prec4() + y.prec4());
      // |.| - alpha is additive
      CHECK(s.homogeneity(a) - a == (x.homogeneity(a) - a) + (y.homogeneity(a) - a));
    }
}

TEST_CASE("adding a populated non-polynomial index never lowers the ordinal") {
  GlobalConfig cfg;
  EnumFilter f;
  f.prec_le4 = 10;
  auto all = enumerate_indices(cfg, f);
  for (const auto& x : all)
    for (const auto& y : all) {
      if (y.is_purely_polynomial()) continue;
      CHECK(x.plus(y).prec4() >= x.prec4());
    }
}

TEST_CASE("text format round trips") {
  for (const char* s : {"0", "e1", "e0^3", "e1^2*e(1,0)", "e2*e(1,0)^2", "e(3,2)"}) {
    CHECK(MultiIndex::parse(s).str() == s);
  }
}

TEST_CASE("enumeration reproduces the ten singular indices in table order") {
  GlobalConfig cfg;  // alpha = 9/20
  EnumFilter f;
  f.zero_k0 = true;
  f.exclude_pp = true;
  f.hom_lt = Rational(2);
  auto v = enumerate_indices(cfg, f);
  std::vector<std::string> got;
  for (const auto& b : v) got.push_back(b.str());
  std::vector<std::string> want = {"0",  "e1",    "e2",    "e1^2",       "e1*e(1,0)",
                                   "e3", "e1*e2", "e1^3", "e2*e(1,0)", "e1^2*e(1,0)"};
  CHECK(got == want);
}

TEST_CASE("prec cutoff zero keeps only the empty index") {
  GlobalConfig cfg;
  EnumFilter f;
  f.prec_le4 = 0;
  f.exclude_pp = true;
  auto v = enumerate_indices(cfg, f);
  REQUIRE(v.size() == 1);
  CHECK(v[0].is_zero());
}

TEST_CASE("enumeration at alpha 0.30 matches a brute-force scan") {
  GlobalConfig cfg;
  cfg.alpha = Rational(3, 10);
  EnumFilter f;
  f.zero_k0 = true;
  f.exclude_pp = true;
  f.hom_lt = Rational(2);
  auto got = enumerate_indices(cfg, f);

  // independent oracle: exhaustive scan over k <= 6, |n| <= 4, total
  // multiplicity <= 8, then filter
  std::vector<MultiIndex> oracle;
  std::vector<MultiIndex> gens;
  for (int k = 1; k <= 6; ++k) gens.push_back(MultiIndex::unit_k(k));
  for (int n1 = 0; n1 <= 4; ++n1)
    for (int n2 = 0; 2 * n2 <= 4 - n1; ++n2)
      if (n1 + n2 > 0) gens.push_back(MultiIndex::unit_n({n1, n2}));
  std::function<void(std::size_t, MultiIndex, int)> rec = [&](std::size_t i, MultiIndex cur,
                                                              int left) {
    if (i == gens.size()) {
      if (cur.is_populated() && !cur.is_purely_polynomial() &&
          cur.homogeneity(cfg.alpha) < Rational(2))
        oracle.push_back(cur);
      return;
    }
    rec(i + 1, cur, left);
    MultiIndex nxt = cur;
    for (int m = 1; m <= left; ++m) {
      nxt = nxt.plus(gens[i]);
      rec(i + 1, nxt, left - m);
    }
  };
  rec(0, MultiIndex(), 8);
  std::sort(oracle.begin(), oracle.end(), [&](const MultiIndex& a, const MultiIndex& b) {
    return enum_less(a, b, cfg.alpha);
  });
  oracle.erase(std::unique(oracle.begin(), oracle.end()), oracle.end());
  CHECK(got == oracle);
  // determinism / idempotence
  CHECK(enumerate_indices(cfg, f) == got);
}

TEST_CASE("non-coercive filter combinations are rejected") {
  GlobalConfig cfg;
  EnumFilter f;
  f.hom_lt = Rational(2);  // no zero_k0
  CHECK_THROWS_AS(enumerate_indices(cfg, f), FilterError);
  EnumFilter g;
  CHECK_THROWS_AS(enumerate_indices(cfg, g), FilterError);
}

TEST_CASE("non-integrality guard") {
  GlobalConfig cfg;
  EnumFilter f;
  f.prec_le4 = 12;
  IndexSet S(enumerate_indices(cfg, f), cfg.alpha);
  CHECK_NOTHROW(S.check_non_integrality());
}
