// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
//
//  1  singular-index table reproduction (exact, order included)
//  2  dGamma population pattern rows (formal-symbol mode, exact)
//  3  ten-equation renormalized hierarchy (exact tree equality)
//  4  algebra lemma suite on the extended working set (exact rationals)
//  5  group laws on random rational elements (exact)
//  6  kernel suite: semigroup, moment bounds, parabolic scaling
//  7  BPHZ two-pass suite at the desk configuration
//  8  counterterm divergence rate in the mollification scale
//  9  scaling of E|Pi_beta|^2 in the parabolic distance
// 10  pathwise shift and reflection covariance
// 11  recentering / three-point suite
// 12  directional-derivative suite (finite differences, the c-free identity,
//     first-order vanishing)

#include <chrono>
#include <cstdio>
#include <thread>

#include "mirs/checks.hpp"

using namespace mirs;

namespace {

int g_fail = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void line(int crit, bool pass, const std::string& what, double secs) {
  std::printf("[%s] criterion %2d: %s  (%.1fs)\n", pass ? "PASS" : "FAIL", crit, what.c_str(),
              secs);
  std::fflush(stdout);
  if (!pass) ++g_fail;
}

int hw_jobs() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 2 : (int)n;
}

MultiIndex P(const char* s) { return MultiIndex::parse(s); }

void criterion1() {
  Timer t;
  GlobalConfig cfg;
  EnumFilter f;
  f.zero_k0 = true;
  f.exclude_pp = true;
  f.hom_lt = Rational(2);
  auto v = enumerate_indices(cfg, f);
  std::vector<std::string> got;
  for (const auto& b : v) got.push_back(b.str());
  std::vector<std::string> want = {"0",  "e1",    "e2",   "e1^2",      "e1*e(1,0)",
                                   "e3", "e1*e2", "e1^3", "e2*e(1,0)", "e1^2*e(1,0)"};
  line(1, got == want, "singular index table (10 indices, exact order)", t.s());
}

void criterion2() {
  Timer t;
  GlobalConfig cfg;
  CheckReport rep = check_figure3(cfg);
  std::string detail;
  for (const auto& r : rep.results)
    if (!r.pass) detail += " " + r.name;
  line(2, rep.ok(), "dGamma population pattern rows {0, e1, 2e1, 3e1}" + detail, t.s());
}

void criterion3() {
  Timer t;
  GlobalConfig cfg;
  EnumFilter f;
  f.zero_k0 = true;
  f.exclude_pp = true;
  f.hom_lt = Rational(2);
  auto idx = enumerate_indices(cfg, f);
  auto eqs = generate_hierarchy(cfg, idx, HierarchyMode::A0);
  bool ok = true;
  // exact tree equality after normalization: re-parse the canonical text and
  // compare expression trees
  for (const auto& eq : eqs) {
    HierarchyEquation back = parse_equation(render_equation(eq, RenderFormat::Text, cfg.alpha));
    ok = ok && back.rhs == eq.rhs && back.index == eq.index;
  }
  // and the frozen display (verified term by term against the source system)
  const char* golden[] = {
      "(d2 - a0*d1^2) Pi[0] = -c[0] + xi",
      "(d2 - a0*d1^2) Pi[e1] = Pi[0]*d1^2Pi[0] - c[e1]",
      "(d2 - a0*d1^2) Pi[e2] = Pi[0]^2*d1^2Pi[0] - 2*Pi[0]*c[e1] - c[e2]",
      "(d2 - a0*d1^2) Pi[e1^2] = Pi[0]*d1^2Pi[e1] - Pi[0]*da0 c[e1] + Pi[e1]*d1^2Pi[0] - "
      "c[e1^2]",
      "(d2 - a0*d1^2) Pi[e1*e(1,0)] = Pi[e(1,0)]*d1^2Pi[0]",
      "(d2 - a0*d1^2) Pi[e3] = Pi[0]^3*d1^2Pi[0] - 3*Pi[0]^2*c[e1] - 3*Pi[0]*c[e2] - c[e3]",
      "(d2 - a0*d1^2) Pi[e1*e2] = 2*Pi[0]*Pi[e1]*d1^2Pi[0] + Pi[0]^2*d1^2Pi[e1] + "
      "Pi[0]*d1^2Pi[e2] - 3*Pi[0]^2*da0 c[e1] - 4*Pi[0]*c[e1^2] - Pi[0]*da0 c[e2] - "
      "2*Pi[e1]*c[e1] + Pi[e2]*d1^2Pi[0] - c[e1*e2]",
      "(d2 - a0*d1^2) Pi[e1^3] = Pi[0]*d1^2Pi[e1^2] - 1/2*Pi[0]^2*da0^2 c[e1] - Pi[0]*da0 "
      "c[e1^2] + Pi[e1]*d1^2Pi[e1] - Pi[e1]*da0 c[e1] + Pi[e1^2]*d1^2Pi[0] - c[e1^3]",
      "(d2 - a0*d1^2) Pi[e2*e(1,0)] = 2*Pi[0]*Pi[e(1,0)]*d1^2Pi[0] - 2*Pi[e(1,0)]*c[e1]",
      "(d2 - a0*d1^2) Pi[e1^2*e(1,0)] = Pi[0]*d1^2Pi[e1*e(1,0)] + Pi[e(1,0)]*d1^2Pi[e1] - "
      "Pi[e(1,0)]*da0 c[e1] + Pi[e1*e(1,0)]*d1^2Pi[0]"};
  for (std::size_t i = 0; i < eqs.size(); ++i)
    ok = ok && render_equation(eqs[i], RenderFormat::Text, cfg.alpha) == golden[i];
  line(3, ok, "renormalized hierarchy (10 equations, canonical trees)", t.s());
}

void criterion4() {
  Timer t;
  GlobalConfig cfg;
  CheckReport rep = check_algebra_suite(cfg, 16, 20260809);
  std::string detail;
  for (const auto& r : rep.results)
    if (!r.pass) detail += " " + r.name + "[" + r.detail + "]";
  line(4, rep.ok(), "algebra lemma suite on |.|_prec <= 4" + detail, t.s());
}

void criterion5() {
  Timer t;
  GlobalConfig cfg;
  CheckReport rep = check_group_laws(cfg, 6, 100, 424242);
  std::string detail;
  for (const auto& r : rep.results)
    if (!r.pass) detail += " " + r.name;
  line(5, rep.ok(), "group laws on 100 random rational elements" + detail, t.s());
}

void criterion6() {
  Timer t;
  KernelCheckConfig kc;
  kc.n1 = 512;
  kc.n2 = 512;
  kc.h1 = 0.04;
  kc.h2 = 0.09;
  kc.ts = {1e-3, 1e-2, 1e-1, 1e0, 1e1};
  CheckReport rep = check_kernel_suite(kc);
  std::string detail;
  for (const auto& r : rep.results)
    if (!r.pass) detail += " " + r.name + "[" + r.detail + "]";
  line(6, rep.ok(), "kernel suite on 512x512" + detail, t.s());
}

SimConfig desk_config() {
  SimConfig cfg;  // 256x256, h2 = h1^2, tau resolved by 8 cells
  cfg.samples = 200;
  cfg.samples_pass2 = 200;
  cfg.seed = 31415926;
  cfg.jobs = hw_jobs();
  return cfg;
}

void criterion7() {
  Timer t;
  SimConfig cfg = desk_config();
  ModelBuilder mb(cfg);
  CountertermTable c = mb.estimate_counterterms(cfg.samples, 0xAA);
  auto rows = bphz_verify(mb, c, cfg.samples_pass2, derive_seed(cfg.seed, 0xBB));
  bool ok = true;
  std::string detail;
  for (const auto& r : rows) {
    if (std::abs(r.mean) > r.ci3) {
      ok = false;
      detail += " " + r.beta.str();
    }
  }
  // reflection selection: indices with odd n1-sum are forced to zero and the
  // measured average must be consistent with zero
  for (const auto& b : mb.singular()) {
    int n1sum = 0;
    for (const auto& [n, m] : b.nfreq()) n1sum += n.n1 * m;
    if (n1sum % 2 == 0) continue;
    const CountertermTable::Entry* e = c.entry(b);
    bool fz = e && e->forced_zero && std::abs(e->measured) <= e->measured_ci;
    if (!fz) {
      ok = false;
      detail += " refl:" + b.str();
    }
  }
  line(7, ok, "BPHZ two-pass suite (256x256, M=200)" + detail, t.s());
}

void criterion8() {
  Timer t;
  SimConfig cfg;
  cfg.n1 = 128;
  cfg.n2 = 128;
  cfg.h1 = 1.0 / 128;
  cfg.h2 = cfg.h1 * cfg.h1;
  cfg.jobs = hw_jobs();
  double h = cfg.h1;
  std::vector<double> taus = {std::pow(4 * h, 4), std::pow(8 * h, 4), std::pow(16 * h, 4)};
  double slope = counterterm_divergence_slope(cfg, P("e1"), taus, 200, 777);
  double expect = 2 * 0.45 - 2;  // |e1| - 2
  bool ok = std::abs(slope - expect) <= 0.15;
  char buf[128];
  std::snprintf(buf, sizeof buf, "counterterm divergence slope %.3f vs %.3f +- 0.15", slope,
                expect);
  line(8, ok, buf, t.s());
}

void criterion9() {
  Timer t;
  SimConfig cfg;
  cfg.n1 = 512;
  cfg.n2 = 512;
  cfg.h1 = 1.0 / 512;
  cfg.h2 = cfg.h1 * cfg.h1 * 16;  // keep the time extent a spread of scales
  cfg.tau = std::pow(4 * cfg.h1, 4);
  cfg.targets = {P("e1")};
  cfg.jobs = hw_jobs();
  ModelBuilder mb(cfg);
  double rmin = 4 * std::pow(cfg.tau_eff(), 0.25);
  double rmax = cfg.n1 * cfg.h1 / 8.0;
  auto rows = scaling_regression(mb, {P("0"), P("e1")}, 64, 999, rmin, rmax);
  bool ok = true;
  std::string detail;
  for (const auto& r : rows) {
    char buf[96];
    std::snprintf(buf, sizeof buf, " %s: %.3f vs %.3f", r.beta.str().c_str(), r.slope,
                  r.expected);
    detail += buf;
    if (std::abs(r.slope - r.expected) > 0.2) ok = false;
  }
  line(9, ok, "parabolic scaling slopes" + detail, t.s());
}

void criterion10() {
  Timer t;
  SimConfig cfg = desk_config();
  cfg.samples = 12;
  ModelBuilder mb(cfg);
  CountertermTable c = mb.estimate_counterterms(cfg.samples, 0xCC);
  CheckReport rep = check_symmetries(mb, derive_seed(cfg.seed, 5), c, 1e-9);
  std::string detail;
  for (const auto& r : rep.results) detail += " " + r.name + "[" + r.detail + "]";
  line(10, rep.ok(), "pathwise shift/reflection covariance" + detail, t.s());
}

void criterion11() {
  Timer t;
  SimConfig cfg = desk_config();
  cfg.samples = 24;
  ModelBuilder mb(cfg);
  std::unique_ptr<SpectralGrid> G(mb.make_grid());
  CountertermTable c = mb.estimate_counterterms(cfg.samples, 0xDD);
  RecenterReport rr = check_recentering(mb, *G, derive_seed(cfg.seed, 6), c, 10, 4242);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "recentering: pi0 dev %.2e, pp exact %.1e, transitivity %.2e vs 5x fit %.2e",
                rr.pi0_vs_eval, rr.pp_binom_residual, rr.transitivity_residual_max,
                5 * rr.fit_tolerance);
  line(11, rr.ok, buf, t.s());
}

void criterion12() {
  Timer t;
  SimConfig cfg;
  cfg.n1 = 128;
  cfg.n2 = 128;
  cfg.h1 = 1.0 / 128;
  cfg.h2 = cfg.h1 * cfg.h1;
  cfg.samples = 24;
  cfg.jobs = hw_jobs();
  ModelBuilder mb(cfg);
  std::unique_ptr<SpectralGrid> G(mb.make_grid());
  CountertermTable c = mb.estimate_counterterms(cfg.samples, 0xEE);
  DerivativeReport dr = check_derivative_suite(mb, *G, derive_seed(cfg.seed, 7), c);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "derivative: fd slope %.3f, c-free residual %.2e, vanishing slope %.2f",
                dr.fd_slope, dr.magic_residual_max, dr.vanishing_slope);
  bool ok = dr.linearity_residual <= 1e-10 && std::abs(dr.fd_slope - 1.0) <= 0.25 &&
            dr.magic_residual_max <= 1e-8 && dr.vanishing_slope >= 0.9;
  line(12, ok, buf, t.s());
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();
  criterion12();
  std::printf("%s\n", g_fail == 0 ? "acceptance: all criteria passed"
                                  : "acceptance: FAILURES present");
  return g_fail == 0 ? 0 : 1;
}
