#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "mirs/checks.hpp"

namespace mirs {

namespace {

double slope_fit2(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

LatticeField shift_field(const LatticeField& f, int s1, int s2) {
  LatticeField out = f;
  for (int i2 = 0; i2 < f.n2(); ++i2)
    for (int i1 = 0; i1 < f.n1(); ++i1)
      out.at(i1, i2) = f.at(((i1 - s1) % f.n1() + f.n1()) % f.n1(),
                            ((i2 - s2) % f.n2() + f.n2()) % f.n2());
  return out;
}

LatticeField reflect_field(const LatticeField& f) {
  LatticeField out = f;
  for (int i2 = 0; i2 < f.n2(); ++i2)
    for (int i1 = 0; i1 < f.n1(); ++i1) out.at(i1, i2) = f.at((f.n1() - i1) % f.n1(), i2);
  return out;
}

int reflection_sign_exponent(const MultiIndex& b) {
  int s = 0;
  for (const auto& [n, m] : b.nfreq()) s += n.n1 * m;
  return s;
}

}  // namespace

CheckReport check_symmetries(const ModelBuilder& mb, std::uint64_t sample_seed,
                             const CountertermTable& c, double tol) {
  CheckReport rep;
  std::unique_ptr<SpectralGrid> G(mb.make_grid());
  GridPoint x = mb.config().basepoint();
  LatticeField xi = sample_noise(*G, mb.config().noise(), sample_seed);
  ModelState base = mb.build_from_noise(*G, xi, x, c);

  // shift covariance: Pi_{x+s}[xi(.-s)](y+s) = Pi_x[xi](y), exact pathwise
  int s1 = mb.config().n1 / 4, s2 = mb.config().n2 / 8;
  ModelState shifted = mb.build_from_noise(*G, shift_field(xi, s1, s2),
                                           {(x.i1 + s1) % mb.config().n1,
                                            (x.i2 + s2) % mb.config().n2},
                                           c);
  double worst_shift = 0;
  for (const auto& b : mb.set().indices()) {
    const SplitField& a = base.Pi.at(b);
    const SplitField& d = shifted.Pi.at(b);
    LatticeField ma = a.materialize(), md = d.materialize();
    double scale = std::max(ma.max_abs(), 1e-12);
    double w = 0;
    for (int i2 = 0; i2 < ma.n2(); ++i2)
      for (int i1 = 0; i1 < ma.n1(); ++i1)
        w = std::max(w, std::abs(md.at((i1 + s1) % ma.n1(), (i2 + s2) % ma.n2()) - ma.at(i1, i2)));
    worst_shift = std::max(worst_shift, w / scale);
  }
  rep.add("model-shift-covariance", worst_shift <= tol, "rel " + std::to_string(worst_shift));

  // reflection covariance with sign (-1)^{sum n1 beta(n)}
  ModelState reflected = mb.build_from_noise(*G, reflect_field(xi),
                                             {(mb.config().n1 - x.i1) % mb.config().n1, x.i2}, c);
  double worst_refl = 0;
  for (const auto& b : mb.set().indices()) {
    double sign = reflection_sign_exponent(b) % 2 == 0 ? 1.0 : -1.0;
    LatticeField ma = base.Pi.at(b).materialize();
    LatticeField mr = reflected.Pi.at(b).materialize();
    double scale = std::max(ma.max_abs(), 1e-12);
    double w = 0;
    for (int i2 = 0; i2 < ma.n2(); ++i2)
      for (int i1 = 0; i1 < ma.n1(); ++i1)
        w = std::max(w, std::abs(mr.at((ma.n1() - i1) % ma.n1(), i2) - sign * ma.at(i1, i2)));
    worst_refl = std::max(worst_refl, w / scale);
  }
  rep.add("model-reflection-covariance", worst_refl <= tol, "rel " + std::to_string(worst_refl));
  return rep;
}

std::vector<BphzRow> bphz_verify(const ModelBuilder& mb, const CountertermTable& c, int samples,
                                 std::uint64_t seed) {
  // pass-2: fresh ensemble, c frozen; report the ensemble mean of the
  // space-time average of Pi^-_beta per singular index
  std::vector<std::vector<double>> avgs(mb.plans().size(),
                                        std::vector<double>((std::size_t)samples));
  int jobs = std::max(1, mb.config().jobs);
  std::vector<std::thread> ws;
  std::atomic<int> next{0};
  auto work = [&]() {
    std::unique_ptr<SpectralGrid> G(mb.make_grid());
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= samples) break;
      ModelState st;
      st.x = mb.config().basepoint();
      st.xi_tau = sample_noise(*G, mb.config().noise(), derive_seed(seed, (std::uint64_t)i));
      for (const auto& b : mb.set().indices())
        if (b.is_purely_polynomial()) st.Pi.emplace(b, mb.polynomial_component(b, st.x));
      for (std::size_t p = 0; p < mb.plans().size(); ++p) {
        const BuildPlan& plan = mb.plans()[p];
        LatticeField tilde = mb.assemble_tilde(*G, st, plan, c);
        avgs[p][(std::size_t)i] = tilde.mean() - c.value(plan.beta);
        mb.build_level(*G, st, plan, c);
      }
    }
  };
  for (int w = 0; w < jobs; ++w) ws.emplace_back(work);
  for (auto& t : ws) t.join();

  std::vector<BphzRow> rows;
  for (std::size_t p = 0; p < mb.plans().size(); ++p) {
    const MultiIndex& beta = mb.plans()[p].beta;
    if (!(mb.plans()[p].hom < 2.0)) continue;
    double mean = 0;
    for (double v : avgs[p]) mean += v;
    mean /= samples;
    double var = 0;
    for (double v : avgs[p]) var += (v - mean) * (v - mean);
    var /= std::max(1, samples - 1);
    const CountertermTable::Entry* e = c.entry(beta);
    rows.push_back({beta, mean, 3.0 * std::sqrt(var / samples), e && e->forced_zero,
                    c.value(beta)});
  }
  return rows;
}

RecenterReport check_recentering(const ModelBuilder& mb, SpectralGrid& G,
                                 std::uint64_t sample_seed, const CountertermTable& c,
                                 int n_triples, std::uint64_t point_seed) {
  RecenterReport rep{};
  const SimConfig& cfg = mb.config();
  LatticeField xi = sample_noise(G, cfg.noise(), sample_seed);
  Rng rng(point_seed);
  double worst_fit = 0, worst_pi0 = 0, worst_trans = 0, worst_pp = 0;

  for (int trial = 0; trial < n_triples; ++trial) {
    // three base points in a half-window so displacement wraps stay seam-free
    auto pick = [&](GridPoint near, int spread1, int spread2) -> GridPoint {
      int d1 = (int)(rng.next_u64() % (std::uint64_t)(2 * spread1 + 1)) - spread1;
      int d2 = (int)(rng.next_u64() % (std::uint64_t)(2 * spread2 + 1)) - spread2;
      return {((near.i1 + d1) % cfg.n1 + cfg.n1) % cfg.n1,
              ((near.i2 + d2) % cfg.n2 + cfg.n2) % cfg.n2};
    };
    GridPoint x{cfg.n1 / 2, cfg.n2 / 2};
    GridPoint y = pick(x, cfg.n1 / 8, cfg.n2 / 8);
    GridPoint z = pick(x, cfg.n1 / 8, cfg.n2 / 8);
    if (y == x || z == x || z == y) continue;

    ModelState mx = mb.build_from_noise(G, xi, x, c);
    ModelState my = mb.build_from_noise(G, xi, y, c);
    ModelState mz = mb.build_from_noise(G, xi, z, c);

    GammaEstimate exy = mb.extract_pi_n(G, mx, my);
    GammaEstimate exz = mb.extract_pi_n(G, mx, mz);
    GammaEstimate ezy = mb.extract_pi_n(G, mz, my);

    double ftol = 0;
    for (const auto& [b, r] : exy.fit_residual) ftol = std::max(ftol, r);
    for (const auto& [b, r] : exz.fit_residual) ftol = std::max(ftol, r);
    for (const auto& [b, r] : ezy.fit_residual) ftol = std::max(ftol, r);
    rep.fit_tolerance = std::max(rep.fit_tolerance, ftol);
    worst_fit = std::max(worst_fit, ftol);
    worst_pi0 = std::max({worst_pi0, exy.pi0_vs_eval, exz.pi0_vs_eval, ezy.pi0_vs_eval});

    // purely polynomial recentering: binomial identity of wrapped monomials
    LatticeField probe = G.make_field();
    for (const auto& b : mb.set().indices()) {
      if (!b.is_purely_polynomial()) continue;
      Exponent2D n = b.nfreq()[0].first;
      for (int rep_i = 0; rep_i < 10; ++rep_i) {
        GridPoint w = pick(y, cfg.n1 / 16, cfg.n2 / 16);
        double lhs = std::pow(probe.disp1(w, x), n.n1) * std::pow(probe.disp2(w, x), n.n2);
        double rhs = 0;
        for (int m1 = 0; m1 <= n.n1; ++m1)
          for (int m2 = 0; m2 <= n.n2; ++m2) {
            double bc = binom2(n, {m1, m2}).to_double();
            rhs += bc * std::pow(probe.disp1(w, y), m1) * std::pow(probe.disp2(w, y), m2) *
                   std::pow(probe.disp1(y, x), n.n1 - m1) * std::pow(probe.disp2(y, x), n.n2 - m2);
          }
        worst_pp = std::max(worst_pp, std::abs(lhs - rhs));
      }
    }

    // transitivity residual per non-pp component
    GammaMatrix<double> Mxz = gamma_matrix(exz.gamma);
    for (const auto& n : std::vector<Exponent2D>{{0, 0}, {1, 0}}) {
      TSeries<double> pxy = exy.gamma.full_pi(n).filtered(
          [](const MultiIndex& b) { return !b.is_purely_polynomial(); });
      TSeries<double> pxz = exz.gamma.full_pi(n).filtered(
          [](const MultiIndex& b) { return !b.is_purely_polynomial(); });
      TSeries<double> pzy = ezy.gamma.full_pi(n);
      TSeries<double> gz = Mxz.apply(pzy);
      for (const auto& beta : mb.set().indices()) {
        if (beta.is_purely_polynomial()) continue;
        auto val = [&](const TSeries<double>& s) {
          const double* p = s.find(beta);
          return p ? *p : 0.0;
        };
        double resid = val(pxy) - val(pxz) - val(gz);
        worst_trans = std::max(worst_trans, std::abs(resid));
      }
    }
  }
  rep.fit_residual_max = worst_fit;
  rep.pi0_vs_eval = worst_pi0;
  rep.pp_binom_residual = worst_pp;
  rep.transitivity_residual_max = worst_trans;
  rep.ok = worst_pp <= 1e-10 && worst_pi0 <= 10 * rep.fit_tolerance + 1e-12 &&
           worst_trans <= 5 * rep.fit_tolerance + 1e-12;
  return rep;
}

// ---------------------------------------------------------------------------
// derivative suite: linearity, finite differences, the c-free identity, and
// first-order vanishing

namespace {

/// z-side chain obtained from the x-chain by the exact recentering
/// complement; recentering of derivatives holds identically by construction
struct RecenterChain {
  GroupElement<double> gamma;  // Gamma*_{xz}
  std::unordered_map<MultiIndex, SplitField, MIHash> Pi_z;
};

RecenterChain build_chain(const ModelBuilder& mb, SpectralGrid& G, const ModelState& mx,
                          const GridPoint& z) {
  const IndexSet& S = mb.set();
  LatticeField probe = G.make_field();
  double hz1 = probe.disp1(z, mx.x), hz2 = probe.disp2(z, mx.x);
  RecenterChain ch{GroupElement<double>(&S, {hz1, hz2}), {}};
  for (const auto& b : S.indices())
    if (b.is_purely_polynomial()) ch.Pi_z.emplace(b, mb.polynomial_component(b, z));

  std::vector<MultiIndex> order;
  for (const auto& b : S.indices())
    if (!b.is_purely_polynomial()) order.push_back(b);
  std::sort(order.begin(), order.end(), [](const MultiIndex& a, const MultiIndex& b) {
    if (a.prec4() != b.prec4()) return a.prec4() < b.prec4();
    return a < b;
  });

  TSeries<double> pi0, pi10;
  for (const auto& beta : order) {
    GammaMatrix<double> M = gamma_matrix(ch.gamma);
    int row = S.position(beta);
    // pi^(0)_beta = Pi_x beta(z); pi^(1,0) matches d1 at z when populated
    double p0 = mx.Pi.at(beta).eval(z);
    double hom = beta.homogeneity(S.alpha()).to_double();
    double p1 = 0.0;
    if (hom > 1.0) {
      p1 = split_dx1(G, mx.Pi.at(beta)).eval(z);
      for (const auto& [j, e] : M.row(row)) {
        const MultiIndex& gamma = S.indices()[j];
        if (gamma.is_purely_polynomial() || gamma == beta) continue;
        p1 -= e * split_dx1(G, ch.Pi_z.at(gamma)).eval(z);
      }
    }
    // Pi_z beta = Pi_x beta - sum_{gamma < beta, non-pp} Gamma_beta^gamma Pi_z gamma
    //             - pi^(1,0) (.-z)^(1,0) - pi^(0)
    SplitField f = mx.Pi.at(beta);
    for (const auto& [j, e] : M.row(row)) {
      const MultiIndex& gamma = S.indices()[j];
      if (gamma.is_purely_polynomial() || gamma == beta) continue;
      if (e == 0.0) continue;
      f += ch.Pi_z.at(gamma).scaled(-e);
    }
    PolyPart corr;
    corr.base = z;
    corr.coef[{0, 0}] = -p0;
    if (p1 != 0.0) corr.coef[{1, 0}] = -p1;
    f.add_poly(corr);
    ch.Pi_z.emplace(beta, std::move(f));
    if (p0 != 0.0) pi0.add_to(beta, p0);
    if (p1 != 0.0) pi10.add_to(beta, p1);
    GroupElement<double> g(&S, {hz1, hz2});
    if (!pi0.empty()) g.set_pi({0, 0}, pi0);
    if (!pi10.empty()) g.set_pi({1, 0}, pi10);
    ch.gamma = std::move(g);
  }
  return ch;
}

}  // namespace

DerivativeReport check_derivative_suite(const ModelBuilder& mb, SpectralGrid& G,
                                        std::uint64_t sample_seed, const CountertermTable& c) {
  DerivativeReport rep{};
  const SimConfig& cfg = mb.config();
  const IndexSet& S = mb.set();
  GridPoint x = cfg.basepoint();
  LatticeField xi = sample_noise(G, cfg.noise(), sample_seed);
  ModelState st = mb.build_from_noise(G, xi, x, c);

  // mean-zero smooth direction
  NoiseConfig ncfg = cfg.noise();
  LatticeField d1 = sample_noise(G, ncfg, derive_seed(sample_seed, 101));
  LatticeField d2 = sample_noise(G, ncfg, derive_seed(sample_seed, 202));
  PerturbationState p1 = mb.directional_derivative(G, st, d1, c);
  PerturbationState p2 = mb.directional_derivative(G, st, d2, c);

  // linearity: derivative along (a d1 + b d2)
  {
    double a = 0.7, b = -1.3;
    LatticeField mix = d1;
    mix *= a;
    LatticeField t2 = d2;
    t2 *= b;
    mix += t2;
    PerturbationState pm = mb.directional_derivative(G, st, mix, c);
    double worst = 0;
    for (const auto& bb : S.indices()) {
      if (bb.is_purely_polynomial()) continue;
      LatticeField lhs = pm.dPi.at(bb).materialize();
      LatticeField rhs = p1.dPi.at(bb).materialize();
      rhs *= a;
      LatticeField r2 = p2.dPi.at(bb).materialize();
      r2 *= b;
      rhs += r2;
      worst = std::max(worst, (lhs - rhs).max_abs() / std::max(rhs.max_abs(), 1e-12));
    }
    rep.linearity_residual = worst;
  }

  // finite differences: || (Pi[xi + eps d1] - Pi[xi]) / eps - dPi || = O(eps)
  {
    std::vector<double> eps = {1e-4, 1e-5, 1e-6};
    std::vector<double> xs, ys;
    for (double e : eps) {
      LatticeField bumped = d1;
      bumped *= e;
      bumped += xi;
      ModelState ste = mb.build_from_noise(G, bumped, x, c);
      double worst = 0;
      for (const auto& bb : S.indices()) {
        if (bb.is_purely_polynomial()) continue;
        LatticeField fd = ste.Pi.at(bb).materialize() - st.Pi.at(bb).materialize();
        fd *= 1.0 / e;
        LatticeField dp = p1.dPi.at(bb).materialize();
        worst = std::max(worst, (fd - dp).max_abs() / std::max(dp.max_abs(), 1e-12));
      }
      xs.push_back(std::log(e));
      ys.push_back(std::log(std::max(worst, 1e-300)));
    }
    rep.fd_slope = slope_fit2(xs, ys);
  }

  // the c-free identity at a secondary base point z, via the exact
  // recentering chain
  {
    GridPoint z{x.i1 + cfg.n1 / 16, x.i2 + cfg.n2 / 16};
    RecenterChain ch = build_chain(mb, G, st, z);
    // dpi^(0) = delta Pi_x(z) components; dpi^(1,0) from the truncated
    // transform, inductively in the ordering
    std::vector<MultiIndex> order;
    for (const auto& b : S.indices())
      if (!b.is_purely_polynomial()) order.push_back(b);
    std::sort(order.begin(), order.end(), [](const MultiIndex& a, const MultiIndex& b) {
      if (a.prec4() != b.prec4()) return a.prec4() < b.prec4();
      return a < b;
    });
    TSeries<double> dpi0, dpi10;
    for (const auto& beta : order)
      if (double v = p1.dPi.at(beta).eval(z); v != 0.0) dpi0.add_to(beta, v);
    // d1 Pi_z values on the non-pp sector (P projection built in)
    std::unordered_map<MultiIndex, double, MIHash> d1Piz, d1sqPiz, d1sqdPi;
    for (const auto& beta : S.indices()) {
      d1Piz[beta] = split_dx1(G, ch.Pi_z.at(beta)).eval(z);
      d1sqPiz[beta] = split_dx1sq(G, ch.Pi_z.at(beta)).eval(z);
      d1sqdPi[beta] =
          beta.is_purely_polynomial() ? 0.0 : split_dx1sq(G, p1.dPi.at(beta)).eval(z);
    }
    DGammaElement<double> d;
    d.base = &ch.gamma;
    d.dpi0 = dpi0;
    for (const auto& beta : order) {
      double hom = beta.homogeneity(S.alpha()).to_double();
      if (!(hom < 2.0)) continue;
      // dpi^(1,0)_beta = d1 dPi_x(z) - (dGamma P d1 Pi_z)(z) at beta
      d.dpi10 = dpi10;
      GammaMatrix<double> DM = dgamma_matrix(d);
      double v = split_dx1(G, p1.dPi.at(beta)).eval(z);
      for (const auto& [j, e] : DM.row(S.position(beta))) {
        const MultiIndex& gamma = S.indices()[j];
        if (gamma.is_purely_polynomial()) continue;
        v -= e * d1Piz.at(gamma);
      }
      if (v != 0.0) dpi10.add_to(beta, v);
    }
    d.dpi10 = dpi10;
    GammaMatrix<double> DM = dgamma_matrix(d);

    // Pi^-_z values at z: collapse of the assembled form
    std::unordered_map<MultiIndex, double, MIHash> piminus_z;
    for (const auto& beta : order) {
      double v = -c.value(beta);
      if (beta.is_zero()) v += xi.at(z);
      if (auto down = beta.minus(MultiIndex::unit_k(0))) v += d1sqPiz.at(*down);
      piminus_z[beta] = v;
    }

    // evaluations of Pi_x at z (including purely polynomial components)
    TSeries<double> PiEval;
    for (const auto& b : S.indices())
      if (double v = st.Pi.at(b).eval(z); v != 0.0) PiEval.add_to(b, v);

    // delta xi direction value
    double dxi_z = d1.at(z);

    double worst = 0;
    for (const auto& plan : mb.plans()) {
      const MultiIndex& beta = plan.beta;
      if (!(plan.hom < 2.0)) continue;
      // lhs: delta Pi^-_x(z) (assembled) - (dGamma Q Pi^-_z)(z)
      double lhs = 0;
      for (const auto& t : plan.delta_terms) {
        double scalar = t.coef;
        if (t.cref) scalar *= c.value(*t.cref);
        if (scalar == 0.0) continue;
        double prod = scalar;
        if (t.delta_slot == -3) prod *= dxi_z;
        if (t.d1sq)
          prod *= (t.delta_slot == -2) ? d1sqdPi.at(*t.d1sq)
                                       : split_dx1sq(G, st.Pi.at(*t.d1sq)).eval(z);
        for (std::size_t sIdx = 0; sIdx < t.pi.size(); ++sIdx)
          prod *= ((int)sIdx == t.delta_slot) ? p1.dPi.at(t.pi[sIdx]).eval(z)
                                              : st.Pi.at(t.pi[sIdx]).eval(z);
        lhs += prod;
      }
      if (beta.is_zero()) lhs += dxi_z;
      for (const auto& [j, e] : DM.row(S.position(beta))) {
        const MultiIndex& gamma = S.indices()[j];
        if (gamma.is_purely_polynomial()) continue;
        lhs -= e * piminus_z.at(gamma);
      }
      // rhs: sum_k z_k Pi_x^k(z) d1^2 (dPi_x - dGamma Q Pi_z)(z) + dxi(z)
      TSeries<double> X;
      for (const auto& gamma : S.indices()) {
        double v = d1sqdPi.at(gamma);
        for (const auto& [j, e] : DM.row(S.position(gamma))) {
          const MultiIndex& delta = S.indices()[j];
          bool singular = delta.homogeneity(S.alpha()) < Rational(2);
          if (delta.is_purely_polynomial() || !singular) continue;
          v -= e * d1sqPiz.at(delta);
        }
        if (v != 0.0) X.add_to(gamma, v);
      }
      double rhs = beta.is_zero() ? dxi_z : 0.0;
      for (int k = 0; k <= beta.max_k() + 1; ++k) {
        if (!beta.minus(MultiIndex::unit_k(k))) continue;
        std::vector<TSeries<double>> factors((std::size_t)k, PiEval);
        factors.push_back(X);
        TSeries<double> term = zk_product<double>(k, factors, S);
        if (const double* v = term.find(beta)) rhs += *v;
      }
      double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-6});
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    rep.magic_residual_max = worst;

    // first-order vanishing of the controlled-path increment
    std::vector<double> xs, ys;
    LatticeField probe = G.make_field();
    for (int m : {1, 2, 4, 8, 16}) {
      GridPoint y{(z.i1 + m) % cfg.n1, z.i2};
      double worst_inc = 0;
      for (const auto& beta : order) {
        if (!(beta.homogeneity(S.alpha()).to_double() < 2.0)) continue;
        double v = p1.dPi.at(beta).eval(y) - p1.dPi.at(beta).eval(z);
        for (const auto& [j, e] : DM.row(S.position(beta)))
          v -= e * ch.Pi_z.at(S.indices()[j]).eval(y);
        worst_inc = std::max(worst_inc, std::abs(v));
      }
      xs.push_back(std::log(probe.pdist(y, z)));
      ys.push_back(std::log(std::max(worst_inc, 1e-300)));
    }
    rep.vanishing_slope = slope_fit2(xs, ys);
  }

  rep.ok = rep.linearity_residual <= 1e-10 && std::abs(rep.fd_slope - 1.0) <= 0.25 &&
           rep.magic_residual_max <= 1e-8 && rep.vanishing_slope >= 0.9;
  return rep;
}

std::vector<ScalingRow> scaling_regression(const ModelBuilder& mb,
                                           const std::vector<MultiIndex>& betas, int samples,
                                           std::uint64_t seed, double r_min, double r_max) {
  const SimConfig& cfg = mb.config();
  GridPoint x = cfg.basepoint();
  // distance shells (log-spaced)
  int nbins = 12;
  std::vector<double> lo(nbins), hi(nbins);
  for (int b = 0; b < nbins; ++b) {
    lo[b] = r_min * std::pow(r_max / r_min, double(b) / nbins);
    hi[b] = r_min * std::pow(r_max / r_min, double(b + 1) / nbins);
  }
  std::vector<std::vector<double>> acc(betas.size(), std::vector<double>(nbins, 0.0));
  std::vector<std::vector<long>> cnt(betas.size(), std::vector<long>(nbins, 0));

  CountertermTable c = mb.estimate_counterterms(samples, seed ^ 0x97e1);
  std::unique_ptr<SpectralGrid> G(mb.make_grid());
  LatticeField probe = G->make_field();
  for (int i = 0; i < samples; ++i) {
    ModelState st = mb.build_sample(*G, derive_seed(seed, (std::uint64_t)i + 50000), x, c);
    for (std::size_t bi = 0; bi < betas.size(); ++bi) {
      LatticeField f = st.Pi.at(betas[bi]).materialize();
      for (int i2 = 0; i2 < cfg.n2; ++i2)
        for (int i1 = 0; i1 < cfg.n1; ++i1) {
          double r = probe.pdist({i1, i2}, x);
          if (r < lo[0] || r >= hi[nbins - 1]) continue;
          int b = (int)(std::log(r / r_min) / std::log(r_max / r_min) * nbins);
          if (b < 0 || b >= nbins) continue;
          acc[bi][(std::size_t)b] += f.at(i1, i2) * f.at(i1, i2);
          cnt[bi][(std::size_t)b] += 1;
        }
    }
  }
  std::vector<ScalingRow> rows;
  for (std::size_t bi = 0; bi < betas.size(); ++bi) {
    std::vector<double> xs, ys;
    for (int b = 0; b < nbins; ++b) {
      if (cnt[bi][(std::size_t)b] < 16) continue;
      xs.push_back(std::log(std::sqrt(lo[b] * hi[b])));
      ys.push_back(std::log(acc[bi][(std::size_t)b] / cnt[bi][(std::size_t)b]));
    }
    double sl = slope_fit2(xs, ys);
    rows.push_back({betas[bi], sl,
                    2.0 * betas[bi].homogeneity(mb.config().algebra.alpha).to_double()});
  }
  return rows;
}

double counterterm_divergence_slope(const SimConfig& base, const MultiIndex& beta,
                                    const std::vector<double>& taus, int samples,
                                    std::uint64_t seed) {
  std::vector<double> xs, ys;
  for (double tau : taus) {
    SimConfig cfg = base;
    cfg.tau = tau;
    cfg.targets = {beta};
    ModelBuilder mb(cfg);
    CountertermTable c = mb.estimate_counterterms(samples, seed);
    double v = std::abs(c.value(beta));
    xs.push_back(std::log(std::pow(tau, 0.25)));
    ys.push_back(std::log(std::max(v, 1e-300)));
  }
  return slope_fit2(xs, ys);
}

double noise_increment_slope(const SimConfig& base, const std::vector<double>& taus, int samples,
                             std::uint64_t seed) {
  // tau * E|xi_tau(x + r e1) - xi_tau(x)|^2 at the matched scale r = tau^{1/4}
  // grows like (tau^{1/4})^{2 alpha}; the bound is saturated exactly there
  std::vector<double> xs, ys;
  std::unique_ptr<SpectralGrid> G(new SpectralGrid(base.n1, base.n2, base.h1, base.h2));
  for (double tau : taus) {
    NoiseConfig nc = base.noise();
    nc.tau = tau;
    int r = std::max(1, (int)std::llround(std::pow(tau, 0.25) / base.h1));
    double acc = 0;
    long cnt = 0;
    for (int i = 0; i < samples; ++i) {
      LatticeField xi = sample_noise(*G, nc, derive_seed(seed ^ 0xabc, (std::uint64_t)i));
      for (int i2 = 0; i2 < base.n2; i2 += 8)
        for (int i1 = 0; i1 < base.n1; i1 += 8) {
          double d = xi.at((i1 + r) % base.n1, i2) - xi.at(i1, i2);
          acc += d * d;
          ++cnt;
        }
    }
    xs.push_back(std::log(std::pow(tau, 0.25)));
    ys.push_back(std::log(tau * acc / cnt));
  }
  return slope_fit2(xs, ys);
}

}  // namespace mirs
