#include "mirs/model.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <thread>

namespace mirs {

void CountertermTable::set(const MultiIndex& b, Entry e) {
  bool eligible = b.nfreq().empty() && b.homogeneity(alpha_) < Rational(2);
  if (!eligible && e.value != 0.0)
    throw std::invalid_argument("counterterm population violated at " + b.str());
  m_[b] = std::move(e);
}

void SimConfig::validate() const {
  algebra.validate();
  if (n1 <= 0 || n2 <= 0 || (n1 & (n1 - 1)) || (n2 & (n2 - 1)))
    throw std::invalid_argument("grid sizes must be powers of two");
  if (!(h1 > 0) || !(h2 > 0)) throw std::invalid_argument("spacings must be positive");
  if (std::pow(tau_eff(), 0.25) < 4.0 * h1 * (1.0 - 1e-12))
    throw NumericalError("config: tau^{1/4} under-resolved (need >= 4 cells)");
  if (samples < 0 || samples_pass2 < 0) throw std::invalid_argument("negative sample count");
}

ModelBuilder::ModelBuilder(const SimConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  // working set: dependency closure of the singular window (Figure-1 style
  // indices plus their e0-padded counterterm derivatives)
  std::vector<MultiIndex> targets = cfg_.targets;
  if (targets.empty()) {
    EnumFilter f;
    f.zero_k0 = true;
    f.exclude_pp = true;
    f.hom_lt = Rational(2);
    targets = enumerate_indices(cfg_.algebra, f);
  }
  std::vector<MultiIndex> closed = dependency_closure(cfg_.algebra, targets, HierarchyMode::Full);
  S_ = IndexSet(closed, cfg_.algebra.alpha);
  S_.check_non_integrality();
  for (const auto& b : S_.indices())
    if (!b.is_purely_polynomial() && b.homogeneity(cfg_.algebra.alpha) < Rational(2))
      singular_.push_back(b);
  compile_plans();
}

void ModelBuilder::compile_plans() {
  const AtomTable& T = AtomTable::instance();
  for (const auto& beta : S_.indices()) {
    if (beta.is_purely_polynomial()) continue;
    auto eqs = generate_hierarchy(cfg_.algebra, {beta}, HierarchyMode::Full);
    BuildPlan plan;
    plan.beta = beta;
    plan.hom = beta.homogeneity(cfg_.algebra.alpha).to_double();
    for (const auto& [mono, coef] : eqs[0].rhs.terms()) {
      PlanTerm t;
      t.coef = coef.to_double();
      bool bare_c = false;
      for (const auto& [id, p] : mono) {
        Atom a = T.atom(id);
        switch (a.kind) {
          case Atom::Kind::Pi:
            for (int q = 0; q < p; ++q) t.pi.push_back(a.index);
            break;
          case Atom::Kind::D1sqPi:
            if (p != 1 || t.d1sq) throw std::logic_error("plan: unexpected d1sq power");
            t.d1sq = a.index;
            break;
          case Atom::Kind::C:
            if (p != 1 || t.cref || a.order != 0)
              throw std::logic_error("plan: unexpected counterterm factor");
            t.cref = a.index;
            if (mono.size() == 1 && a.index == beta) bare_c = true;
            break;
          case Atom::Kind::Xi:
            t.xi = true;
            break;
          default:
            throw std::logic_error("plan: unexpected atom");
        }
      }
      if (bare_c) continue;  // the k=0 term; handled as the explicit -c_beta
      // dependency discipline: every consumed index is strictly below beta
      for (const auto& g : t.pi)
        if (!(g.prec4() < beta.prec4()))
          throw std::logic_error("plan: non-triangular Pi dependency at " + beta.str());
      if (t.d1sq && !(t.d1sq->prec4() < beta.prec4()))
        throw std::logic_error("plan: non-triangular d1sq dependency at " + beta.str());
      if (t.cref && !(t.cref->prec4() < beta.prec4()))
        throw std::logic_error("plan: non-triangular counterterm dependency at " + beta.str());
      plan.terms.push_back(std::move(t));
    }
    // Leibniz linearization in the noise direction; counterterms stay frozen
    for (const auto& t : plan.terms) {
      if (t.xi) {
        PlanTerm d = t;
        d.delta_slot = -3;
        plan.delta_terms.push_back(std::move(d));
        continue;
      }
      for (std::size_t s = 0; s < t.pi.size(); ++s) {
        PlanTerm d = t;
        d.delta_slot = (int)s;
        plan.delta_terms.push_back(std::move(d));
      }
      if (t.d1sq) {
        PlanTerm d = t;
        d.delta_slot = -2;
        plan.delta_terms.push_back(std::move(d));
      }
    }
    plans_.push_back(std::move(plan));
  }
}

SplitField ModelBuilder::polynomial_component(const MultiIndex& b, const GridPoint& x) const {
  if (!b.is_purely_polynomial())
    throw std::invalid_argument("polynomial_component: " + b.str());
  SplitField f;
  PolyPart p;
  p.base = x;
  p.coef[b.nfreq()[0].first] = 1.0;
  f.add_poly(p);
  return f;
}

namespace {

const SplitField& model_field(const ModelState& st, const MultiIndex& b) {
  auto it = st.Pi.find(b);
  if (it == st.Pi.end())
    throw std::logic_error("model: component " + b.str() + " not built yet");
  return it->second;
}

}  // namespace

LatticeField ModelBuilder::assemble_tilde(SpectralGrid& G, const ModelState& st,
                                          const BuildPlan& plan, const CountertermTable& c) const {
  LatticeField acc = G.make_field();
  std::unordered_map<MultiIndex, LatticeField, MIHash> d1sq_cache;
  std::unordered_map<MultiIndex, LatticeField, MIHash> mat_cache;
  auto mat = [&](const MultiIndex& b) -> const LatticeField& {
    auto it = mat_cache.find(b);
    if (it == mat_cache.end())
      it = mat_cache.emplace(b, model_field(st, b).materialize()).first;
    return it->second;
  };
  auto d1sq = [&](const MultiIndex& b) -> const LatticeField& {
    auto it = d1sq_cache.find(b);
    if (it == d1sq_cache.end())
      it = d1sq_cache.emplace(b, split_dx1sq(G, model_field(st, b)).materialize()).first;
    return it->second;
  };
  for (const auto& t : plan.terms) {
    double scalar = t.coef;
    if (t.cref) scalar *= c.value(*t.cref);
    if (scalar == 0.0) continue;
    if (t.xi) {
      LatticeField f = st.xi_tau;
      f *= scalar;
      acc += f;
      continue;
    }
    LatticeField f = G.make_field();
    bool started = false;
    if (t.d1sq) {
      f = d1sq(*t.d1sq);
      started = true;
    }
    for (const auto& g : t.pi) {
      if (!started) {
        f = mat(g);
        started = true;
      } else {
        f *= mat(g);
      }
    }
    if (!started) {  // pure counterterm-scalar term (e.g. products of c's only)
      for (auto& v : f.data()) v = 1.0;
    }
    f *= scalar;
    acc += f;
  }
  return acc;
}

void ModelBuilder::build_level(SpectralGrid& G, ModelState& st, const BuildPlan& plan,
                               const CountertermTable& c) const {
  LatticeField pim = assemble_tilde(G, st, plan, c);
  double cb = c.value(plan.beta);
  if (cb != 0.0)
    for (auto& v : pim.data()) v -= cb;
  IntegrateOptions opt = cfg_.integrate();
  IntegrateDiagnostics diag;
  SplitField Pi = integrate_model(G, pim, plan.hom, st.x, opt, &diag);
  Pi.periodic.check_finite("Pi_" + plan.beta.str());
  st.removed_mean[plan.beta] = diag.removed_mean;
  st.Pi.emplace(plan.beta, std::move(Pi));
}

ModelState ModelBuilder::build_from_noise(SpectralGrid& G, LatticeField xi_tau, const GridPoint& x,
                                          const CountertermTable& c) const {
  ModelState st;
  st.x = x;
  st.xi_tau = std::move(xi_tau);
  for (const auto& b : S_.indices())
    if (b.is_purely_polynomial()) st.Pi.emplace(b, polynomial_component(b, x));
  for (const auto& plan : plans_) build_level(G, st, plan, c);
  return st;
}

ModelState ModelBuilder::build_sample(SpectralGrid& G, std::uint64_t sample_seed,
                                      const GridPoint& x, const CountertermTable& c) const {
  return build_from_noise(G, sample_noise(G, cfg_.noise(), sample_seed), x, c);
}

CountertermTable ModelBuilder::estimate_counterterms(int samples, std::uint64_t seed) const {
  if (samples < 2) throw std::invalid_argument("estimate_counterterms: need >= 2 samples");
  CountertermTable c(cfg_.algebra.alpha);
  GridPoint x = cfg_.basepoint();

  // all samples stay in memory: the inductive protocol freezes c_beta from
  // the whole ensemble before any sample's Pi_beta at that level is built
  std::vector<ModelState> states((std::size_t)samples);
  std::unique_ptr<SpectralGrid> G0(make_grid());
  {
    int jobs = std::max(1, cfg_.jobs);
    std::vector<std::thread> ws;
    std::atomic<int> next{0};
    auto work = [&]() {
      std::unique_ptr<SpectralGrid> G(make_grid());
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= samples) break;
        ModelState st;
        st.x = x;
        st.xi_tau = sample_noise(*G, cfg_.noise(), derive_seed(cfg_.seed ^ seed, (std::uint64_t)i));
        for (const auto& b : S_.indices())
          if (b.is_purely_polynomial()) st.Pi.emplace(b, polynomial_component(b, x));
        states[(std::size_t)i] = std::move(st);
      }
    };
    for (int w = 0; w < jobs; ++w) ws.emplace_back(work);
    for (auto& t : ws) t.join();
  }

  for (const auto& plan : plans_) {
    // 1) ensemble/space-time average of Pi^-tilde at this level
    std::vector<double> avgs((std::size_t)samples);
    {
      int jobs = std::max(1, cfg_.jobs);
      std::vector<std::thread> ws;
      std::atomic<int> next{0};
      auto work = [&]() {
        std::unique_ptr<SpectralGrid> G(make_grid());
        for (;;) {
          int i = next.fetch_add(1);
          if (i >= samples) break;
          avgs[(std::size_t)i] = assemble_tilde(*G, states[(std::size_t)i], plan, c).mean();
        }
      };
      for (int w = 0; w < jobs; ++w) ws.emplace_back(work);
      for (auto& t : ws) t.join();
    }
    double mean = 0;
    for (double v : avgs) mean += v;
    mean /= samples;
    double var = 0;
    for (double v : avgs) var += (v - mean) * (v - mean);
    var /= (samples - 1);
    double ci3 = 3.0 * std::sqrt(var / samples);

    CountertermTable::Entry e;
    e.measured = mean;
    e.measured_ci = ci3;
    bool singular = plan.hom < 2.0;
    bool k_only = plan.beta.nfreq().empty();
    int refl = 0;
    for (const auto& [n, m] : plan.beta.nfreq()) refl += n.n1 * m;
    bool selection_ok = k_only;  // population already forces beta(n) = 0
    (void)refl;
    if (singular && selection_ok) {
      e.value = mean;
      e.ci = ci3;
    } else {
      e.value = 0.0;
      e.forced_zero = true;
    }
    c.set(plan.beta, e);

    // 2) complete the level pathwise with the frozen value
    {
      int jobs = std::max(1, cfg_.jobs);
      std::vector<std::thread> ws;
      std::atomic<int> next{0};
      auto work = [&]() {
        std::unique_ptr<SpectralGrid> G(make_grid());
        for (;;) {
          int i = next.fetch_add(1);
          if (i >= samples) break;
          build_level(*G, states[(std::size_t)i], plan, c);
        }
      };
      for (int w = 0; w < jobs; ++w) ws.emplace_back(work);
      for (auto& t : ws) t.join();
    }
  }
  return c;
}

PerturbationState ModelBuilder::directional_derivative(SpectralGrid& G, const ModelState& st,
                                                       const LatticeField& dxi,
                                                       const CountertermTable& c) const {
  PerturbationState p;
  p.dxi = dxi;
  for (const auto& b : S_.indices())
    if (b.is_purely_polynomial()) p.dPi.emplace(b, SplitField{});  // polynomials carry no noise
  std::unordered_map<MultiIndex, LatticeField, MIHash> mat, dmat, d1sq, dd1sq;
  auto get = [&](std::unordered_map<MultiIndex, LatticeField, MIHash>& cache,
                 const MultiIndex& b, auto&& make) -> const LatticeField& {
    auto it = cache.find(b);
    if (it == cache.end()) it = cache.emplace(b, make()).first;
    return it->second;
  };
  for (const auto& plan : plans_) {
    LatticeField acc = G.make_field();
    for (const auto& t : plan.delta_terms) {
      double scalar = t.coef;
      if (t.cref) scalar *= c.value(*t.cref);
      if (scalar == 0.0) continue;
      LatticeField f = G.make_field();
      bool started = false;
      if (t.delta_slot == -3) {
        f = dxi;
        started = true;
      }
      if (t.d1sq) {
        const LatticeField& src =
            t.delta_slot == -2
                ? get(dd1sq, *t.d1sq,
                      [&] { return split_dx1sq(G, p.dPi.at(*t.d1sq)).materialize(); })
                : get(d1sq, *t.d1sq,
                      [&] { return split_dx1sq(G, st.Pi.at(*t.d1sq)).materialize(); });
        if (!started) {
          f = src;
          started = true;
        } else {
          f *= src;
        }
      }
      for (std::size_t s = 0; s < t.pi.size(); ++s) {
        const MultiIndex& g = t.pi[s];
        const LatticeField& src =
            (int)s == t.delta_slot
                ? get(dmat, g, [&] { return p.dPi.at(g).materialize(); })
                : get(mat, g, [&] { return st.Pi.at(g).materialize(); });
        if (!started) {
          f = src;
          started = true;
        } else {
          f *= src;
        }
      }
      if (!started) continue;
      f *= scalar;
      acc += f;
    }
    IntegrateOptions opt = cfg_.integrate();
    IntegrateDiagnostics diag;
    SplitField dPi = integrate_model(G, acc, plan.hom, st.x, opt, &diag);
    p.removed_mean[plan.beta] = diag.removed_mean;
    p.dPi.emplace(plan.beta, std::move(dPi));
    dmat.erase(plan.beta);
    dd1sq.erase(plan.beta);
  }
  return p;
}

GammaEstimate ModelBuilder::extract_pi_n(SpectralGrid& G, const ModelState& mx,
                                         const ModelState& my) const {
  const Rational& alpha = cfg_.algebra.alpha;
  LatticeField probe = G.make_field();
  double h1phys = probe.disp1(my.x, mx.x);
  double h2phys = probe.disp2(my.x, mx.x);
  GammaEstimate est{mx.x, my.x, GroupElement<double>(&S_, {h1phys, h2phys}), {}, 0.0};

  // fit ball around y
  double dist_xy = probe.pdist(my.x, mx.x);
  double R = std::min(std::max(dist_xy, 8.0 * G.h1()), 0.125 * G.n1() * G.h1());
  std::vector<GridPoint> ball;
  for (int i2 = 0; i2 < G.n2(); ++i2)
    for (int i1 = 0; i1 < G.n1(); ++i1)
      if (probe.pdist({i1, i2}, my.x) <= R) ball.push_back({i1, i2});

  std::vector<MultiIndex> order;
  for (const auto& b : S_.indices())
    if (!b.is_purely_polynomial()) order.push_back(b);
  std::sort(order.begin(), order.end(), [](const MultiIndex& a, const MultiIndex& b) {
    if (a.prec4() != b.prec4()) return a.prec4() < b.prec4();
    return a < b;
  });

  TSeries<double> pi0, pi10;
  for (const auto& beta : order) {
    // unknowns: n with |n| < |beta|
    double hom = beta.homogeneity(alpha).to_double();
    bool want10 = hom > 1.0;
    std::size_t unknowns = want10 ? 2 : 1;
    if (ball.size() < 10 * unknowns)
      throw NumericalError("extract_pi_n: fit ball too small at " + beta.str());
    // residual field F(z) = Pi_x beta(z) - (Gamma* P Pi_y)_beta(z)
    GammaMatrix<double> M = gamma_matrix(est.gamma);
    int row = S_.position(beta);
    double s00 = 0, s01 = 0, s11 = 0, r0 = 0, r1 = 0;
    for (const auto& z : ball) {
      double F = model_field(mx, beta).eval(z);
      for (const auto& [j, e] : M.row(row)) {
        const MultiIndex& gamma = S_.indices()[j];
        if (gamma.is_purely_polynomial()) continue;
        F -= e * model_field(my, gamma).eval(z);
      }
      double m1 = probe.disp1(z, my.x);
      s00 += 1.0;
      s01 += m1;
      s11 += m1 * m1;
      r0 += F;
      r1 += F * m1;
    }
    double p0, p1 = 0.0;
    if (want10) {
      double det = s00 * s11 - s01 * s01;
      if (std::abs(det) < 1e-12 * (s00 * s11 + 1e-300))
        throw NumericalError("extract_pi_n: ill-conditioned fit at " + beta.str());
      p0 = (s11 * r0 - s01 * r1) / det;
      p1 = (s00 * r1 - s01 * r0) / det;
    } else {
      p0 = r0 / s00;
    }
    // fit residual (rms of the defining identity over the ball)
    double rss = 0;
    for (const auto& z : ball) {
      double F = model_field(mx, beta).eval(z);
      for (const auto& [j, e] : M.row(row)) {
        const MultiIndex& gamma = S_.indices()[j];
        if (gamma.is_purely_polynomial()) continue;
        F -= e * model_field(my, gamma).eval(z);
      }
      double m1 = probe.disp1(z, my.x);
      double r = F - p0 - p1 * m1;
      rss += r * r;
    }
    est.fit_residual[beta] = std::sqrt(rss / ball.size());
    est.pi0_vs_eval =
        std::max(est.pi0_vs_eval, std::abs(p0 - model_field(mx, beta).eval(my.x)));
    if (p0 != 0.0) pi0.add_to(beta, p0);
    if (p1 != 0.0) pi10.add_to(beta, p1);
    GroupElement<double> g(&S_, {h1phys, h2phys});
    if (!pi0.empty()) g.set_pi({0, 0}, pi0);
    if (!pi10.empty()) g.set_pi({1, 0}, pi10);
    est.gamma = std::move(g);
  }
  return est;
}

}  // namespace mirs
