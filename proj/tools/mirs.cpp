// Command-line front end: index enumeration, hierarchy rendering, the
// desk-scale simulator, and the check suites.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>

#include "mirs/checks.hpp"
#include "mirs/manifest.hpp"

namespace fs = std::filesystem;
using namespace mirs;

namespace {

int cmd_indices(const std::string& alpha, double hom_lt, double prec_le, bool zero_k0, bool no_pp,
                bool json) {
  GlobalConfig cfg;
  try {
    cfg.alpha = sim_config_from_kv({{"alpha", alpha}}).algebra.alpha;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  EnumFilter f;
  f.zero_k0 = zero_k0;
  f.exclude_pp = no_pp;
  if (hom_lt > 0) f.hom_lt = Rational((long long)std::llround(hom_lt * 1000000), 1000000);
  if (prec_le >= 0) f.prec_le4 = (int)std::llround(prec_le * 4);
  std::vector<MultiIndex> v;
  try {
    v = enumerate_indices(cfg, f);
  } catch (const FilterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (json) {
    std::cout << "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& b = v[i];
      std::cout << (i ? ", " : "") << "{\"index\": \"" << b.str() << "\", \"k\": {";
      bool first = true;
      for (const auto& [k, m] : b.kfreq()) {
        std::cout << (first ? "" : ", ") << "\"" << k << "\": " << m;
        first = false;
      }
      std::cout << "}, \"n\": {";
      first = true;
      for (const auto& [n, m] : b.nfreq()) {
        std::cout << (first ? "" : ", ") << "\"" << n.str() << "\": " << m;
        first = false;
      }
      std::cout << "}, \"hom\": " << b.homogeneity(cfg.alpha).to_double()
                << ", \"prec\": " << b.prec4() / 4.0 << "}";
    }
    std::cout << "]\n";
  } else {
    for (const auto& b : v) std::cout << b.str() << "\n";
  }
  return 0;
}

int cmd_hierarchy(const std::string& alpha, const std::string& format, bool h_formula,
                  const std::string& mode_s, const std::string& indices_csv) {
  GlobalConfig cfg;
  {
    std::map<std::string, std::string> kv{{"alpha", alpha}};
    try {
      cfg.alpha = sim_config_from_kv(kv).algebra.alpha;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  HierarchyMode mode = mode_s == "full" ? HierarchyMode::Full : HierarchyMode::A0;
  RenderFormat fmt = format == "latex" ? RenderFormat::Latex
                     : format == "json" ? RenderFormat::Json
                                        : RenderFormat::Text;
  std::vector<MultiIndex> idx;
  if (!indices_csv.empty()) {
    std::stringstream ss(indices_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) idx.push_back(MultiIndex::parse(tok));
  } else {
    EnumFilter f;
    f.zero_k0 = true;
    f.exclude_pp = true;
    f.hom_lt = Rational(2);
    idx = enumerate_indices(cfg, f);
  }
  try {
    auto eqs = generate_hierarchy(cfg, idx, mode);
    std::cout << render_hierarchy(eqs, fmt, cfg.alpha);
    if (h_formula) {
      std::vector<MultiIndex> csup;
      for (const auto& b : idx)
        if (counterterm_eligible(b, cfg.alpha, HierarchyMode::A0)) csup.push_back(b);
      std::cout << render_h_formula(csup, cfg.alpha, fmt) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_simulate(const std::string& config_path, int samples_override, const std::string& out_dir,
                 std::uint64_t seed_override, bool force, int jobs) {
  SimConfig cfg;
  try {
    cfg = sim_config_from_kv(config_path.empty()
                                 ? std::map<std::string, std::string>{}
                                 : parse_config_file(config_path));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (samples_override >= 0) {
    cfg.samples = samples_override;
    cfg.samples_pass2 = samples_override;
  }
  if (seed_override) cfg.seed = seed_override;
  if (jobs > 0) cfg.jobs = jobs;

  if (!out_dir.empty()) {
    if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !force) {
      std::cerr << "error: output directory exists; use --force to rerun\n";
      return 2;
    }
    fs::create_directories(out_dir);
  }

  auto t0 = std::chrono::steady_clock::now();
  RunManifest man;
  man.command = "simulate";
  man.config_json = sim_config_json(cfg);
  man.seed = cfg.seed;
  man.version = tool_version();
  {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    man.started_utc = buf;
  }

  if (cfg.samples == 0) {  // dry run: config validated above
    std::cout << "config ok (dry run)\n" << man.config_json << "\n";
    return 0;
  }

  try {
    ModelBuilder mb(cfg);
    CountertermTable c = mb.estimate_counterterms(cfg.samples, 0xC0);
    auto rows = bphz_verify(mb, c, cfg.samples_pass2, derive_seed(cfg.seed, 0xB2));

    std::ostringstream res;
    res << "{\n  \"indices\": " << mb.set().size() << ",\n  \"counterterms\": [\n";
    bool first = true;
    for (const auto& b : mb.set().indices()) {
      const CountertermTable::Entry* e = c.entry(b);
      if (!e) continue;
      res << (first ? "" : ",\n");
      first = false;
      res << "    {\"index\": \"" << b.str() << "\", \"value\": " << e->value
          << ", \"ci3\": " << e->ci << ", \"forced_zero\": " << (e->forced_zero ? "true" : "false")
          << ", \"measured\": " << e->measured << ", \"measured_ci3\": " << e->measured_ci << "}";
    }
    res << "\n  ],\n  \"pass2\": [\n";
    first = true;
    bool all_ok = true;
    for (const auto& r : rows) {
      bool ok = std::abs(r.mean) <= r.ci3;
      all_ok = all_ok && ok;
      res << (first ? "" : ",\n");
      first = false;
      res << "    {\"index\": \"" << r.beta.str() << "\", \"mean\": " << r.mean
          << ", \"ci3\": " << r.ci3 << ", \"within_3sigma\": " << (ok ? "true" : "false") << "}";
    }
    res << "\n  ],\n  \"pass2_all_within_3sigma\": " << (all_ok ? "true" : "false") << "\n}\n";

    man.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out_dir.empty()) {
      write_file_atomic(out_dir + "/manifest.json", man.to_json());
      write_file_atomic(out_dir + "/results.json", res.str());
      std::cout << "wrote " << out_dir << "/results.json\n";
    } else {
      std::cout << res.str();
    }
    return 0;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

int cmd_check(const std::string& suite, std::uint64_t seed, int jobs) {
  CheckReport rep;
  GlobalConfig cfg;
  try {
    if (suite == "algebra" || suite == "all") {
      rep.merge(check_algebra_suite(cfg, 8, seed));
      rep.merge(check_group_laws(cfg, 6, 20, seed + 5));
    }
    if (suite == "kernel" || suite == "all") {
      KernelCheckConfig kc;
      rep.merge(check_kernel_suite(kc));
    }
    if (suite == "model" || suite == "all") {
      SimConfig sc;
      sc.n1 = 64;
      sc.n2 = 64;
      sc.h1 = 1.0 / 64;
      sc.h2 = sc.h1 * sc.h1;
      sc.jobs = jobs > 0 ? jobs : 2;
      ModelBuilder mb(sc);
      CountertermTable c = mb.estimate_counterterms(24, seed);
      rep.merge(check_symmetries(mb, derive_seed(seed, 3), c));
      std::unique_ptr<SpectralGrid> G(mb.make_grid());
      DerivativeReport dr = check_derivative_suite(mb, *G, derive_seed(seed, 4), c);
      rep.add("model-derivative-linearity", dr.linearity_residual <= 1e-10,
              std::to_string(dr.linearity_residual));
      rep.add("model-fd-slope", std::abs(dr.fd_slope - 1.0) <= 0.25, std::to_string(dr.fd_slope));
      rep.add("model-cfree-identity", dr.magic_residual_max <= 1e-8,
              std::to_string(dr.magic_residual_max));
      rep.add("model-first-order-vanishing", dr.vanishing_slope >= 0.9,
              std::to_string(dr.vanishing_slope));
      RecenterReport rr = check_recentering(mb, *G, derive_seed(seed, 5), c, 3, seed + 9);
      rep.add("model-recentering", rr.ok,
              "fit " + std::to_string(rr.fit_residual_max) + " trans " +
                  std::to_string(rr.transitivity_residual_max));
    }
  } catch (const std::exception& e) {
    std::cerr << "check suite error: " << e.what() << "\n";
    return 3;
  }
  for (const auto& r : rep.results)
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << (r.detail.empty() ? "" : "  [" + r.detail + "]")
              << "\n";
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-index regularity structure toolkit"};
  app.require_subcommand(1);

  auto* ind = app.add_subcommand("indices", "enumerate multi-indices under a cutoff");
  std::string alpha = "0.45";
  double hom_lt = -1, prec_le = -1;
  bool zero_k0 = false, no_pp = false, json = false;
  ind->add_option("--alpha", alpha, "alpha (exact decimal or p/q)");
  ind->add_option("--hom-lt", hom_lt, "homogeneity cutoff |beta| < value");
  ind->add_option("--prec-le", prec_le, "ordinal cutoff |beta|_prec <= value");
  ind->add_flag("--zero-k0", zero_k0, "restrict to beta(0)=0");
  ind->add_flag("--no-pp", no_pp, "exclude purely polynomial indices");
  ind->add_flag("--json", json, "machine output");

  auto* hier = app.add_subcommand("hierarchy", "print the renormalized PDE hierarchy");
  std::string format = "text", mode_s = "a0", indices_csv;
  bool h_formula = false;
  hier->add_option("--alpha", alpha, "alpha (exact decimal or p/q)");
  hier->add_option("--format", format, "text|latex|json");
  hier->add_option("--mode", mode_s, "a0|full");
  hier->add_option("--indices", indices_csv, "comma-separated indices (default: singular set)");
  hier->add_flag("--h-formula", h_formula, "also print the counterterm function h(u)");

  auto* sim = app.add_subcommand("simulate", "run the desk-scale model simulator");
  std::string config_path, out_dir;
  int samples = -1, jobs = 0;
  std::uint64_t seed = 0;
  sim->add_option("--config", config_path, "key=value config file");
  sim->add_option("--samples", samples, "override both ensemble sizes (0 = dry run)");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--seed", seed, "master seed override");
  sim->add_option("--jobs", jobs, "worker threads");
  bool force = false;
  sim->add_flag("--force", force, "allow writing into a non-empty output directory");

  auto* chk = app.add_subcommand("check", "run a verification suite");
  std::string suite = "all";
  std::uint64_t chk_seed = 20240901;
  chk->add_option("--suite", suite, "algebra|kernel|model|all");
  chk->add_option("--seed", chk_seed, "seed for randomized checks");
  chk->add_option("--jobs", jobs, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (ind->parsed()) return cmd_indices(alpha, hom_lt, prec_le, zero_k0, no_pp, json);
  if (hier->parsed()) return cmd_hierarchy(alpha, format, h_formula, mode_s, indices_csv);
  if (sim->parsed()) return cmd_simulate(config_path, samples, out_dir, seed, force, jobs);
  if (chk->parsed()) return cmd_check(suite, chk_seed, jobs);
  return 2;
}
