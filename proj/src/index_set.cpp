#include "mirs/index_set.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace mirs {

namespace {

// Sound caps on generator ranges for the active cutoff; any index passing the
// filter satisfies them, so the scan below is complete.
struct Caps {
  int max_k;      // largest k generator
  int max_K;      // sum of k*beta(k) over k>=1
  int max_b0;     // beta(0)
  int max_N;      // number of n generators
  int max_pdeg;   // parabolic degree of a single n
};

Caps caps_for(const GlobalConfig& cfg, const EnumFilter& f) {
  Caps c{};
  if (f.prec_le4) {
    // 4(K - N) + 2S + b0 <= P with N <= K (populated) gives K <= P/2, and
    // since K >= N and b0 >= 0 also S <= P/2
    int P = std::max(0, *f.prec_le4);
    c.max_K = P / 2;
    c.max_k = std::max(1, c.max_K);
    c.max_b0 = P;
    c.max_N = c.max_K;
    c.max_pdeg = std::max(1, P / 2);
  } else {
    // hom_lt with zero_k0: alpha(1 + K - N) + S < H, S >= N
    double H = f.hom_lt->to_double();
    double a = cfg.alpha.to_double();
    c.max_K = (int)std::ceil(H / a) + (int)std::ceil(H) + 2;
    c.max_k = std::max(1, c.max_K);
    c.max_b0 = 0;
    c.max_N = (int)std::ceil(H) + 1;
    c.max_pdeg = (int)std::ceil(H) + 1;
  }
  // purely polynomial indices, when kept, are bounded directly by the cutoff
  return c;
}

bool passes(const MultiIndex& b, const GlobalConfig& cfg, const EnumFilter& f) {
  if (f.populated && !b.is_populated()) return false;
  if (f.exclude_pp && b.is_purely_polynomial()) return false;
  if (f.zero_k0 && b.beta0() > 0) return false;
  if (f.hom_lt && !(b.homogeneity(cfg.alpha) < *f.hom_lt)) return false;
  if (f.prec_le4 && b.prec4() > *f.prec_le4) return false;
  return true;
}

}  // namespace

std::vector<MultiIndex> enumerate_indices(const GlobalConfig& cfg, const EnumFilter& f) {
  cfg.validate();
  if (!f.hom_lt && !f.prec_le4)
    throw FilterError("enumerate: need a cutoff (hom_lt or prec_le)");
  if (f.hom_lt && !f.prec_le4 && !f.zero_k0)
    throw FilterError("enumerate: hom_lt alone is coercive only with zero_k0");
  if (!f.populated)
    throw FilterError("enumerate: cutoffs are coercive only on populated indices");

  Caps c = caps_for(cfg, f);

  std::set<MultiIndex> out;
  // k-part: multiplicities for k in [k0min, max_k]
  int k_lo = (f.zero_k0 && !f.prec_le4) ? 1 : 0;

  std::function<void(int, MultiIndex, int)> add_n_gens;
  std::function<void(int, MultiIndex, int)> add_k_gens;

  auto try_emit = [&](const MultiIndex& b) {
    if (passes(b, cfg, f)) out.insert(b);
  };

  // enumerate n generators on top of a fixed k-part
  std::vector<Exponent2D> nvals;
  for (int n1 = 0; n1 <= c.max_pdeg; ++n1)
    for (int n2 = 0; 2 * n2 <= c.max_pdeg - n1; ++n2)
      if (n1 + n2 > 0) nvals.push_back({n1, n2});

  add_n_gens = [&](int i, MultiIndex cur, int nleft) {
    try_emit(cur);
    if (i >= (int)nvals.size() || nleft == 0) return;
    add_n_gens(i + 1, cur, nleft);
    MultiIndex nxt = cur;
    for (int m = 1; m <= nleft; ++m) {
      nxt = nxt.plus(MultiIndex::unit_n(nvals[i]));
      add_n_gens(i + 1, nxt, nleft - m);
    }
  };

  add_k_gens = [&](int k, MultiIndex cur, int Kleft) {
    // n-part budget: populated needs N <= K_total, pp handled by single units
    int N_budget = std::min(c.max_N, cur.noise_hom() + 0);
    add_n_gens(0, cur, std::max(N_budget, 0));
    if (k > c.max_k) return;
    add_k_gens(k + 1, cur, Kleft);
    if (k == 0) {
      if (k_lo > 0) return;
      MultiIndex nxt = cur;
      for (int m = 1; m <= c.max_b0; ++m) {
        nxt = nxt.plus(MultiIndex::unit_k(0));
        add_k_gens(k + 1, nxt, Kleft);
      }
    } else {
      MultiIndex nxt = cur;
      for (int m = 1; m * k <= Kleft; ++m) {
        nxt = nxt.plus(MultiIndex::unit_k(k));
        add_k_gens(k + 1, nxt, Kleft - m * k);
      }
    }
  };

  add_k_gens(0, MultiIndex(), c.max_K);

  // purely polynomial singletons (unless excluded): prec4(e_n) = 2|n| - 4,
  // so their degree range is wider than the composite n-part cap
  if (!f.exclude_pp) {
    int pp_pdeg = c.max_pdeg + 2;
    if (f.prec_le4) pp_pdeg = std::max(1, (*f.prec_le4 + 4) / 2);
    for (int n1 = 0; n1 <= pp_pdeg; ++n1)
      for (int n2 = 0; 2 * n2 <= pp_pdeg - n1; ++n2)
        if (n1 + n2 > 0) try_emit(MultiIndex::unit_n({n1, n2}));
  }

  std::vector<MultiIndex> v(out.begin(), out.end());
  std::sort(v.begin(), v.end(),
            [&](const MultiIndex& a, const MultiIndex& b) { return enum_less(a, b, cfg.alpha); });
  return v;
}

IndexSet::IndexSet(std::vector<MultiIndex> indices, Rational alpha)
    : idx_(std::move(indices)), alpha_(alpha) {
  std::sort(idx_.begin(), idx_.end(),
            [&](const MultiIndex& a, const MultiIndex& b) { return enum_less(a, b, alpha_); });
  idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
  for (std::size_t i = 0; i < idx_.size(); ++i) {
    if (!idx_[i].is_populated())
      throw std::invalid_argument("IndexSet: non-populated index " + idx_[i].str());
    pos_[idx_[i]] = (int)i;
  }
  for (const auto& b : idx_)
    b.for_each_subindex([this](const MultiIndex& s) { sub_.insert(s); });
}

int IndexSet::position(const MultiIndex& b) const {
  auto it = pos_.find(b);
  if (it == pos_.end())
    throw std::out_of_range("index " + b.str() + " outside the working set");
  return it->second;
}

void IndexSet::check_non_integrality(double eps) const {
  for (const auto& b : idx_) {
    if (b.is_purely_polynomial()) continue;
    double h = b.homogeneity(alpha_).to_double();
    if (std::abs(h - std::round(h)) < eps)
      throw std::runtime_error("homogeneity of " + b.str() +
                               " is within eps of an integer; pick a different alpha");
  }
}

}  // namespace mirs
