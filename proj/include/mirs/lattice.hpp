#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mirs/multiindex.hpp"

namespace mirs {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridPoint {
  int i1 = 0;
  int i2 = 0;
  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Real-valued function sampled on a periodic anisotropic space-time grid.
/// Row-major storage: data[i2 * n1 + i1]; x1 spacing h1, x2 spacing h2.
class LatticeField {
 public:
  LatticeField() = default;
  LatticeField(int n1, int n2, double h1, double h2);

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double h1() const { return h1_; }
  double h2() const { return h2_; }
  double len1() const { return n1_ * h1_; }
  double len2() const { return n2_ * h2_; }

  double& at(int i1, int i2) { return data_[idx(i1, i2)]; }
  double at(int i1, int i2) const { return data_[idx(i1, i2)]; }
  double at(const GridPoint& p) const { return at(p.i1, p.i2); }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_grid(const LatticeField& o) const {
    return n1_ == o.n1_ && n2_ == o.n2_ && h1_ == o.h1_ && h2_ == o.h2_;
  }

  LatticeField& operator+=(const LatticeField& o);
  LatticeField& operator-=(const LatticeField& o);
  LatticeField& operator*=(const LatticeField& o);  // pointwise
  LatticeField& operator*=(double s);
  friend LatticeField operator+(LatticeField a, const LatticeField& b) { return a += b; }
  friend LatticeField operator-(LatticeField a, const LatticeField& b) { return a -= b; }
  friend LatticeField operator*(LatticeField a, const LatticeField& b) { return a *= b; }
  friend LatticeField operator*(LatticeField a, double s) { return a *= s; }

  double mean() const;
  double max_abs() const;
  double rms() const;
  void check_finite(const std::string& what) const;

  /// wrapped displacement in cells: ((i-j+N/2) mod N) - N/2, with the seam
  /// cell at -N/2 mapped to 0 so that the wrap is odd-symmetric
  static double wrap_cells(int i, int j, int n);
  /// physical wrapped displacement components of p relative to base
  double disp1(const GridPoint& p, const GridPoint& base) const {
    return wrap_cells(p.i1, base.i1, n1_) * h1_;
  }
  double disp2(const GridPoint& p, const GridPoint& base) const {
    return wrap_cells(p.i2, base.i2, n2_) * h2_;
  }
  /// parabolic distance |p - base| with periodic wrapping
  double pdist(const GridPoint& p, const GridPoint& base) const {
    return std::abs(disp1(p, base)) + std::sqrt(std::abs(disp2(p, base)));
  }

  /// binary dump: 16-byte header (magic "MIRSFLD1", uint32 n1, uint32 n2),
  /// then n1*n2 little-endian float64 row-major; JSON sidecar with spacings
  void save(const std::string& path) const;
  static LatticeField load(const std::string& path);
  /// NPY v1.0 export (float64, shape (n2, n1))
  void save_npy(const std::string& path) const;

 private:
  std::size_t idx(int i1, int i2) const { return std::size_t(i2) * n1_ + i1; }
  int n1_ = 0, n2_ = 0;
  double h1_ = 0, h2_ = 0;
  std::vector<double> data_;
};

/// Polynomial in the wrapped displacement around a base point:
/// sum_n coef[n] * (x - base)^n, evaluated with the odd-symmetric wrap.
struct PolyPart {
  GridPoint base;
  std::map<Exponent2D, double> coef;  // includes n = (0,0) for constants

  bool empty() const { return coef.empty(); }
  double eval(const LatticeField& grid_like, const GridPoint& p) const;
  /// analytic first derivative in direction 1 or second derivative etc.
  PolyPart derivative(int d1, int d2) const;
  PolyPart& operator+=(const PolyPart& o);
  PolyPart scaled(double s) const;
};

/// Field in split representation: periodic part plus analytic polynomial
/// parts (possibly anchored at several base points).  Derivatives act
/// spectrally on the periodic slot and exactly on the polynomial slots,
/// which keeps monomial calculus free of seam artifacts.
struct SplitField {
  LatticeField periodic;
  std::vector<PolyPart> polys;

  void add_poly(const PolyPart& p);
  SplitField& operator+=(const SplitField& o);
  SplitField& operator-=(const SplitField& o);
  SplitField scaled(double s) const;

  double eval(const GridPoint& p) const {
    double v = periodic.n1() ? periodic.at(p) : 0.0;
    for (const auto& q : polys) v += q.eval(periodic, p);
    return v;
  }
  /// materialize onto the grid (periodic + evaluated polynomials)
  LatticeField materialize() const;
};

}  // namespace mirs
