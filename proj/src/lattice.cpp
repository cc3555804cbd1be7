#include "mirs/lattice.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mirs {

namespace {
bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

LatticeField::LatticeField(int n1, int n2, double h1, double h2)
    : n1_(n1), n2_(n2), h1_(h1), h2_(h2), data_(std::size_t(n1) * n2, 0.0) {
  if (!is_pow2(n1) || !is_pow2(n2))
    throw std::invalid_argument("LatticeField: sample counts must be powers of two");
  if (!(h1 > 0) || !(h2 > 0)) throw std::invalid_argument("LatticeField: spacings must be positive");
}

LatticeField& LatticeField::operator+=(const LatticeField& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}
LatticeField& LatticeField::operator-=(const LatticeField& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}
LatticeField& LatticeField::operator*=(const LatticeField& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] *= o.data_[i];
  return *this;
}
LatticeField& LatticeField::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

double LatticeField::mean() const {
  double s = 0;
  for (double v : data_) s += v;
  return s / double(data_.size());
}

double LatticeField::max_abs() const {
  double m = 0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double LatticeField::rms() const {
  double s = 0;
  for (double v : data_) s += v * v;
  return std::sqrt(s / double(data_.size()));
}

void LatticeField::check_finite(const std::string& what) const {
  for (double v : data_)
    if (!std::isfinite(v)) throw NumericalError("non-finite values in " + what);
}

double LatticeField::wrap_cells(int i, int j, int n) {
  int d = ((i - j) % n + n + n / 2) % n - n / 2;
  if (d == -n / 2) return 0.0;  // odd-symmetric seam convention
  return double(d);
}

void LatticeField::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  const char magic[8] = {'M', 'I', 'R', 'S', 'F', 'L', 'D', '1'};
  std::uint32_t d1 = (std::uint32_t)n1_, d2 = (std::uint32_t)n2_;
  f.write(magic, 8);
  f.write(reinterpret_cast<const char*>(&d1), 4);
  f.write(reinterpret_cast<const char*>(&d2), 4);
  f.write(reinterpret_cast<const char*>(data_.data()), (std::streamsize)(data_.size() * 8));
  std::ofstream side(path + ".json");
  side << "{\"n1\": " << n1_ << ", \"n2\": " << n2_ << ", \"h1\": " << h1_
       << ", \"h2\": " << h2_ << "}\n";
}

LatticeField LatticeField::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (std::memcmp(magic, "MIRSFLD1", 8) != 0) throw std::runtime_error("bad field magic");
  std::uint32_t d1, d2;
  f.read(reinterpret_cast<char*>(&d1), 4);
  f.read(reinterpret_cast<char*>(&d2), 4);
  double h1 = 1, h2 = 1;
  {
    std::ifstream side(path + ".json");
    if (side) {
      std::string all((std::istreambuf_iterator<char>(side)), std::istreambuf_iterator<char>());
      auto grab = [&all](const std::string& key) {
        auto p = all.find("\"" + key + "\"");
        if (p == std::string::npos) return 1.0;
        p = all.find(':', p);
        return std::stod(all.substr(p + 1));
      };
      h1 = grab("h1");
      h2 = grab("h2");
    }
  }
  LatticeField out((int)d1, (int)d2, h1, h2);
  f.read(reinterpret_cast<char*>(out.data().data()), (std::streamsize)(out.data().size() * 8));
  if (!f) throw std::runtime_error("truncated field file " + path);
  return out;
}

void LatticeField::save_npy(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(n2_) + ", " + std::to_string(n1_) + "), }";
  std::size_t total = 10 + header.size() + 1;
  std::size_t pad = (64 - total % 64) % 64;
  header += std::string(pad, ' ');
  header += '\n';
  const char magic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};
  f.write(magic, 6);
  char ver[2] = {1, 0};
  f.write(ver, 2);
  std::uint16_t hl = (std::uint16_t)header.size();
  f.write(reinterpret_cast<const char*>(&hl), 2);
  f.write(header.data(), (std::streamsize)header.size());
  f.write(reinterpret_cast<const char*>(data_.data()), (std::streamsize)(data_.size() * 8));
}

double PolyPart::eval(const LatticeField& g, const GridPoint& p) const {
  if (coef.empty()) return 0.0;
  double d1 = LatticeField::wrap_cells(p.i1, base.i1, g.n1()) * g.h1();
  double d2 = LatticeField::wrap_cells(p.i2, base.i2, g.n2()) * g.h2();
  double v = 0;
  for (const auto& [n, c] : coef) v += c * std::pow(d1, n.n1) * std::pow(d2, n.n2);
  return v;
}

PolyPart PolyPart::derivative(int d1, int d2) const {
  PolyPart out;
  out.base = base;
  for (const auto& [n, c] : coef) {
    if (n.n1 < d1 || n.n2 < d2) continue;
    double f = c;
    for (int q = 0; q < d1; ++q) f *= (n.n1 - q);
    for (int q = 0; q < d2; ++q) f *= (n.n2 - q);
    if (f != 0.0) out.coef[{n.n1 - d1, n.n2 - d2}] += f;
  }
  return out;
}

PolyPart& PolyPart::operator+=(const PolyPart& o) {
  if (coef.empty()) {
    *this = o;
    return *this;
  }
  if (o.coef.empty()) return *this;
  if (!(base == o.base))
    throw std::invalid_argument("PolyPart: mismatched base points in addition");
  for (const auto& [n, c] : o.coef) {
    coef[n] += c;
    if (coef[n] == 0.0) coef.erase(n);
  }
  return *this;
}

PolyPart PolyPart::scaled(double s) const {
  PolyPart out;
  out.base = base;
  if (s == 0.0) return out;
  for (const auto& [n, c] : coef) out.coef[n] = c * s;
  return out;
}

void SplitField::add_poly(const PolyPart& p) {
  if (p.empty()) return;
  for (auto& q : polys)
    if (q.base == p.base) {
      q += p;
      return;
    }
  polys.push_back(p);
}

SplitField& SplitField::operator+=(const SplitField& o) {
  if (o.periodic.n1()) {
    if (periodic.n1())
      periodic += o.periodic;
    else
      periodic = o.periodic;
  }
  for (const auto& q : o.polys) add_poly(q);
  return *this;
}

SplitField& SplitField::operator-=(const SplitField& o) {
  *this += o.scaled(-1.0);
  return *this;
}

SplitField SplitField::scaled(double s) const {
  SplitField out;
  if (periodic.n1()) {
    out.periodic = periodic;
    out.periodic *= s;
  }
  for (const auto& q : polys) out.add_poly(q.scaled(s));
  return out;
}

LatticeField SplitField::materialize() const {
  LatticeField out = periodic;
  for (const auto& q : polys) {
    if (q.empty()) continue;
    for (int i2 = 0; i2 < out.n2(); ++i2)
      for (int i1 = 0; i1 < out.n1(); ++i1) out.at(i1, i2) += q.eval(out, {i1, i2});
  }
  return out;
}

}  // namespace mirs
