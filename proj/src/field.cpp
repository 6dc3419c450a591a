#include "dctl/field.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

#include "fft.hpp"
#include "json.hpp"

namespace dctl {

using std::numbers::pi;

PeriodicField::PeriodicField(int n_modes) : n_(n_modes), c_(n_modes + 1, cplx(0.0)) {
  if (n_modes < 0) throw Error(ErrorCode::InvalidArgument, "negative truncation");
}

PeriodicField::PeriodicField(int n_modes, std::vector<cplx> half)
    : n_(n_modes), c_(std::move(half)) {
  if (static_cast<int>(c_.size()) != n_ + 1)
    throw Error(ErrorCode::InvalidArgument, "coefficient count does not match truncation");
  c_[0] = cplx(c_[0].real(), 0.0);
}

cplx PeriodicField::coeff(int k) const {
  if (k > n_ || k < -n_) return 0.0;
  return k >= 0 ? c_[k] : std::conj(c_[-k]);
}

void PeriodicField::set(int k, cplx value) {
  if (k > n_ || k < -n_) throw Error(ErrorCode::InvalidArgument, "mode outside truncation");
  if (k == 0)
    c_[0] = cplx(value.real(), 0.0);
  else if (k > 0)
    c_[k] = value;
  else
    c_[-k] = std::conj(value);
}

double PeriodicField::max_abs() const {
  double m = 0;
  for (const auto& z : c_) m = std::max(m, std::abs(z));
  return m;
}

PeriodicField& PeriodicField::operator+=(const PeriodicField& o) {
  if (o.n_ != n_) throw Error(ErrorCode::InvalidArgument, "truncation mismatch");
  for (int k = 0; k <= n_; ++k) c_[k] += o.c_[k];
  return *this;
}

PeriodicField& PeriodicField::operator-=(const PeriodicField& o) {
  if (o.n_ != n_) throw Error(ErrorCode::InvalidArgument, "truncation mismatch");
  for (int k = 0; k <= n_; ++k) c_[k] -= o.c_[k];
  return *this;
}

PeriodicField& PeriodicField::operator*=(double s) {
  for (auto& z : c_) z *= s;
  return *this;
}

StatePair::StatePair(PeriodicField a, PeriodicField b) : u(std::move(a)), v(std::move(b)) {
  if (u.n_modes() != v.n_modes()) throw Error(ErrorCode::InvalidArgument, "truncation mismatch");
}

StatePair& StatePair::operator+=(const StatePair& o) {
  u += o.u;
  v += o.v;
  return *this;
}

StatePair& StatePair::operator-=(const StatePair& o) {
  u -= o.u;
  v -= o.v;
  return *this;
}

StatePair& StatePair::operator*=(double s) {
  u *= s;
  v *= s;
  return *this;
}

double hs_norm(const PeriodicField& f, double s) {
  double acc = 0;
  for (int k = f.n_modes(); k >= 0; --k) {
    const double w = std::pow(1.0 + k, 2 * s);
    acc += (k == 0 ? 1.0 : 2.0) * w * std::norm(f[k]);
  }
  return std::sqrt(2 * pi * acc);
}

double l2_norm(const StatePair& w) { return hs_norm(w, 0.0); }

double hs_norm(const StatePair& w, double s) {
  const double a = hs_norm(w.u, s), b = hs_norm(w.v, s);
  return std::sqrt(a * a + b * b);
}

double inner(const PeriodicField& f, const PeriodicField& g) {
  if (f.n_modes() != g.n_modes()) throw Error(ErrorCode::InvalidArgument, "truncation mismatch");
  double acc = (f[0] * std::conj(g[0])).real();
  for (int k = 1; k <= f.n_modes(); ++k) acc += 2 * (f[k] * std::conj(g[k])).real();
  return 2 * pi * acc;
}

PeriodicField dx(const PeriodicField& f) {
  PeriodicField out(f.n_modes());
  for (int k = 1; k <= f.n_modes(); ++k) out[k] = cplx(0.0, double(k)) * f[k];
  return out;
}

int fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

std::vector<double> to_grid(const PeriodicField& f, int n_pts) {
  if (n_pts < 2 * f.n_modes() + 1)
    throw Error(ErrorCode::GridTooCoarse, "grid needs at least 2N+1 points");
  std::vector<double> out(n_pts);
  detail::synth(f.half().data(), f.n_modes(), n_pts, out.data());
  return out;
}

PeriodicField from_grid(const std::vector<double>& samples, int n_modes) {
  const int m = static_cast<int>(samples.size());
  if (m < 2 * n_modes + 1) throw Error(ErrorCode::GridTooCoarse, "grid needs at least 2N+1 points");
  PeriodicField f(n_modes);
  detail::analyze(samples.data(), m, n_modes, f.half().data());
  f[0] = cplx(f[0].real(), 0.0);
  return f;
}

PeriodicField product(const PeriodicField& f, const PeriodicField& g) {
  if (f.n_modes() != g.n_modes()) throw Error(ErrorCode::InvalidArgument, "truncation mismatch");
  const int n = f.n_modes();
  const int m = fft_size(3 * n + 1);
  std::vector<double> a(m), b(m);
  detail::synth(f.half().data(), n, m, a.data());
  detail::synth(g.half().data(), n, m, b.data());
  for (int j = 0; j < m; ++j) a[j] *= b[j];
  return from_grid(a, n);
}

EigenCoeffs eigen_expand(const StatePair& w, const Eigensystem& E) {
  const int n = w.n_modes();
  if (n != E.n_modes) throw Error(ErrorCode::InvalidArgument, "truncation mismatch");
  EigenCoeffs a;
  a.n_modes = n;
  a.plus.resize(n + 1);
  a.minus.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    const Vec2& zp = E.z_of(k, 0);
    const Vec2& zm = E.z_of(k, 1);
    a.plus[k] = zp[0] * w.u[k] + zp[1] * w.v[k];
    a.minus[k] = zm[0] * w.u[k] + zm[1] * w.v[k];
  }
  return a;
}

StatePair eigen_reconstruct(const EigenCoeffs& a, const Eigensystem& E) {
  StatePair w(a.n_modes);
  for (int k = 0; k <= a.n_modes; ++k) {
    const Vec2& zp = E.z_of(k, 0);
    const Vec2& zm = E.z_of(k, 1);
    w.u[k] = zp[0] * a.plus[k] + zm[0] * a.minus[k];
    w.v[k] = zp[1] * a.plus[k] + zm[1] * a.minus[k];
  }
  w.u[0] = cplx(w.u[0].real(), 0.0);
  w.v[0] = cplx(w.v[0].real(), 0.0);
  return w;
}

std::string field_to_json(const PeriodicField& f) {
  nlohmann::json arr = nlohmann::json::array();
  for (int k = -f.n_modes(); k <= f.n_modes(); ++k) {
    const cplx z = f.coeff(k);
    arr.push_back({k, z.real(), z.imag()});
  }
  return arr.dump();
}

PeriodicField field_from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  if (!arr.is_array()) throw Error(ErrorCode::ConfigError, "field must be an array");
  int n = 0;
  for (const auto& t : arr) {
    if (!t.is_array() || t.size() != 3) throw Error(ErrorCode::ConfigError, "entries are [k, re, im]");
    n = std::max(n, std::abs(t[0].get<int>()));
  }
  PeriodicField f(n);
  for (const auto& t : arr) {
    const int k = t[0].get<int>();
    if (k >= 0) f.set(k, cplx(t[1].get<double>(), t[2].get<double>()));
  }
  return f;
}

namespace {

void put_f64(std::ostream& os, double x) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

bool get_f64(std::istream& is, double& x) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) return false;
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
  x = std::bit_cast<double>(bits);
  return true;
}

}  // namespace

void write_field_binary(std::ostream& os, const PeriodicField& f) {
  for (int k = 0; k <= f.n_modes(); ++k) {
    put_f64(os, double(k));
    put_f64(os, f[k].real());
    put_f64(os, f[k].imag());
  }
}

PeriodicField read_field_binary(std::istream& is) {
  std::vector<cplx> half;
  double k, re, im;
  while (get_f64(is, k)) {
    if (!get_f64(is, re) || !get_f64(is, im))
      throw Error(ErrorCode::ConfigError, "truncated binary field");
    if (k != double(half.size())) throw Error(ErrorCode::ConfigError, "binary field out of order");
    half.emplace_back(re, im);
  }
  if (half.empty()) throw Error(ErrorCode::ConfigError, "empty binary field");
  const int n = static_cast<int>(half.size()) - 1;
  return PeriodicField(n, std::move(half));
}

}  // namespace dctl
