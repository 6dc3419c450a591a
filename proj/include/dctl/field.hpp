#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dctl/spectral.hpp"

namespace dctl {

// Real periodic field on [0, 2pi), coefficients of e^{ikx} with f^(k) = (1/2pi) int f e^{-ikx}.
// Only k = 0..N are stored; negative modes are the conjugates.
class PeriodicField {
public:
  PeriodicField() = default;
  explicit PeriodicField(int n_modes);
  PeriodicField(int n_modes, std::vector<cplx> half);

  int n_modes() const { return n_; }
  cplx coeff(int k) const;
  // Setting k also sets -k; the k = 0 entry keeps only its real part.
  void set(int k, cplx value);
  cplx& operator[](int k) { return c_[k]; }
  const cplx& operator[](int k) const { return c_[k]; }
  const std::vector<cplx>& half() const { return c_; }
  std::vector<cplx>& half() { return c_; }
  double mean() const { return c_.empty() ? 0.0 : c_[0].real(); }
  bool zero_mean(double tol = 0.0) const { return std::abs(mean()) <= tol; }
  double max_abs() const;

  PeriodicField& operator+=(const PeriodicField& o);
  PeriodicField& operator-=(const PeriodicField& o);
  PeriodicField& operator*=(double s);
  friend PeriodicField operator+(PeriodicField a, const PeriodicField& b) { return a += b; }
  friend PeriodicField operator-(PeriodicField a, const PeriodicField& b) { return a -= b; }
  friend PeriodicField operator*(double s, PeriodicField a) { return a *= s; }
  bool operator==(const PeriodicField& o) const { return n_ == o.n_ && c_ == o.c_; }

private:
  int n_ = 0;
  std::vector<cplx> c_;
};

struct StatePair {
  PeriodicField u, v;

  StatePair() = default;
  explicit StatePair(int n) : u(n), v(n) {}
  StatePair(PeriodicField a, PeriodicField b);
  int n_modes() const { return u.n_modes(); }
  StatePair& operator+=(const StatePair& o);
  StatePair& operator-=(const StatePair& o);
  StatePair& operator*=(double s);
  friend StatePair operator+(StatePair a, const StatePair& b) { return a += b; }
  friend StatePair operator-(StatePair a, const StatePair& b) { return a -= b; }
  friend StatePair operator*(double s, StatePair a) { return a *= s; }
  bool operator==(const StatePair& o) const { return u == o.u && v == o.v; }
};

double hs_norm(const PeriodicField& f, double s);
double l2_norm(const StatePair& w);
double hs_norm(const StatePair& w, double s);
double inner(const PeriodicField& f, const PeriodicField& g);  // real L2 inner product

PeriodicField dx(const PeriodicField& f);

// Smallest 2^a 3^b 5^c at least n.
int fft_size(int n);

std::vector<double> to_grid(const PeriodicField& f, int n_pts);
PeriodicField from_grid(const std::vector<double>& samples, int n_modes);

// Dealiased pointwise product, mean kept.
PeriodicField product(const PeriodicField& f, const PeriodicField& g);

// Coefficients (a_k^+, a_k^-) = (Z_k^+ . y_k, Z_k^- . y_k) for k = 0..N, y_k = (u^(k), v^(k)).
struct EigenCoeffs {
  int n_modes = 0;
  std::vector<cplx> plus, minus;
};
EigenCoeffs eigen_expand(const StatePair& w, const Eigensystem& E);
StatePair eigen_reconstruct(const EigenCoeffs& a, const Eigensystem& E);

// JSON array of [k, re, im] for k = -N..N.
std::string field_to_json(const PeriodicField& f);
PeriodicField field_from_json(const std::string& text);

// Little-endian f64 triplets (k, re, im) for k = 0..N.
void write_field_binary(std::ostream& os, const PeriodicField& f);
PeriodicField read_field_binary(std::istream& is);

}  // namespace dctl
