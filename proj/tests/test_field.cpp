#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dctl/field.hpp"

using namespace dctl;
using std::numbers::pi;

namespace {

PeriodicField random_field(int n, std::uint64_t seed, bool zero_mean = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  PeriodicField f(n);
  for (int k = zero_mean ? 1 : 0; k <= n; ++k) f.set(k, {nd(rng), k == 0 ? 0.0 : nd(rng)});
  return f;
}

}  // namespace

TEST_SUITE("field") {

TEST_CASE("fft sizes are 5-smooth") {
  CHECK(fft_size(1) == 1);
  CHECK(fft_size(7) == 8);
  CHECK(fft_size(97) == 100);
  CHECK(fft_size(129) == 135);
}

TEST_CASE("conjugate symmetry") {
  PeriodicField f(4);
  f.set(2, {1.0, -3.0});
  CHECK(f.coeff(-2) == cplx(1.0, 3.0));
  f.set(0, {2.0, 5.0});
  CHECK(f.coeff(0).imag() == 0.0);
}

TEST_CASE("grid round trip") {
  const PeriodicField f = random_field(16, 1, false);
  for (int m : {33, 48, 100}) {
    const PeriodicField g = from_grid(to_grid(f, m), 16);
    for (int k = 0; k <= 16; ++k) CHECK(std::abs(g[k] - f[k]) < 1e-13);
  }
  try {
    to_grid(f, 32);
    FAIL("expected GridTooCoarse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
}

TEST_CASE("grid values match the Fourier sum") {
  const PeriodicField f = random_field(5, 2, false);
  const int m = 16;
  const auto g = to_grid(f, m);
  for (int j = 0; j < m; ++j) {
    cplx s = 0;
    for (int k = -5; k <= 5; ++k) s += f.coeff(k) * std::polar(1.0, 2 * pi * j * k / m);
    CHECK(g[j] == doctest::Approx(s.real()).epsilon(1e-12));
  }
}

TEST_CASE("product is the truncated convolution") {
  const int n = 12;
  const PeriodicField f = random_field(n, 3, false), g = random_field(n, 4, false);
  const PeriodicField p = product(f, g);
  for (int k = 0; k <= n; ++k) {
    cplx s = 0;
    for (int m = -n; m <= n; ++m)
      if (std::abs(k - m) <= n) s += f.coeff(m) * g.coeff(k - m);
    CHECK(std::abs(p[k] - s) < 1e-12);
  }
}

TEST_CASE("norms and derivative") {
  PeriodicField f(8);
  f.set(3, {1.0, 0.0});
  // f = 2 cos 3x, ||f||^2 = 4 pi.
  CHECK(hs_norm(f, 0) == doctest::Approx(std::sqrt(4 * pi)));
  CHECK(hs_norm(f, 1) == doctest::Approx(4 * std::sqrt(4 * pi)));
  const PeriodicField d = dx(f);
  CHECK(d[3] == cplx(0.0, 3.0));
  const PeriodicField a = random_field(8, 5), b = random_field(8, 6);
  const auto ga = to_grid(a, 64), gb = to_grid(b, 64);
  double s = 0;
  for (int j = 0; j < 64; ++j) s += ga[j] * gb[j];
  CHECK(inner(a, b) == doctest::Approx(s * 2 * pi / 64).epsilon(1e-12));
}

TEST_CASE("eigen expansion round trip") {
  const auto E = ordered_basis(10, DerivedParams::defaults());
  StatePair w(random_field(10, 7), random_field(10, 8));
  const StatePair back = eigen_reconstruct(eigen_expand(w, E), E);
  for (int k = 0; k <= 10; ++k) {
    CHECK(std::abs(back.u[k] - w.u[k]) < 1e-14);
    CHECK(std::abs(back.v[k] - w.v[k]) < 1e-14);
  }
}

TEST_CASE("json and binary serialization") {
  const PeriodicField f = random_field(6, 9, false);
  CHECK(field_from_json(field_to_json(f)) == f);
  std::stringstream ss;
  write_field_binary(ss, f);
  CHECK(ss.str().size() == 7 * 3 * 8);
  CHECK(read_field_binary(ss) == f);
}

}  // TEST_SUITE
