#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "doctest.h"
#include "dctl/spectral.hpp"

using namespace dctl;

namespace {

DerivedParams params(double alpha, double mu, double eta, double zeta) {
  return DerivedParams::direct(alpha, mu, eta, zeta, 1.0, 0.2, 0.2, 1.0);
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("eta = 0 gives the uncoupled dispersion relations") {
  const auto d = params(-1.3, 0.01, 0.0, 0.02);
  for (int k = -50; k <= 50; ++k) {
    const auto [wp, wm] = omega(k, d);
    const double a = double(k) * k * k - 0.01 * k, b = -1.3 * k * k * k - 0.02 * k;
    CHECK(wp == doctest::Approx(a).epsilon(1e-15));
    CHECK(wm == doctest::Approx(b).epsilon(1e-15));
    const auto [zp, zm] = eigvec(k, d);
    if (k != 0) {
      CHECK(std::abs(zp[1]) < 1e-15);
      CHECK(std::abs(zm[0]) < 1e-15);
    }
  }
}

TEST_CASE("k = 0 has the double eigenvalue zero") {
  const auto w = omega(0, DerivedParams::defaults());
  CHECK(w.first == 0.0);
  CHECK(w.second == 0.0);
}

TEST_CASE("odd symmetry is exact") {
  const auto d = DerivedParams::defaults();
  for (int k = 1; k <= 500; ++k) {
    const auto a = omega(k, d), b = omega(-k, d);
    CHECK(a.first == -b.first);
    CHECK(a.second == -b.second);
  }
}

TEST_CASE("eigenpairs agree with a symmetric eigensolver") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> al(-3.0, -0.05), sm(-0.2, 0.2);
  for (int draw = 0; draw < 20; ++draw) {
    const auto d = params(al(rng), sm(rng), sm(rng), sm(rng));
    for (int k = -128; k <= 128; ++k) {
      const ModeMatrix m = mode_matrix(k, d);
      Eigen::Matrix2d M;
      M << m.a, m.c, m.c, m.b;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M);
      const auto [wp, wm] = omega(k, d);
      const double lo = std::min(wp, wm), hi = std::max(wp, wm);
      const double scale = std::max(1.0, M.norm());
      CHECK(std::abs(lo - es.eigenvalues()(0)) <= 1e-12 * scale);
      CHECK(std::abs(hi - es.eigenvalues()(1)) <= 1e-12 * scale);
      const auto [zp, zm] = eigvec(k, d);
      for (auto [z, w] : {std::pair{zp, wp}, std::pair{zm, wm}}) {
        const double r = std::hypot(m.a * z[0] + m.c * z[1] - w * z[0],
                                    m.c * z[0] + m.b * z[1] - w * z[1]);
        CHECK(r <= 1e-9 * (1 + std::abs(w)));
        CHECK(std::hypot(z[0], z[1]) == doctest::Approx(1.0).epsilon(1e-14));
      }
      CHECK(std::abs(zp[0] * zm[0] + zp[1] * zm[1]) <= 1e-12);
    }
  }
}

TEST_CASE("unnormalized minus vector tends to (0, 2(1 - alpha))") {
  const auto d = DerivedParams::defaults();
  const auto z = eigvec_raw(10000, d).second;
  CHECK(std::abs(z[0]) <= 1e-3);
  CHECK(std::abs(z[1] - 2 * (1 - d.alpha())) <= 1e-3);
}

TEST_CASE("ordered basis alternates branches") {
  const auto E = ordered_basis(8, DerivedParams::defaults());
  for (int k = -8; k <= 8; ++k) {
    const int b = (k % 2 == 0) ? 0 : 1;
    CHECK(E.ordered_branch[E.index(k)] == b);
    CHECK(E.ordered_omega[E.index(k)] == E.omega_of(k, b));
  }
}

TEST_CASE("plus gaps grow like 3k^2 + 3k + 1") {
  const auto d = DerivedParams::defaults();
  for (int k = 40; k <= 100; ++k) {
    const double g = omega(k + 1, d).first - omega(k, d).first;
    const double r = g / (3.0 * k * k + 3.0 * k + 1.0);
    CHECK(r >= 0.95);
    CHECK(r <= 1.05);
  }
  const GapReport rep = gap_report(64, d);
  CHECK(rep.plus_growth_coeff == doctest::Approx(1.0).epsilon(0.05));
  CHECK(rep.min_gap > 0);
  CHECK_THROWS_AS(gap_report(3, d), Error);
}

TEST_CASE("frequency clustering") {
  const auto cl = cluster_frequencies({1.0, 1.0, 2.0}, 1e-9);
  REQUIRE(cl.size() == 2);
  CHECK(cl[0].members.size() + cl[1].members.size() == 3);
  CHECK((cl[0].members.size() == 2 || cl[1].members.size() == 2));
  try {
    cluster_frequencies({1.0, 1.0, 1.0, 1.0}, 1e-9);
    FAIL("expected ClusterTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ClusterTooLarge);
  }
}

TEST_CASE("tol = 0 leaves only the k = 0 tie") {
  const auto rep = resonant_clusters(32, DerivedParams::defaults(), 0.0);
  int multi = 0;
  for (const auto& c : rep.clusters)
    if (c.members.size() > 1) {
      ++multi;
      for (auto m : c.members) CHECK(rep.labels[m].k == 0);
    }
  CHECK(multi == 1);
}

TEST_CASE("resonance function") {
  CHECK(h_resonance(0, 0, 0, 1, 2, 3, 4) == 0.0);
  for (int k = 1; k < 20; ++k) {
    const double b1 = 0.7, g1 = 0.3, b2 = -1.1, g2 = 0.2;
    CHECK(h_resonance(k, -k, 0, b1, g1, b2, g2) ==
          doctest::Approx((b1 - b2) * k * k * k - (g1 - g2) * k));
  }
  for (int k1 = -6; k1 <= 6; ++k1)
    for (int k2 = -6; k2 <= 6; ++k2) {
      const int k3 = -k1 - k2;
      CHECK(h_resonance(k1, k2, k3, 1.5, 0.0, 1.5, 0.0) ==
            doctest::Approx(3 * 1.5 * k1 * k2 * k3));
    }
  try {
    h_resonance(1, 1, 1, 1, 0, -1, 0);
    FAIL("expected NotOnGamma");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotOnGamma);
  }
}

TEST_CASE("delta scan") {
  // N = 2: permutations of (1,1,-2) and (-1,-1,2); H = +-8 or +-10.
  const auto s2 = delta_significance_scan(2, 1, 0, -1, 0);
  CHECK(s2.delta_min == doctest::Approx(9.0 / 2.0));
  CHECK(s2.hypothesis_ok);
  double prev = s2.delta_min;
  for (int n = 3; n <= 24; ++n) {
    const auto s = delta_significance_scan(n, 1, 0, -1, 0, 1);
    CHECK(s.delta_min <= prev);
    CHECK(s.delta_min > 0);
    prev = s.delta_min;
  }
  const auto a = delta_significance_scan(20, 1, 0.1, -1, 0.2, 1);
  const auto b = delta_significance_scan(20, 1, 0.1, -1, 0.2, 4);
  CHECK(a.delta_min == b.delta_min);
  CHECK(a.argmin == b.argmin);
  CHECK_FALSE(delta_significance_scan(5, 1, 0, 1, 0).hypothesis_ok);
}

TEST_CASE("parameter validation") {
  PhysParams p;
  p.alpha = 0.5;
  CHECK_THROWS_AS(derive_params(p), Error);
  CHECK_THROWS_AS(params(0.1, 0, 0, 0), Error);
  const auto d = params(-1.3, 0.5, 0.05, 0.5);
  CHECK_FALSE(param_warnings(d).empty());
  for (const auto& w : param_warnings(DerivedParams::defaults()))
    CHECK(w.find("smallness") == std::string::npos);
}

}  // TEST_SUITE
