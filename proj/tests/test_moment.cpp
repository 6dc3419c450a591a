#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dctl/config.hpp"
#include "dctl/evolution.hpp"
#include "dctl/moment.hpp"

using namespace dctl;
using std::numbers::pi;

namespace {

StatePair random_pair(int n, std::uint64_t seed, double amplitude) {
  DataSpec s;
  s.type = "random";
  s.amplitude = amplitude;
  return s.build(n, DerivedParams::defaults(), seed);
}

}  // namespace

TEST_SUITE("moment") {

TEST_CASE("gram entries") {
  CHECK(gram_entry(2.0, 2.0, 1.5) == cplx(1.5, 0.0));
  const cplx g = gram_entry(3.0, 1.0, 0.7);
  const cplx ref = (std::exp(cplx(0, 2.0 * 0.7)) - 1.0) / cplx(0, 2.0);
  CHECK(std::abs(g - ref) < 1e-15);
  CHECK(std::abs(gram_entry(1e-9, 0.0, 1.0) - cplx(1.0, 0.5e-9)) < 1e-15);
}

TEST_CASE("biorthogonal family against quadrature") {
  const std::vector<double> freqs{-7.0, -1.5, 0.0, 2.0, 9.5, 30.0};
  const double T = 1.0;
  const BiorthogonalFamily fam = build_biorthogonal(freqs, T);
  CHECK(fam.residual < 1e-10);
  const int m = 4000;
  for (std::size_t j = 0; j < freqs.size(); ++j)
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      cplx s = 0;
      for (int i = 0; i <= m; ++i) {
        const double t = T * i / m;
        const double w = (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
        s += w * std::polar(1.0, freqs[k] * t) * fam.q(int(j), t);
      }
      s *= T / (3.0 * m);
      CHECK(std::abs(s - (j == k ? 1.0 : 0.0)) < 1e-8);
    }
}

TEST_CASE("near-duplicate frequencies are ill conditioned") {
  try {
    build_biorthogonal({0.0, 1e-9, 5.0}, 1.0);
    FAIL("expected IllConditioned");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllConditioned);
  }
}

TEST_CASE("zero data give the zero plan") {
  const int n = 8;
  const GOperator G(GainProfile::bump(n, pi, 1.0));
  const StatePair z(n);
  const ControlPlan p = synthesize_linear(z, z, 1.0, DerivedParams::defaults(), G,
                                          SynthOptions::for_horizon(1.0));
  CHECK(p.is_zero());
  CHECK(p.f_at(0.3).max_abs() == 0.0);
}

TEST_CASE("linear steering at small N") {
  const int n = 8;
  const auto d = DerivedParams::defaults();
  const GOperator G(GainProfile::bump(n, pi, 1.0));
  const StatePair x0 = random_pair(n, 1, 1.0), x1 = random_pair(n, 2, 1.0);
  const ControlPlan p = synthesize_linear(x0, x1, 1.0, d, G, SynthOptions::for_horizon(1.0));
  CHECK(p.labels.size() == std::size_t(4 * n));
  CHECK(p.gram_cond >= 1.0);
  EvolutionConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_end = 1.0;
  Attachments att;
  att.G = &G;
  att.plan = &p;
  const Trajectory tr = run(cfg, x0, Mode::Linear, d, att);
  CHECK(l2_norm(tr.final_state - x1) < 1e-6);

  const PlanNorm pn = plan_norm(p, x0, x1, 0.0);
  CHECK(pn.ratio > 0);
  CHECK(std::isfinite(pn.ratio));

  const ControlPlan q = ControlPlan::from_json(p.to_json());
  std::vector<cplx> a(n + 1), b(n + 1), c(n + 1), e(n + 1);
  for (double t : {0.0, 0.41, 1.0}) {
    p.input_at(t, a.data(), b.data());
    q.input_at(t, c.data(), e.data());
    for (int k = 0; k <= n; ++k) {
      CHECK(a[k] == c[k]);
      CHECK(b[k] == e[k]);
    }
  }

  const ControlMaps maps = phi_psi(x0, x1, 1.0, d, G, SynthOptions::for_horizon(1.0));
  const PeriodicField f = maps.phi(0.25), g = p.f_at(0.25);
  for (int k = 0; k <= n; ++k) CHECK(std::abs(f[k] - g[k]) < 1e-12 * (1 + g.max_abs()));
  CHECK(maps.psi(0.25).n_modes() == n);
}

TEST_CASE("synthesis preconditions") {
  const int n = 6;
  const auto d = DerivedParams::defaults();
  const GOperator G(GainProfile::bump(n, pi, 1.0));
  StatePair x0 = random_pair(n, 3, 1.0);
  const StatePair x1(n);
  const GOperator E(GainProfile::empty(n));
  try {
    synthesize_linear(x0, x1, 1.0, d, E, SynthOptions::for_horizon(1.0));
    FAIL("expected ClusterSingular");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ClusterSingular);
  }
  x0.u.set(0, 0.5);
  CHECK_THROWS_AS(synthesize_linear(x0, x1, 1.0, d, G, SynthOptions::for_horizon(1.0)), Error);
  CHECK_THROWS_AS(synthesize_linear(x1, x1, -1.0, d, G, SynthOptions::for_horizon(1.0)), Error);
}

TEST_CASE("local nonlinear steering contracts") {
  const int n = 8;
  const auto d = DerivedParams::defaults();
  const GOperator G(GainProfile::bump(n, pi, 1.0));
  const StatePair x0 = random_pair(n, 4, 1e-3), x1 = random_pair(n, 5, 1e-3);
  SteerOptions opt;
  opt.dt = 2e-4;
  opt.synth = SynthOptions::for_horizon(1.0);
  const SteerResult r = steer_nonlinear(x0, x1, 1.0, d, G, opt);
  CHECK(r.converged);
  CHECK(r.history.size() <= 8);
  for (std::size_t i = 1; i < r.history.size(); ++i)
    CHECK(r.history[i].distance < r.history[i - 1].distance);
  CHECK(r.terminal_error < 1e-5);

  const StatePair z(n);
  const SteerResult zr = steer_nonlinear(z, z, 1.0, d, G, opt);
  CHECK(zr.converged);
  CHECK(zr.history.size() == 1);
}

}  // TEST_SUITE
