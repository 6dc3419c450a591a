// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "dctl/config.hpp"
#include "dctl/evolution.hpp"
#include "dctl/moment.hpp"
#include "dctl/spectral.hpp"

using namespace dctl;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

// delta_min for (b1, b2) = (1, -1), gamma = 0, N = 30: triple (-1, -29, 30), H = -2612.
constexpr double kDeltaN30 = 2613.0 / 870.0;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += "; over time budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %s: %s (%.2fs, budget %.0fs)\n", o.pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), secs, budget_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

StatePair preset(const std::string& type, int n, double amplitude, std::uint64_t seed,
                 std::uint64_t offset = 0, std::uint64_t draw = 0) {
  DataSpec s;
  s.type = type;
  s.amplitude = amplitude;
  s.seed_offset = offset;
  return s.build(n, DerivedParams::defaults(), seed, draw);
}

Outcome spectral_correctness() {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> al(-3.0, -0.1), sm(-0.2, 0.2);
  double worst_res = 0, worst_val = 0, worst_vec = 0;
  for (int draw = 0; draw < 50; ++draw) {
    const auto d = DerivedParams::direct(al(rng), sm(rng), sm(rng), sm(rng), 1, 0.2, 0.2, 1);
    for (int k = -128; k <= 128; ++k) {
      const ModeMatrix m = mode_matrix(k, d);
      Eigen::Matrix2d M;
      M << m.a, m.c, m.c, m.b;
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M);
      const auto [wp, wm] = omega(k, d);
      const auto [zp, zm] = eigvec(k, d);
      for (int b = 0; b < 2; ++b) {
        const double w = b == 0 ? wp : wm;
        const Vec2& z = b == 0 ? zp : zm;
        const double r = std::hypot(m.a * z[0] + m.c * z[1] - w * z[0],
                                    m.c * z[0] + m.b * z[1] - w * z[1]);
        worst_res = std::max(worst_res, r / (1 + std::abs(w)));
        // nearest oracle eigenvalue
        const int j = std::abs(w - es.eigenvalues()(0)) <= std::abs(w - es.eigenvalues()(1)) ? 0 : 1;
        const double wo = es.eigenvalues()(j);
        worst_val = std::max(worst_val, std::abs(w - wo) / std::max(1.0, std::abs(wo)));
        if (k != 0) {
          const Eigen::Vector2d zo = es.eigenvectors().col(j);
          worst_vec = std::max(worst_vec, 1.0 - std::abs(zo(0) * z[0] + zo(1) * z[1]));
        }
      }
    }
  }
  const bool ok = worst_res <= 1e-9 && worst_val <= 1e-10 && worst_vec <= 1e-10;
  return {ok, fmt("max residual/(1+|w|) %.2e", worst_res) + fmt(", eigenvalue rel %.2e", worst_val) +
                  fmt(", eigenvector 1-|cos| %.2e", worst_vec)};
}

Outcome orthogonality_limits() {
  double worst = 0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> al(-3.0, -0.1), sm(-0.2, 0.2);
  for (int draw = 0; draw < 10; ++draw) {
    const auto d = draw == 0 ? DerivedParams::defaults()
                             : DerivedParams::direct(al(rng), sm(rng), sm(rng), sm(rng), 1, 0.2, 0.2, 1);
    for (int k = -10000; k <= 10000; ++k) {
      const auto [zp, zm] = eigvec(k, d);
      worst = std::max(worst, std::abs(zp[0] * zm[0] + zp[1] * zm[1]));
    }
  }
  const auto d = DerivedParams::defaults();
  const Vec2 z = eigvec_raw(10000, d).second;
  const double e0 = std::abs(z[0]), e1 = std::abs(z[1] - 2 * (1 - d.alpha()));
  return {worst <= 1e-12 && e0 <= 1e-3 && e1 <= 1e-3,
          fmt("max |Z+.Z-| %.2e", worst) + fmt(", raw Z- at k=1e4 errors (%.2e", e0) +
              fmt(", %.2e)", e1)};
}

Outcome gap_growth() {
  const auto d = DerivedParams::defaults();
  double lo = 1e300, hi = -1e300;
  for (int k = 40; k <= 100; ++k) {
    const double r = (omega(k + 1, d).first - omega(k, d).first) / (3.0 * k * k + 3.0 * k + 1.0);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo >= 0.95 && hi <= 1.05, fmt("ratio range [%.6f", lo) + fmt(", %.6f]", hi)};
}

Outcome delta_significance() {
  const DeltaScan s = delta_significance_scan(30, 1, 0, -1, 0);
  // independent enumeration
  double brute = 1e300;
  for (int a = -30; a <= 30; ++a)
    for (int b = -30; b <= 30; ++b)
      for (int c = -30; c <= 30; ++c) {
        if (a == 0 || b == 0 || c == 0 || a + b + c != 0) continue;
        const double h = double(a) * a * a - double(b) * b * b - double(c) * c * c;
        brute = std::min(brute, (1 + std::abs(h)) / std::abs(double(a) * b * c));
      }
  const bool ok = s.delta_min > 0 && s.delta_min == brute &&
                  std::abs(s.delta_min - kDeltaN30) <= 1e-15 * kDeltaN30;
  return {ok, fmt("delta_min %.17g", s.delta_min) + fmt(", brute force %.17g", brute) +
                  fmt(", pinned %.17g", kDeltaN30) + ", argmin (" + std::to_string(s.argmin[0]) +
                  "," + std::to_string(s.argmin[1]) + "," + std::to_string(s.argmin[2]) + ")"};
}

Outcome linear_control() {
  const int n = 32;
  const double T = 1.0;
  const auto d = DerivedParams::defaults();
  const GOperator G(GainProfile::bump(n, pi, 1.0));
  const SynthOptions so = SynthOptions::for_horizon(T);
  auto rel_error = [&](const StatePair& x0, const StatePair& x1, const ControlPlan& p, double dt) {
    EvolutionConfig c;
    c.dt = dt;
    c.t_end = T;
    c.record_every = 1 << 30;
    Attachments att;
    att.G = &G;
    att.plan = &p;
    const StatePair y = run(c, x0, Mode::Linear, d, att).final_state;
    return l2_norm(y - x1) / std::max(l2_norm(x0), l2_norm(x1));
  };
  double worst = 0, cond = 0;
  for (int draw = 0; draw < 20; ++draw) {
    const StatePair x0 = preset("random", n, 1.0, 0, 0, draw);
    const StatePair x1 = preset("random", n, 1.0, 0, 1, draw);
    const ControlPlan p = synthesize_linear(x0, x1, T, d, G, so);
    cond = std::max(cond, p.gram_cond);
    worst = std::max(worst, rel_error(x0, x1, p, 1e-4));
  }
  const StatePair x0 = preset("random", n, 1.0, 0, 0, 0);
  const StatePair x1 = preset("random", n, 1.0, 0, 1, 0);
  const ControlPlan p = synthesize_linear(x0, x1, T, d, G, so);
  const double e1 = rel_error(x0, x1, p, 1e-4), e2 = rel_error(x0, x1, p, 5e-5),
               e3 = rel_error(x0, x1, p, 2.5e-5);
  const double o1 = std::log2(e1 / e2), o2 = std::log2(e2 / e3);
  const bool ok = worst <= 1e-4 && e2 < e1 && e3 < e2 && o2 >= 3.5 && o2 <= 4.5;
  return {ok, fmt("20 draws, max relative error %.2e", worst) + fmt(", Gram cond %.2e", cond) +
                  fmt("; refinement errors %.2e", e1) + fmt(" %.2e", e2) + fmt(" %.2e", e3) +
                  fmt(", orders %.2f", o1) + fmt(" %.2f", o2)};
}

Outcome conservation() {
  const int n = 64;
  const auto d = DerivedParams::defaults();
  double drift = 0, m = 0;
  for (const char* comp : {"both", "u", "v"}) {
    DataSpec s;
    s.type = "gaussian";
    s.amplitude = 1.0;
    s.component = comp;
    EvolutionConfig c;
    c.dt = 1e-4;
    c.t_end = 1.0;
    c.record_every = 1;
    const Trajectory tr = run(c, s.build(n, d, 0), Mode::Nonlinear, d);
    const double e0 = tr.energy.front();
    for (double e : tr.energy) drift = std::max(drift, std::abs(e - e0) / e0);
    for (std::size_t i = 0; i < tr.t.size(); ++i)
      m = std::max({m, std::abs(tr.mass_u[i]), std::abs(tr.mass_v[i])});
  }
  return {m <= 1e-14 && drift <= 1e-8,
          fmt("max |mass| %.2e", m) + fmt(", max relative energy drift %.2e", drift)};
}

Outcome dissipation_decay() {
  const int n = 32;
  const auto d = DerivedParams::defaults();
  const GOperator G(GainProfile::bump(n, pi, 1.0));
  const StatePair x0 = preset("gaussian", n, 1.0, 0);
  EvolutionConfig c;
  c.dt = 1e-3;
  c.t_end = 20.0;
  c.record_every = 50;
  Attachments att;
  att.G = &G;
  const Trajectory tr = run(c, x0, Mode::ClosedLoop, d, att);
  const DecayFit f0 = decay_fit(tr, 0.0, 20.0);

  const FeedbackOp fu(G, Branch::u(d), 0.5), fv(G, Branch::v(d), 0.5);
  att.fb_u = &fu;
  att.fb_v = &fv;
  c.linearized = true;
  const DecayFit f1 = decay_fit(run(c, x0, Mode::ClosedLoop, d, att), 0.0, 20.0);
  const bool ok = tr.max_energy_rise <= 1e-10 && f0.kappa > 0 && f0.r2 >= 0.98 && f1.kappa >= 0.4;
  return {ok, fmt("lambda=0: max energy rise %.2e", tr.max_energy_rise) +
                  fmt(", kappa %.4f", f0.kappa) + fmt(", r2 %.4f", f0.r2) +
                  fmt("; linearized lambda=0.5: kappa %.4f", f1.kappa)};
}

Outcome nonlinear_steering() {
  const int n = 32;
  const auto d = DerivedParams::defaults();
  const GOperator G(GainProfile::bump(n, pi, 1.0));
  SteerOptions opt;
  opt.dt = 5e-5;
  opt.synth = SynthOptions::for_horizon(1.0);
  const StatePair x0 = preset("random", n, 1e-3, 0, 0), x1 = preset("random", n, 1e-3, 0, 1);
  const SteerResult r = steer_nonlinear(x0, x1, 1.0, d, G, opt);
  bool contracting = true, monotone = true;
  std::string factors;
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    const double f = r.history[i].factor;
    contracting = contracting && f < 1;
    if (i > 1) monotone = monotone && f <= r.history[i - 1].factor;
    factors += fmt(i > 1 ? " %.3f" : "%.3f", f);
  }
  const double rel = r.terminal_error / l2_norm(x1);

  bool raised = false;
  std::string large;
  try {
    opt.dt = 1e-4;
    steer_nonlinear(preset("random", n, 10.0, 0, 0), preset("random", n, 10.0, 0, 1), 1.0, d, G, opt);
    large = "amplitude 10 converged";
  } catch (const Error& e) {
    raised = e.code() == ErrorCode::NoContraction;
    large = std::string("amplitude 10 -> ") + error_name(e.code());
  }
  const bool ok = r.converged && r.history.size() <= 8 && contracting &&
                  r.terminal_error <= 1e-5 && raised;
  return {ok, "amplitude 1e-3: " + std::to_string(r.history.size()) + " iterations, factors [" +
                  factors + "]" + (monotone ? " nonincreasing" : " not monotone") +
                  fmt(", terminal error %.2e", r.terminal_error) + fmt(" (relative %.2e)", rel) +
                  "; " + large};
}

Outcome observability() {
  const int n = 32;
  const auto d = DerivedParams::defaults();
  EvolutionConfig c;
  c.dt = 1e-3;
  c.record_every = 1;
  c.linearized = true;
  std::vector<StatePair> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(preset("random", n, 1.0, 0, 0x0b5e, i));
  const Observability ob = observability_quotient(samples, 1.0, c, d, GOperator(GainProfile::bump(n, pi, 1.0)));
  bool finite = ob.rows.size() == 10;
  double lo = 1e300;
  for (const auto& r : ob.rows) {
    finite = finite && std::isfinite(r.quotient) && r.quotient > 0 && r.quotient <= ob.rho_max;
    lo = std::min(lo, r.quotient);
  }
  std::string guard = "empty profile not rejected";
  bool guarded = false;
  try {
    observability_quotient(samples, 1.0, c, d, GOperator(GainProfile::empty(n)));
  } catch (const Error& e) {
    guarded = e.code() == ErrorCode::ZeroDenominator;
    guard = std::string("empty profile -> ") + error_name(e.code());
  }
  return {finite && guarded, fmt("rho %.4g", ob.rho_max) + fmt(" (min quotient %.4g)", lo) + "; " + guard};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "dctl_acceptance_determinism";
  fs::remove_all(root);
  const fs::path configs = fs::path(DCTL_SOURCE_DIR) / "docs" / "configs";
  const std::vector<std::pair<std::string, std::string>> runs{
      {"spectrum", "spectrum"},          {"control-linear", "control_linear"},
      {"stabilize", "stabilize"},        {"control-nonlinear", "control_nonlinear"},
      {"global-steer", "global_steer"},  {"resonance", "resonance"}};
  int files = 0;
  for (const auto& [cmd, cfg] : runs) {
    std::string bodies[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (cfg + "_" + std::to_string(rep));
      const std::string line = std::string(DCTL_CLI_PATH) + " " + cmd + " --config " +
                               (configs / (cfg + ".json")).string() + " --out " + out.string() +
                               " --seed 11 > /dev/null 2>&1";
      const int rc = std::system(line.c_str());
      if (rc != 0) return {false, cmd + " exited with status " + std::to_string(rc)};
      std::vector<fs::path> csvs;
      for (const auto& e : fs::directory_iterator(out))
        if (e.path().extension() == ".csv") csvs.push_back(e.path());
      std::sort(csvs.begin(), csvs.end());
      for (const auto& p : csvs) bodies[rep] += p.filename().string() + "\n" + slurp(p);
      if (rep == 0) files += int(csvs.size());
    }
    if (bodies[0] != bodies[1]) return {false, cmd + " produced different CSV bytes"};
  }
  fs::remove_all(root);
  return {true, "6 commands run twice with --seed 11, " + std::to_string(files) +
                    " CSV files byte-identical"};
}

}  // namespace

int main() {
  criterion(1, "spectral correctness", 1, spectral_correctness);
  criterion(2, "orthogonality and limits", 1, orthogonality_limits);
  criterion(3, "gap growth", 1, gap_growth);
  criterion(4, "delta significance", 10, delta_significance);
  criterion(5, "linear exact controllability", 120, linear_control);
  criterion(6, "conservation", 60, conservation);
  criterion(7, "energy dissipation and decay", 120, dissipation_decay);
  criterion(8, "local nonlinear steering", 180, nonlinear_steering);
  criterion(9, "observability probe", 60, observability);
  criterion(10, "determinism", 600, determinism);
  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
