#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dctl/damping.hpp"
#include "dctl/field.hpp"
#include "dctl/spectral.hpp"

namespace dctl {

struct GainSpec {
  std::string type = "bump";  // bump | grid | empty
  double center = 3.141592653589793;
  double radius = 1.0;
  std::vector<double> samples;

  GainProfile build(int n_modes) const;
};

struct ModeEntry {
  int k;
  double re, im;
};

struct DataSpec {
  std::string type = "zero";  // zero | eigenmode | gaussian | random | modes
  double amplitude = 0.0;     // L2 norm of the pair
  int k = 1;
  std::string branch = "plus";
  double center = 3.141592653589793;
  double width = 0.5;
  std::string component = "both";  // u | v | both
  double decay = 1.0;
  std::uint64_t seed_offset = 0;
  std::vector<ModeEntry> u_modes, v_modes;

  StatePair build(int n_modes, const DerivedParams& d, std::uint64_t seed,
                  std::uint64_t draw = 0) const;
};

struct RunConfig {
  // Either physical means or direct linear constants.
  bool direct_params = true;
  PhysParams phys;
  double mu = 0.01, eta = 0.05, zeta = 0.01;

  int N = 32;
  GainSpec gain;
  double T = 1.0;
  double lambda = 0.0;
  double lambda_prime = 0.4;
  double dt = 1e-4;
  int record_every = 100;
  std::uint64_t seed = 0;
  std::optional<double> window;  // moment block window, default 0.4 * 2pi / T
  double cluster_tol = 1e-9;
  double cond_cap = 1e12;
  DataSpec initial, target;

  // control-linear
  int draws = 1;
  bool refine = false;
  std::vector<double> refine_dts{2e-4, 1e-4, 5e-5};
  std::vector<double> s_values{0.0, 1.0, 2.0};
  // stabilize
  double t_end = 20.0;
  bool linearized = false;
  double fit_t0 = 0.0;
  double fit_t1 = -1.0;  // negative: t_end
  // control-nonlinear
  int max_iter = 8;
  double tol = 1e-6;
  // global-steer
  double delta = 1e-2;
  double t_max = 500.0;
  double switch_norm = 1.0;  // K = GG above, K_lambda below
  double lambda_damp = 0.5;
  // stabilize: observability probe over this many random states, horizon T
  int observability_samples = 0;
  // resonance
  double b1 = 1.0, g1 = 0.0, b2 = -1.0, g2 = 0.0;
  std::vector<int> n_values{2, 5, 10, 20, 30};
  std::vector<double> gamma_sweep;

  DerivedParams params() const;
  double window_or_default() const;
  std::string to_json() const;
};

// Throws Error(ConfigError) on any schema violation.
RunConfig parse_config(const std::string& json_text);

}  // namespace dctl
