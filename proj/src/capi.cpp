#include "dctl/dctl.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <string>

#include "dctl/damping.hpp"
#include "dctl/evolution.hpp"
#include "dctl/experiments.hpp"
#include "dctl/moment.hpp"
#include "dctl/spectral.hpp"

struct dctl_params {
  dctl::DerivedParams d;
};
struct dctl_gain {
  dctl::GOperator op;
};
struct dctl_state {
  dctl::StatePair y;
};
struct dctl_plan {
  dctl::ControlPlan plan;
};

namespace {

thread_local std::string last_error;

dctl_status status_of(dctl::ErrorCode c) {
  using dctl::ErrorCode;
  switch (c) {
    case ErrorCode::ClusterTooLarge: return DCTL_E_CLUSTER_TOO_LARGE;
    case ErrorCode::NotOnGamma: return DCTL_E_NOT_ON_GAMMA;
    case ErrorCode::GridTooCoarse: return DCTL_E_GRID_TOO_COARSE;
    case ErrorCode::NotPositiveDefinite: return DCTL_E_NOT_POSITIVE_DEFINITE;
    case ErrorCode::SolveFailure: return DCTL_E_SOLVE_FAILURE;
    case ErrorCode::IllConditioned: return DCTL_E_ILL_CONDITIONED;
    case ErrorCode::ClusterSingular: return DCTL_E_CLUSTER_SINGULAR;
    case ErrorCode::NoContraction: return DCTL_E_NO_CONTRACTION;
    case ErrorCode::BlowUp: return DCTL_E_BLOW_UP;
    case ErrorCode::DegenerateFit: return DCTL_E_DEGENERATE_FIT;
    case ErrorCode::ZeroDenominator: return DCTL_E_ZERO_DENOMINATOR;
    case ErrorCode::InvalidArgument: return DCTL_E_INVALID_ARGUMENT;
    case ErrorCode::ConfigError: return DCTL_E_CONFIG;
  }
  return DCTL_E_INTERNAL;
}

template <class F>
dctl_status guard(F&& fn) {
  try {
    fn();
    last_error.clear();
    return DCTL_OK;
  } catch (const dctl::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DCTL_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DCTL_E_INTERNAL;
  }
}

void require(bool ok, const char* msg) {
  if (!ok) throw dctl::Error(dctl::ErrorCode::InvalidArgument, msg);
}

dctl::PeriodicField& component(dctl::StatePair& y, dctl_component c) {
  return c == DCTL_U ? y.u : y.v;
}

}  // namespace

extern "C" {

const char* dctl_version(void) { return "0.1.0"; }

const char* dctl_status_name(dctl_status s) {
  switch (s) {
    case DCTL_OK: return "Ok";
    case DCTL_E_INVALID_ARGUMENT: return "InvalidArgument";
    case DCTL_E_CONFIG: return "ConfigError";
    case DCTL_E_CLUSTER_TOO_LARGE: return "ClusterTooLarge";
    case DCTL_E_NOT_ON_GAMMA: return "NotOnGamma";
    case DCTL_E_GRID_TOO_COARSE: return "GridTooCoarse";
    case DCTL_E_NOT_POSITIVE_DEFINITE: return "NotPositiveDefinite";
    case DCTL_E_SOLVE_FAILURE: return "SolveFailure";
    case DCTL_E_ILL_CONDITIONED: return "IllConditioned";
    case DCTL_E_CLUSTER_SINGULAR: return "ClusterSingular";
    case DCTL_E_NO_CONTRACTION: return "NoContraction";
    case DCTL_E_BLOW_UP: return "BlowUp";
    case DCTL_E_DEGENERATE_FIT: return "DegenerateFit";
    case DCTL_E_ZERO_DENOMINATOR: return "ZeroDenominator";
    case DCTL_E_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* dctl_last_error(void) { return last_error.c_str(); }

dctl_status dctl_params_default(dctl_params** out) {
  return guard([&] {
    require(out, "out is null");
    *out = new dctl_params{dctl::DerivedParams::defaults()};
  });
}

dctl_status dctl_params_direct(double alpha, double mu, double eta, double zeta, double A,
                               double B, double C, double D, dctl_params** out) {
  return guard([&] {
    require(out, "out is null");
    *out = new dctl_params{dctl::DerivedParams::direct(alpha, mu, eta, zeta, A, B, C, D)};
  });
}

dctl_status dctl_params_derive(double alpha, double A, double B, double C, double D,
                               double beta_mean, double gamma_mean, dctl_params** out) {
  return guard([&] {
    require(out, "out is null");
    dctl::PhysParams p;
    p.alpha = alpha;
    p.A = A;
    p.B = B;
    p.C = C;
    p.D = D;
    p.beta_mean = beta_mean;
    p.gamma_mean = gamma_mean;
    *out = new dctl_params{dctl::derive_params(p)};
  });
}

dctl_status dctl_params_linear(const dctl_params* p, double* mu, double* eta, double* zeta) {
  return guard([&] {
    require(p && mu && eta && zeta, "null argument");
    *mu = p->d.mu;
    *eta = p->d.eta;
    *zeta = p->d.zeta;
  });
}

void dctl_params_free(dctl_params* p) { delete p; }

dctl_status dctl_omega(const dctl_params* p, int64_t k, double* plus, double* minus) {
  return guard([&] {
    require(p && plus && minus, "null argument");
    const auto w = dctl::omega(k, p->d);
    *plus = w.first;
    *minus = w.second;
  });
}

dctl_status dctl_eigvec(const dctl_params* p, int64_t k, double zplus[2], double zminus[2]) {
  return guard([&] {
    require(p && zplus && zminus, "null argument");
    const auto z = dctl::eigvec(k, p->d);
    zplus[0] = z.first[0];
    zplus[1] = z.first[1];
    zminus[0] = z.second[0];
    zminus[1] = z.second[1];
  });
}

dctl_status dctl_h_resonance(int64_t k1, int64_t k2, int64_t k3, double b1, double g1, double b2,
                             double g2, double* out) {
  return guard([&] {
    require(out, "out is null");
    *out = dctl::h_resonance(k1, k2, k3, b1, g1, b2, g2);
  });
}

dctl_status dctl_delta_scan(int n, double b1, double g1, double b2, double g2, double* delta_min,
                            int argmin[3]) {
  return guard([&] {
    require(delta_min && argmin, "null argument");
    require(n >= 1, "n must be positive");
    const auto s = dctl::delta_significance_scan(n, b1, g1, b2, g2);
    *delta_min = s.delta_min;
    for (int i = 0; i < 3; ++i) argmin[i] = s.argmin[i];
  });
}

dctl_status dctl_gain_bump(int n_modes, double center, double radius, dctl_gain** out) {
  return guard([&] {
    require(out, "out is null");
    require(n_modes >= 1, "n_modes must be positive");
    *out = new dctl_gain{dctl::GOperator(dctl::GainProfile::bump(n_modes, center, radius))};
  });
}

dctl_status dctl_gain_empty(int n_modes, dctl_gain** out) {
  return guard([&] {
    require(out, "out is null");
    require(n_modes >= 1, "n_modes must be positive");
    *out = new dctl_gain{dctl::GOperator(dctl::GainProfile::empty(n_modes))};
  });
}

dctl_status dctl_gain_beta(const dctl_gain* g, int k, double* out) {
  return guard([&] {
    require(g && out, "null argument");
    const int n = g->op.n_modes();
    require(k >= -n && k <= n, "k out of range");
    *out = g->op.beta()[k + n];
  });
}

void dctl_gain_free(dctl_gain* g) { delete g; }

dctl_status dctl_state_new(int n_modes, dctl_state** out) {
  return guard([&] {
    require(out, "out is null");
    require(n_modes >= 1, "n_modes must be positive");
    *out = new dctl_state{dctl::StatePair(n_modes)};
  });
}

dctl_status dctl_state_set(dctl_state* s, dctl_component c, int k, double re, double im) {
  return guard([&] {
    require(s, "state is null");
    require(c == DCTL_U || c == DCTL_V, "bad component");
    require(k != 0, "mode 0 is fixed at zero");
    require(std::abs(k) <= s->y.n_modes(), "k out of range");
    component(s->y, c).set(k, {re, im});
  });
}

dctl_status dctl_state_get(const dctl_state* s, dctl_component c, int k, double* re, double* im) {
  return guard([&] {
    require(s && re && im, "null argument");
    require(c == DCTL_U || c == DCTL_V, "bad component");
    require(std::abs(k) <= s->y.n_modes(), "k out of range");
    const auto z = (c == DCTL_U ? s->y.u : s->y.v).coeff(k);
    *re = z.real();
    *im = z.imag();
  });
}

dctl_status dctl_state_l2(const dctl_state* s, double* out) {
  return guard([&] {
    require(s && out, "null argument");
    *out = dctl::l2_norm(s->y);
  });
}

dctl_status dctl_state_energy(const dctl_state* s, double* out) {
  return guard([&] {
    require(s && out, "null argument");
    *out = dctl::energy(s->y);
  });
}

dctl_status dctl_state_distance(const dctl_state* a, const dctl_state* b, double* out) {
  return guard([&] {
    require(a && b && out, "null argument");
    require(a->y.n_modes() == b->y.n_modes(), "mode counts differ");
    *out = dctl::l2_norm(a->y - b->y);
  });
}

void dctl_state_free(dctl_state* s) { delete s; }

dctl_status dctl_synthesize(const dctl_params* p, const dctl_gain* g, const dctl_state* x0,
                            const dctl_state* x1, double T, dctl_plan** out) {
  return guard([&] {
    require(p && g && x0 && x1 && out, "null argument");
    require(T > 0, "T must be positive");
    const int n = g->op.n_modes();
    require(x0->y.n_modes() == n && x1->y.n_modes() == n, "mode counts differ");
    *out = new dctl_plan{dctl::synthesize_linear(x0->y, x1->y, T, p->d, g->op,
                                                 dctl::SynthOptions::for_horizon(T))};
  });
}

dctl_status dctl_plan_gram_cond(const dctl_plan* plan, double* out) {
  return guard([&] {
    require(plan && out, "null argument");
    *out = plan->plan.gram_cond;
  });
}

dctl_status dctl_plan_is_zero(const dctl_plan* plan, int* out) {
  return guard([&] {
    require(plan && out, "null argument");
    *out = plan->plan.is_zero() ? 1 : 0;
  });
}

void dctl_plan_free(dctl_plan* plan) { delete plan; }

dctl_status dctl_simulate(const dctl_params* p, const dctl_gain* g, const dctl_plan* plan,
                          dctl_mode mode, double dt, double t_end, const dctl_state* x0,
                          dctl_state** out) {
  return guard([&] {
    require(p && x0 && out, "null argument");
    require(mode == DCTL_MODE_LINEAR || mode == DCTL_MODE_NONLINEAR ||
                mode == DCTL_MODE_CLOSED_LOOP,
            "bad mode");
    require(mode != DCTL_MODE_CLOSED_LOOP || g, "closed loop needs a gain");
    require(!plan || g, "a plan needs its gain");
    const int n = x0->y.n_modes();
    require(!g || g->op.n_modes() == n, "mode counts differ");
    require(!plan || plan->plan.n_modes == n, "mode counts differ");
    dctl::EvolutionConfig cfg;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.record_every = 1 << 30;
    dctl::Attachments att;
    att.G = g ? &g->op : nullptr;
    att.plan = plan ? &plan->plan : nullptr;
    const dctl::Mode m = mode == DCTL_MODE_LINEAR      ? dctl::Mode::Linear
                         : mode == DCTL_MODE_NONLINEAR ? dctl::Mode::Nonlinear
                                                       : dctl::Mode::ClosedLoop;
    const auto tr = dctl::run(cfg, x0->y, m, p->d, att);
    *out = new dctl_state{tr.final_state};
  });
}

int dctl_run_command(const char* command, const char* config_json, const char* out_dir,
                     uint64_t seed, int has_seed, char* message, size_t message_len) {
  auto put = [&](const std::string& m) {
    if (message && message_len > 0) {
      const size_t n = std::min(m.size(), message_len - 1);
      std::memcpy(message, m.data(), n);
      message[n] = '\0';
    }
  };
  if (!command || !config_json || !out_dir) {
    put("null argument");
    return dctl::ExitConfig;
  }
  try {
    const auto o = dctl::run_command(command, config_json, out_dir,
                                     has_seed ? std::optional<std::uint64_t>(seed) : std::nullopt);
    put(o.message);
    return o.exit_code;
  } catch (const std::exception& e) {
    put(e.what());
    return dctl::ExitFailure;
  }
}

}  // extern "C"
