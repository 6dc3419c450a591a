#include "dctl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "dctl/damping.hpp"
#include "dctl/evolution.hpp"
#include "dctl/moment.hpp"
#include "dctl/spectral.hpp"
#include "json.hpp"

namespace dctl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string num(double x) { return csv_number(x); }
std::string num(int x) { return std::to_string(x); }

// Results land at their own index, so output order never depends on scheduling.
template <class F>
void parallel_for(int n, F&& fn) {
  const int workers = std::max(1, std::min<int>(n, int(std::thread::hardware_concurrency())));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(n);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

class Run {
public:
  Run(Command cmd, const RunConfig& cfg, fs::path out) : cmd_(cmd), cfg_(cfg), out_(std::move(out)) {}

  void write(const std::string& name, const std::string& body) {
    std::ofstream os(out_ / name, std::ios::binary);
    if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + (out_ / name).string());
    os << body;
    files_.push_back(name);
  }
  void table(const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<std::string>>& rows) {
    write(name, csv_table(header, rows));
  }

  const RunConfig& cfg() const { return cfg_; }
  json& summary() { return summary_; }
  std::vector<std::string>& warnings() { return warnings_; }
  std::string phase;

  void manifest(int code, const std::string& status) {
    json j;
    j["tool"] = "dispersive-control";
    j["version"] = kVersion;
    j["command"] = command_name(cmd_);
    j["seed"] = cfg_.seed;
    j["config"] = json::parse(cfg_.to_json());
    j["status"] = status;
    j["exit_code"] = code;
    j["warnings"] = warnings_;
    j["summary"] = summary_;
    std::vector<std::string> outs = files_;
    outs.push_back("manifest.json");
    j["outputs"] = outs;
    std::ofstream os(out_ / "manifest.json", std::ios::binary);
    os << j.dump(2) << '\n';
  }
  std::vector<std::string> files() const {
    auto f = files_;
    f.push_back("manifest.json");
    return f;
  }

private:
  Command cmd_;
  RunConfig cfg_;
  fs::path out_;
  json summary_ = json::object();
  std::vector<std::string> warnings_, files_;
};

SynthOptions synth_options(const RunConfig& c) {
  SynthOptions o;
  o.window = c.window_or_default();
  o.cluster_tol = c.cluster_tol;
  o.cond_cap = c.cond_cap;
  return o;
}

double rel_error(const StatePair& y, const StatePair& x0, const StatePair& x1) {
  const double scale = std::max(l2_norm(x0), l2_norm(x1));
  const double err = l2_norm(y - x1);
  return scale > 0 ? err / scale : err;
}

// spectrum -----------------------------------------------------------------

void cmd_spectrum(Run& r) {
  const RunConfig& c = r.cfg();
  const DerivedParams d = c.params();
  for (auto& w : param_warnings(d)) r.warnings().push_back(w);
  std::vector<std::vector<std::string>> rows;
  double worst_res = 0, worst_orth = 0;
  for (int k = -c.N; k <= c.N; ++k) {
    const auto [wp, wm] = omega(k, d);
    const auto [zp, zm] = eigvec(k, d);
    const ModeMatrix m = mode_matrix(k, d);
    auto residual = [&](const Vec2& z, double w) {
      return std::hypot(m.a * z[0] + m.c * z[1] - w * z[0], m.c * z[0] + m.b * z[1] - w * z[1]);
    };
    const double rp = residual(zp, wp), rm = residual(zm, wm);
    const double orth = zp[0] * zm[0] + zp[1] * zm[1];
    worst_res = std::max({worst_res, rp / (1 + std::abs(wp)), rm / (1 + std::abs(wm))});
    worst_orth = std::max(worst_orth, std::abs(orth));
    rows.push_back({num(k), num(wp), num(wm), num(zp[0]), num(zp[1]), num(zm[0]), num(zm[1]),
                    num(rp), num(rm), num(orth)});
  }
  r.table("spectrum.csv",
          {"k", "omega_plus", "omega_minus", "zplus_u", "zplus_v", "zminus_u", "zminus_v",
           "residual_plus", "residual_minus", "orthogonality"},
          rows);

  rows.clear();
  if (c.N >= 4) {
    const GapReport g = gap_report(c.N, d);
    for (std::size_t i = 0; i < g.k.size(); ++i) {
      const int k = g.k[i];
      const double cube = 3.0 * k * k + 3.0 * k + 1.0;
      rows.push_back({num(k), num(g.gap_plus[i]), num(g.gap_minus[i]),
                      k > 0 ? num(g.gap_plus[i] / (3.0 * k * k)) : std::string(),
                      num(g.gap_plus[i] / cube)});
    }
    r.summary()["min_gap"] = g.min_gap;
    r.summary()["min_gap_pair"] = {g.argmin_k1, g.argmin_k2};
    r.summary()["plus_growth_coeff"] = g.plus_growth_coeff;
  } else {
    r.warnings().push_back("gap report needs N >= 4");
  }
  r.table("gaps.csv",
          {"k", "gap_plus", "gap_minus", "gap_plus_over_3k2", "gap_plus_over_3k2_3k_1"}, rows);

  rows.clear();
  const ClusterReport cr = resonant_clusters(c.N, d, c.cluster_tol);
  int id = 0, multi = 0;
  for (const auto& cl : cr.clusters) {
    std::string members;
    for (std::size_t m : cl.members) {
      if (!members.empty()) members += ';';
      members += std::to_string(cr.labels[m].k) + (cr.labels[m].branch == 0 ? "+" : "-");
    }
    if (cl.members.size() > 1) ++multi;
    rows.push_back({num(id++), num(cl.omega), num(int(cl.members.size())), members});
  }
  r.table("clusters.csv", {"cluster", "omega", "size", "members"}, rows);
  r.summary()["clusters"] = id;
  r.summary()["multi_clusters"] = multi;
  r.summary()["max_residual"] = worst_res;
  r.summary()["max_orthogonality"] = worst_orth;
}

// control-linear ------------------------------------------------------------

struct DrawResult {
  double data_norm, err, rel, gram_cond, block_cond, residual, f_norm, h_norm, ratio;
  int blocks;
};

void cmd_control_linear(Run& r) {
  const RunConfig& c = r.cfg();
  const DerivedParams d = c.params();
  const GOperator G(c.gain.build(c.N));
  const SynthOptions so = synth_options(c);
  EvolutionConfig ec;
  ec.dt = c.dt;
  ec.t_end = c.T;
  ec.record_every = c.record_every;

  auto data = [&](int draw) {
    return std::make_pair(c.initial.build(c.N, d, c.seed, std::uint64_t(draw)),
                          c.target.build(c.N, d, c.seed, std::uint64_t(draw)));
  };

  std::vector<DrawResult> res(c.draws);
  parallel_for(c.draws, [&](int i) {
    const auto [x0, x1] = data(i);
    const ControlPlan plan = synthesize_linear(x0, x1, c.T, d, G, so);
    Attachments att;
    att.G = &G;
    att.plan = &plan;
    const Trajectory tr = run(ec, x0, Mode::Linear, d, att);
    const PlanNorm pn = plan_norm(plan, x0, x1, 0.0);
    res[i] = {std::max(l2_norm(x0), l2_norm(x1)), l2_norm(tr.final_state - x1),
              rel_error(tr.final_state, x0, x1), plan.gram_cond, plan.max_block_cond,
              plan.biorth_residual, pn.f_norm, pn.h_norm, pn.ratio, int(plan.blocks.size())};
  });
  std::vector<std::vector<std::string>> rows;
  double worst = 0;
  for (int i = 0; i < c.draws; ++i) {
    const auto& x = res[i];
    worst = std::max(worst, x.rel);
    rows.push_back({num(i), num(x.data_norm), num(x.err), num(x.rel), num(x.gram_cond),
                    num(x.block_cond), num(x.residual), num(x.blocks), num(x.f_norm),
                    num(x.h_norm), num(x.ratio)});
  }
  r.table("control_linear.csv",
          {"draw", "data_norm", "terminal_error", "relative_error", "gram_cond", "max_block_cond",
           "biorth_residual", "blocks", "f_norm", "h_norm", "plan_ratio"},
          rows);
  r.summary()["max_relative_error"] = worst;

  // draw 0: plan, control series, s-graded norms, refinement
  const auto [x0, x1] = data(0);
  const ControlPlan plan = synthesize_linear(x0, x1, c.T, d, G, so);
  r.write("plan.json", plan.to_json() + "\n");
  r.summary()["zero_plan"] = plan.is_zero();

  rows.clear();
  const long nsteps = std::max(1L, std::lround(c.T / c.dt));
  const double h = c.T / double(nsteps);
  for (long s = 0; s <= nsteps; s += c.record_every) {
    const double t = double(s) * h;
    const PeriodicField f = plan.f_at(t), g = plan.h_at(t);
    rows.push_back({num(t), num(hs_norm(f, 0)), num(hs_norm(g, 0)), num(hs_norm(G.apply(f), 0)),
                    num(hs_norm(G.apply(g), 0))});
  }
  r.table("controls.csv", {"t", "f_l2", "h_l2", "gf_l2", "gh_l2"}, rows);

  rows.clear();
  for (double s : c.s_values) {
    const PlanNorm pn = plan_norm(plan, x0, x1, s);
    rows.push_back({num(s), num(pn.f_norm), num(pn.h_norm), num(pn.data_norm), num(pn.ratio)});
  }
  r.table("sgraded.csv", {"s", "f_norm", "h_norm", "data_norm", "ratio"}, rows);

  if (c.refine) {
    rows.clear();
    Attachments att;
    att.G = &G;
    att.plan = &plan;
    double prev_err = std::numeric_limits<double>::quiet_NaN(), prev_dt = 0;
    for (double dt : c.refine_dts) {
      EvolutionConfig e = ec;
      e.dt = dt;
      const double err = rel_error(run(e, x0, Mode::Linear, d, att).final_state, x0, x1);
      std::string order;
      if (prev_dt > 0 && err > 0 && prev_err > 0)
        order = num(std::log(prev_err / err) / std::log(prev_dt / dt));
      rows.push_back({num(dt), num(err), order});
      prev_err = err;
      prev_dt = dt;
    }
    r.table("refinement.csv", {"dt", "relative_error", "observed_order"}, rows);
  }
}

// stabilize -----------------------------------------------------------------

void cmd_stabilize(Run& r) {
  const RunConfig& c = r.cfg();
  const DerivedParams d = c.params();
  const GOperator G(c.gain.build(c.N));
  std::optional<FeedbackOp> fu, fv;
  Attachments att;
  att.G = &G;
  if (c.lambda > 0) {
    fu.emplace(G, Branch::u(d), c.lambda);
    fv.emplace(G, Branch::v(d), c.lambda);
    att.fb_u = &*fu;
    att.fb_v = &*fv;
    r.summary()["gronwall_constant"] = gronwall_constant(G, *fu, *fv);
  }
  EvolutionConfig ec;
  ec.dt = c.dt;
  ec.t_end = c.t_end;
  ec.record_every = c.record_every;
  ec.linearized = c.linearized;
  const StatePair x0 = c.initial.build(c.N, d, c.seed);
  const Trajectory tr = run(ec, x0, Mode::ClosedLoop, d, att);
  r.write("trajectory.csv", tr.to_csv());

  const double t1 = c.fit_t1 < 0 ? c.t_end : c.fit_t1;
  const bool monotone = tr.max_energy_rise <= 1e-10;
  r.summary()["max_energy_rise"] = tr.max_energy_rise;
  r.summary()["max_mass"] = tr.max_mass;
  r.summary()["monotone_energy"] = monotone;
  if (c.lambda == 0 && !monotone)
    r.warnings().push_back("energy rose by " + num(tr.max_energy_rise) + " in one step");
  std::vector<std::vector<std::string>> rows;
  try {
    const DecayFit f = decay_fit(tr, c.fit_t0, t1);
    rows.push_back({num(c.fit_t0), num(t1), num(f.kappa), num(f.c), num(f.r2),
                    num(tr.max_energy_rise), monotone ? "true" : "false"});
    r.summary()["kappa"] = f.kappa;
    r.summary()["r2"] = f.r2;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateFit) throw;
    r.warnings().push_back(e.what());
    rows.push_back({num(c.fit_t0), num(t1), "", "", "", num(tr.max_energy_rise),
                    monotone ? "true" : "false"});
  }
  r.table("fit.csv", {"t0", "t1", "kappa", "c", "r2", "max_energy_rise", "monotone"}, rows);

  if (c.observability_samples > 0) {
    DataSpec probe;
    probe.type = "random";
    probe.amplitude = 1.0;
    probe.seed_offset = 0x0b5e;
    std::vector<StatePair> samples;
    for (int i = 0; i < c.observability_samples; ++i)
      samples.push_back(probe.build(c.N, d, c.seed, std::uint64_t(i)));
    EvolutionConfig oc = ec;
    oc.linearized = true;
    const Observability ob = observability_quotient(samples, c.T, oc, d, G);
    rows.clear();
    for (std::size_t i = 0; i < ob.rows.size(); ++i)
      rows.push_back({num(int(i)), num(ob.rows[i].numerator), num(ob.rows[i].denominator),
                      num(ob.rows[i].quotient)});
    r.table("observability.csv", {"sample", "initial_energy", "observed", "quotient"}, rows);
    r.summary()["rho"] = ob.rho_max;
  }
}

// control-nonlinear ---------------------------------------------------------

void write_iterates(Run& r, const SteerResult& s, const std::string& name) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& it : s.history)
    rows.push_back({num(it.iter), num(it.distance), std::isnan(it.factor) ? "" : num(it.factor),
                    num(it.terminal_error)});
  r.table(name, {"iter", "distance", "factor", "terminal_error"}, rows);
}

SteerOptions steer_options(const RunConfig& c) {
  SteerOptions o;
  o.max_iter = c.max_iter;
  o.tol = c.tol;
  o.dt = c.dt;
  o.record_every = std::max(1, std::min(c.record_every, 10));
  o.synth = synth_options(c);
  return o;
}

void cmd_control_nonlinear(Run& r) {
  const RunConfig& c = r.cfg();
  const DerivedParams d = c.params();
  const GOperator G(c.gain.build(c.N));
  const StatePair x0 = c.initial.build(c.N, d, c.seed);
  const StatePair x1 = c.target.build(c.N, d, c.seed);
  const SteerResult s = steer_nonlinear(x0, x1, c.T, d, G, steer_options(c));
  write_iterates(r, s, "iterates.csv");
  r.write("plan.json", s.plan.to_json() + "\n");
  r.summary()["iterations"] = int(s.history.size());
  r.summary()["converged"] = s.converged;
  r.summary()["terminal_error"] = s.terminal_error;
  if (!s.converged)
    throw Error(ErrorCode::NoContraction,
                "no convergence within " + std::to_string(c.max_iter) + " iterations");
}

// global-steer --------------------------------------------------------------

// Step size from the advective bound min(1e-3, 0.5 / (N (1 + max|u| + max|v|))).
double advective_dt(const StatePair& y) {
  const int n = y.n_modes();
  const int m = fft_size(2 * n + 1);
  double mu = 0, mv = 0;
  for (double x : to_grid(y.u, m)) mu = std::max(mu, std::abs(x));
  for (double x : to_grid(y.v, m)) mv = std::max(mv, std::abs(x));
  return std::min(1e-3, 0.5 / (n * (1.0 + mu + mv)));
}

struct DampStage {
  std::string name;
  double t0, t1, norm0, norm1;
  long steps;
};

void cmd_global_steer(Run& r) {
  const RunConfig& c = r.cfg();
  const DerivedParams d = c.params();
  const GOperator G(c.gain.build(c.N));
  const StatePair x0 = c.initial.build(c.N, d, c.seed);
  const StatePair x1 = c.target.build(c.N, d, c.seed);

  r.phase = "damping";
  EvolutionConfig ec;
  ec.dt = advective_dt(x0);
  ec.t_end = c.t_max;
  ec.record_every = c.record_every;
  ec.validate();
  r.summary()["damping_dt"] = ec.dt;
  StatePair y = x0;
  Trajectory tr;
  auto record = [&](double t) {
    tr.t.push_back(t);
    tr.mass_u.push_back(mass(y.u));
    tr.mass_v.push_back(mass(y.v));
    tr.energy.push_back(energy(y));
    tr.l2.push_back(l2_norm(y));
    tr.hs.push_back(hs_norm(y, ec.hs_s));
  };
  record(0.0);
  long steps = 0;
  const long max_steps = std::lround(c.t_max / ec.dt);
  std::vector<DampStage> stages;

  // Dissipative law K = GG down to switch_norm, then K_lambda down to delta.
  auto damp = [&](const std::string& name, const Attachments& att, double target_norm) {
    DampStage st{name, double(steps) * ec.dt, 0, l2_norm(y), 0, 0};
    Stepper stepper(c.N, ec.dt, d, Mode::ClosedLoop, att, ec);
    while (l2_norm(y) > target_norm) {
      if (steps >= max_steps)
        throw Error(ErrorCode::NoContraction,
                    "norm still above " + num(target_norm) + " at t_max (" + num(l2_norm(y)) + ")");
      stepper.step(y, double(steps) * ec.dt);
      ++steps;
      ++st.steps;
      if (!(std::max(y.u.max_abs(), y.v.max_abs()) <= ec.blowup))
        throw Error(ErrorCode::BlowUp,
                    "coefficient bound exceeded at t=" + num(double(steps) * ec.dt));
      if (steps % c.record_every == 0) record(double(steps) * ec.dt);
    }
    st.t1 = double(steps) * ec.dt;
    st.norm1 = l2_norm(y);
    stages.push_back(st);
  };
  Attachments plain;
  plain.G = &G;
  damp("dissipative", plain, std::max(c.delta, c.switch_norm));
  std::optional<FeedbackOp> fu, fv;
  Attachments fast = plain;
  if (c.lambda_damp > 0) {
    fu.emplace(G, Branch::u(d), c.lambda_damp);
    fv.emplace(G, Branch::v(d), c.lambda_damp);
    fast.fb_u = &*fu;
    fast.fb_v = &*fv;
  }
  damp("feedback", fast, c.delta);
  if (steps % c.record_every != 0) record(double(steps) * ec.dt);
  r.write("trajectory.csv", tr.to_csv());
  const double t_switch = double(steps) * ec.dt;
  const double switch_norm = l2_norm(y);
  r.summary()["phase1_skipped"] = steps == 0;
  r.summary()["switch_time"] = t_switch;

  r.phase = "steering";
  const SteerResult s = steer_nonlinear(y, x1, c.T, d, G, steer_options(c));
  write_iterates(r, s, "iterates.csv");
  if (!s.converged)
    throw Error(ErrorCode::NoContraction,
                "no convergence within " + std::to_string(c.max_iter) + " iterations");
  r.phase.clear();
  std::vector<std::vector<std::string>> rows;
  for (const auto& st : stages)
    rows.push_back({st.name, num(st.t0), num(st.t1), num(st.norm0), num(st.norm1), "", "",
                    st.steps == 0 ? "skipped" : "ok"});
  rows.push_back({"steering", num(t_switch), num(t_switch + c.T), num(switch_norm),
                  num(l2_norm(s.terminal)), num(int(s.history.size())), num(s.terminal_error),
                  "ok"});
  r.table("phases.csv",
          {"phase", "t_start", "t_end", "start_norm", "end_norm", "iterations", "terminal_error",
           "status"},
          rows);
  r.summary()["total_time"] = t_switch + c.T;
  r.summary()["terminal_error"] = s.terminal_error;
}

// resonance -----------------------------------------------------------------

void cmd_resonance(Run& r) {
  const RunConfig& c = r.cfg();
  if (!(c.b2 != 0 && c.b1 / c.b2 < 0.25))
    r.warnings().push_back("b1/b2 < 1/4 does not hold");
  std::vector<std::vector<std::string>> rows;
  auto add = [&](const std::string& sweep, int n, double g1, double g2) {
    const DeltaScan s = delta_significance_scan(n, c.b1, g1, c.b2, g2);
    rows.push_back({sweep, num(n), num(c.b1), num(g1), num(c.b2), num(g2), num(s.delta_min),
                    num(s.argmin[0]), num(s.argmin[1]), num(s.argmin[2]),
                    s.hypothesis_ok ? "true" : "false"});
  };
  for (int n : c.n_values) add("N", n, c.g1, c.g2);
  if (!c.gamma_sweep.empty()) {
    const int n = *std::max_element(c.n_values.begin(), c.n_values.end());
    for (double g : c.gamma_sweep) add("gamma", n, g, -g);
  }
  r.table("resonance.csv",
          {"sweep", "N", "b1", "g1", "b2", "g2", "delta_min", "k1", "k2", "k3", "hypothesis_ok"},
          rows);

  const int n_small = *std::min_element(c.n_values.begin(), c.n_values.end());
  if (n_small <= 3) {
    rows.clear();
    for (int k1 = -n_small; k1 <= n_small; ++k1)
      for (int k2 = -n_small; k2 <= n_small; ++k2) {
        const int k3 = -k1 - k2;
        if (k1 == 0 || k2 == 0 || k3 == 0 || std::abs(k3) > n_small) continue;
        const double h = h_resonance(k1, k2, k3, c.b1, c.g1, c.b2, c.g2);
        rows.push_back({num(k1), num(k2), num(k3), num(h),
                        num((1 + std::abs(h)) / std::abs(double(k1) * k2 * k3))});
      }
    r.table("triples.csv", {"k1", "k2", "k3", "H", "ratio"}, rows);
  }
}

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  if (name == "spectrum") return Command::Spectrum;
  if (name == "control-linear") return Command::ControlLinear;
  if (name == "stabilize") return Command::Stabilize;
  if (name == "control-nonlinear") return Command::ControlNonlinear;
  if (name == "global-steer") return Command::GlobalSteer;
  if (name == "resonance") return Command::Resonance;
  return std::nullopt;
}

const char* command_name(Command c) {
  switch (c) {
    case Command::Spectrum: return "spectrum";
    case Command::ControlLinear: return "control-linear";
    case Command::Stabilize: return "stabilize";
    case Command::ControlNonlinear: return "control-nonlinear";
    case Command::GlobalSteer: return "global-steer";
    case Command::Resonance: return "resonance";
  }
  return "unknown";
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument: return ExitConfig;
    case ErrorCode::IllConditioned:
    case ErrorCode::ClusterSingular: return ExitConditioning;
    case ErrorCode::BlowUp: return ExitBlowUp;
    case ErrorCode::NoContraction: return ExitNoContraction;
    default: return ExitFailure;
  }
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0 ? 0.0 : x);
  return buf;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(r[i]);
    }
    out += "\r\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

CommandOutcome run_command(Command cmd, const RunConfig& cfg, const std::string& out_dir) {
  CommandOutcome o;
  const fs::path out(out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    o.exit_code = ExitFailure;
    o.message = "cannot create output directory " + out_dir + ": " + ec.message();
    return o;
  }
  Run r(cmd, cfg, out);
  auto fail = [&](int code, const std::string& name, const std::string& msg) {
    o.exit_code = code;
    o.message = msg;
    o.phase = r.phase;
    json e{{"command", command_name(cmd)}, {"error", name}, {"exit_code", code}, {"message", msg}};
    if (!r.phase.empty()) e["phase"] = r.phase;
    std::ofstream os(out / "error.json", std::ios::binary);
    os << e.dump(2) << '\n';
    r.manifest(code, name);
    o.files = r.files();
    o.files.push_back("error.json");
  };
  try {
    switch (cmd) {
      case Command::Spectrum: cmd_spectrum(r); break;
      case Command::ControlLinear: cmd_control_linear(r); break;
      case Command::Stabilize: cmd_stabilize(r); break;
      case Command::ControlNonlinear: cmd_control_nonlinear(r); break;
      case Command::GlobalSteer: cmd_global_steer(r); break;
      case Command::Resonance: cmd_resonance(r); break;
    }
  } catch (const Error& e) {
    fail(exit_code_for(e.code()), error_name(e.code()), e.what());
    return o;
  } catch (const std::exception& e) {
    fail(ExitFailure, "InternalError", e.what());
    return o;
  }
  r.manifest(ExitOk, "ok");
  o.files = r.files();
  return o;
}

CommandOutcome run_command(const std::string& cmd, const std::string& config_text,
                           const std::string& out_dir, std::optional<std::uint64_t> seed) {
  const auto c = parse_command(cmd);
  if (!c) return {ExitConfig, "unknown command '" + cmd + "'", "", {}};
  RunConfig cfg;
  try {
    cfg = parse_config(config_text);
  } catch (const Error& e) {
    return {ExitConfig, e.what(), "", {}};
  }
  if (seed) cfg.seed = *seed;
  return run_command(*c, cfg, out_dir);
}

}  // namespace dctl
