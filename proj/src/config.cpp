#include "dctl/config.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "json.hpp"

namespace dctl {

using nlohmann::json;
using std::numbers::pi;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail("unknown key '" + it.key() + "' in " + where);
}

double num(const json& j, const std::string& key, double def, const std::string& where) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number()) fail(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where + "." + key + " must be finite");
  return x;
}

long long integer(const json& j, const std::string& key, long long def, const std::string& where) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(where + "." + key + " must be an integer");
  return v.get<long long>();
}

bool boolean(const json& j, const std::string& key, bool def, const std::string& where) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) fail(where + "." + key + " must be a boolean");
  return j.at(key).get<bool>();
}

std::string str(const json& j, const std::string& key, const std::string& def,
                const std::set<std::string>& allowed, const std::string& where) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_string()) fail(where + "." + key + " must be a string");
  const std::string s = j.at(key).get<std::string>();
  if (!allowed.empty() && !allowed.count(s)) fail(where + "." + key + " has unsupported value '" + s + "'");
  return s;
}

std::vector<double> num_array(const json& j, const std::string& key, std::vector<double> def,
                              const std::string& where) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_array()) fail(where + "." + key + " must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number() || !std::isfinite(x.get<double>()))
      fail(where + "." + key + " entries must be finite numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

std::vector<ModeEntry> modes_from(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + " must be an array of [k, re, im]");
  std::vector<ModeEntry> out;
  for (const auto& t : j) {
    if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number() ||
        !t[2].is_number())
      fail(where + " entries must be [k, re, im]");
    out.push_back({t[0].get<int>(), t[1].get<double>(), t[2].get<double>()});
  }
  return out;
}

DataSpec parse_data(const json& j, const std::string& where) {
  check_keys(j, where, {"type", "amplitude", "k", "branch", "center", "width", "component",
                        "decay", "seed_offset", "u", "v"});
  DataSpec s;
  s.type = str(j, "type", "zero", {"zero", "eigenmode", "gaussian", "random", "modes"}, where);
  s.amplitude = num(j, "amplitude", s.type == "zero" || s.type == "modes" ? 0.0 : 1.0, where);
  require(s.amplitude >= 0, where + ".amplitude must be non-negative");
  s.k = static_cast<int>(integer(j, "k", 1, where));
  s.branch = str(j, "branch", "plus", {"plus", "minus"}, where);
  s.center = num(j, "center", pi, where);
  s.width = num(j, "width", 0.5, where);
  require(s.width > 0, where + ".width must be positive");
  s.component = str(j, "component", "both", {"u", "v", "both"}, where);
  s.decay = num(j, "decay", 1.0, where);
  const long long so = integer(j, "seed_offset", 0, where);
  require(so >= 0, where + ".seed_offset must be non-negative");
  s.seed_offset = static_cast<std::uint64_t>(so);
  if (j.contains("u")) s.u_modes = modes_from(j.at("u"), where + ".u");
  if (j.contains("v")) s.v_modes = modes_from(j.at("v"), where + ".v");
  if (s.type == "eigenmode") require(s.k != 0, where + ".k must be nonzero");
  return s;
}

json data_json(const DataSpec& s) {
  json j{{"type", s.type},          {"amplitude", s.amplitude}, {"k", s.k},
         {"branch", s.branch},      {"center", s.center},       {"width", s.width},
         {"component", s.component}, {"decay", s.decay},        {"seed_offset", s.seed_offset}};
  json u = json::array(), v = json::array();
  for (const auto& m : s.u_modes) u.push_back({m.k, m.re, m.im});
  for (const auto& m : s.v_modes) v.push_back({m.k, m.re, m.im});
  j["u"] = u;
  j["v"] = v;
  return j;
}

void scale_to(StatePair& y, double amplitude) {
  const double n = l2_norm(y);
  if (n > 0) y *= amplitude / n;
}

}  // namespace

GainProfile GainSpec::build(int n_modes) const {
  if (type == "empty") return GainProfile::empty(n_modes);
  if (type == "grid") return GainProfile::from_samples(n_modes, samples);
  return GainProfile::bump(n_modes, center, radius);
}

StatePair DataSpec::build(int n, const DerivedParams& d, std::uint64_t seed,
                          std::uint64_t draw) const {
  StatePair y(n);
  if (type == "zero") return y;
  if (type == "modes") {
    for (const auto& m : u_modes) {
      if (m.k == 0 || std::abs(m.k) > n) fail("mode index outside 1..N");
      y.u.set(m.k, cplx(m.re, m.im));
    }
    for (const auto& m : v_modes) {
      if (m.k == 0 || std::abs(m.k) > n) fail("mode index outside 1..N");
      y.v.set(m.k, cplx(m.re, m.im));
    }
    if (amplitude > 0) scale_to(y, amplitude);
    return y;
  }
  if (type == "eigenmode") {
    if (std::abs(k) > n) fail("eigenmode index outside 1..N");
    const auto z = eigvec(k, d);
    const Vec2& zz = branch == "plus" ? z.first : z.second;
    y.u.set(k, zz[0]);
    y.v.set(k, zz[1]);
    scale_to(y, amplitude);
    return y;
  }
  if (type == "gaussian") {
    const int m = fft_size(8 * n + 1);
    std::vector<double> g(m);
    for (int j = 0; j < m; ++j) {
      const double x = std::remainder(2 * pi * j / m - center, 2 * pi);
      g[j] = std::exp(-(x * x) / (width * width));
    }
    PeriodicField f = from_grid(g, n);
    f[0] = 0.0;
    if (component != "v") y.u = f;
    if (component != "u") y.v = f;
    scale_to(y, amplitude);
    return y;
  }
  // random band-limited
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(seed_offset),
                    std::uint32_t(seed_offset >> 32), std::uint32_t(draw),
                    std::uint32_t(draw >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> nd;
  for (int kk = 1; kk <= n; ++kk) {
    const double w = std::pow(1.0 + kk, -decay);
    const double a = nd(rng), b = nd(rng), c = nd(rng), e = nd(rng);
    if (component != "v") y.u[kk] = cplx(a * w, b * w);
    if (component != "u") y.v[kk] = cplx(c * w, e * w);
  }
  scale_to(y, amplitude);
  return y;
}

DerivedParams RunConfig::params() const {
  try {
    if (direct_params) return DerivedParams::direct(phys.alpha, mu, eta, zeta, phys.A, phys.B, phys.C, phys.D);
    return derive_params(phys);
  } catch (const Error& e) {
    fail(std::string("params: ") + e.what());
  }
}

double RunConfig::window_or_default() const { return window ? *window : 0.4 * 2 * pi / T; }

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"params", "N", "gain", "T", "lambda", "lambda_prime", "dt", "record_every", "seed",
              "window", "cluster_tol", "cond_cap", "initial", "target", "draws", "refine",
              "refine_dts", "s_values", "t_end", "linearized", "fit_t0", "fit_t1", "max_iter",
              "tol", "delta", "t_max", "switch_norm", "lambda_damp", "observability_samples", "b1", "g1", "b2",
              "g2", "n_values", "gamma_sweep"});
  RunConfig c;
  try {
    if (j.contains("params")) {
      const json& p = j.at("params");
      check_keys(p, "params", {"alpha", "A", "B", "C", "D", "beta_mean", "gamma_mean", "mu", "eta", "zeta"});
      const bool has_means = p.contains("beta_mean") || p.contains("gamma_mean");
      const bool has_direct = p.contains("mu") || p.contains("eta") || p.contains("zeta");
      require(!(has_means && has_direct), "params: give either beta_mean/gamma_mean or mu/eta/zeta");
      c.phys.alpha = num(p, "alpha", c.phys.alpha, "params");
      c.phys.A = num(p, "A", c.phys.A, "params");
      c.phys.B = num(p, "B", c.phys.B, "params");
      c.phys.C = num(p, "C", c.phys.C, "params");
      c.phys.D = num(p, "D", c.phys.D, "params");
      require(c.phys.alpha < 0, "params.alpha must be negative");
      c.direct_params = !has_means;
      c.phys.beta_mean = num(p, "beta_mean", 0.0, "params");
      c.phys.gamma_mean = num(p, "gamma_mean", 0.0, "params");
      c.mu = num(p, "mu", c.mu, "params");
      c.eta = num(p, "eta", c.eta, "params");
      c.zeta = num(p, "zeta", c.zeta, "params");
    }
    c.N = static_cast<int>(integer(j, "N", c.N, "config"));
    require(c.N >= 1 && c.N <= 4096, "N must lie in [1, 4096]");
    if (j.contains("gain")) {
      const json& g = j.at("gain");
      check_keys(g, "gain", {"type", "center", "radius", "samples"});
      c.gain.type = str(g, "type", "bump", {"bump", "grid", "empty"}, "gain");
      c.gain.center = num(g, "center", c.gain.center, "gain");
      c.gain.radius = num(g, "radius", c.gain.radius, "gain");
      require(c.gain.radius > 0 && c.gain.radius <= pi, "gain.radius must lie in (0, pi]");
      c.gain.samples = num_array(g, "samples", {}, "gain");
      if (c.gain.type == "grid") {
        require(c.gain.samples.size() >= 3, "gain.samples needs at least 3 values");
        for (double x : c.gain.samples) require(x >= 0, "gain.samples must be non-negative");
      }
    }
    c.T = num(j, "T", c.T, "config");
    require(c.T > 0, "T must be positive");
    c.lambda = num(j, "lambda", c.lambda, "config");
    require(c.lambda >= 0, "lambda must be non-negative");
    c.lambda_prime = num(j, "lambda_prime", c.lambda_prime, "config");
    c.dt = num(j, "dt", c.dt, "config");
    require(c.dt > 0, "dt must be positive");
    c.record_every = static_cast<int>(integer(j, "record_every", c.record_every, "config"));
    require(c.record_every >= 1, "record_every must be positive");
    const long long seed = integer(j, "seed", 0, "config");
    require(seed >= 0, "seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    if (j.contains("window")) {
      c.window = num(j, "window", 0.0, "config");
      require(*c.window >= 0, "window must be non-negative");
    }
    c.cluster_tol = num(j, "cluster_tol", c.cluster_tol, "config");
    require(c.cluster_tol >= 0, "cluster_tol must be non-negative");
    c.cond_cap = num(j, "cond_cap", c.cond_cap, "config");
    require(c.cond_cap > 1, "cond_cap must exceed 1");
    if (j.contains("initial")) c.initial = parse_data(j.at("initial"), "initial");
    if (j.contains("target")) c.target = parse_data(j.at("target"), "target");
    c.draws = static_cast<int>(integer(j, "draws", c.draws, "config"));
    require(c.draws >= 1 && c.draws <= 10000, "draws must lie in [1, 10000]");
    c.refine = boolean(j, "refine", c.refine, "config");
    c.refine_dts = num_array(j, "refine_dts", c.refine_dts, "config");
    for (double x : c.refine_dts) require(x > 0, "refine_dts must be positive");
    c.s_values = num_array(j, "s_values", c.s_values, "config");
    c.t_end = num(j, "t_end", c.t_end, "config");
    require(c.t_end > 0, "t_end must be positive");
    c.linearized = boolean(j, "linearized", c.linearized, "config");
    c.fit_t0 = num(j, "fit_t0", c.fit_t0, "config");
    c.fit_t1 = num(j, "fit_t1", c.fit_t1, "config");
    c.max_iter = static_cast<int>(integer(j, "max_iter", c.max_iter, "config"));
    require(c.max_iter >= 1, "max_iter must be positive");
    c.tol = num(j, "tol", c.tol, "config");
    require(c.tol > 0, "tol must be positive");
    c.delta = num(j, "delta", c.delta, "config");
    require(c.delta > 0, "delta must be positive");
    c.t_max = num(j, "t_max", c.t_max, "config");
    require(c.t_max > 0, "t_max must be positive");
    c.switch_norm = num(j, "switch_norm", c.switch_norm, "config");
    require(c.switch_norm > 0, "switch_norm must be positive");
    c.lambda_damp = num(j, "lambda_damp", c.lambda_damp, "config");
    require(c.lambda_damp >= 0, "lambda_damp must be non-negative");
    c.observability_samples =
        static_cast<int>(integer(j, "observability_samples", c.observability_samples, "config"));
    require(c.observability_samples >= 0, "observability_samples must be non-negative");
    c.b1 = num(j, "b1", c.b1, "config");
    c.g1 = num(j, "g1", c.g1, "config");
    c.b2 = num(j, "b2", c.b2, "config");
    c.g2 = num(j, "g2", c.g2, "config");
    if (j.contains("n_values")) {
      const json& v = j.at("n_values");
      require(v.is_array(), "n_values must be an array");
      c.n_values.clear();
      for (const auto& x : v) {
        require(x.is_number_integer() && x.get<int>() >= 1 && x.get<int>() <= 2000,
                "n_values entries must be integers in [1, 2000]");
        c.n_values.push_back(x.get<int>());
      }
    }
    c.gamma_sweep = num_array(j, "gamma_sweep", c.gamma_sweep, "config");
  } catch (const json::exception& e) {
    fail(std::string("config: ") + e.what());
  }
  c.params();
  return c;
}

std::string RunConfig::to_json() const {
  json p{{"alpha", phys.alpha}, {"A", phys.A}, {"B", phys.B}, {"C", phys.C}, {"D", phys.D}};
  if (direct_params) {
    p["mu"] = mu;
    p["eta"] = eta;
    p["zeta"] = zeta;
  } else {
    p["beta_mean"] = phys.beta_mean;
    p["gamma_mean"] = phys.gamma_mean;
  }
  json g{{"type", gain.type}, {"center", gain.center}, {"radius", gain.radius}, {"samples", gain.samples}};
  json j{{"params", p},
         {"N", N},
         {"gain", g},
         {"T", T},
         {"lambda", lambda},
         {"lambda_prime", lambda_prime},
         {"dt", dt},
         {"record_every", record_every},
         {"seed", seed},
         {"cluster_tol", cluster_tol},
         {"cond_cap", cond_cap},
         {"initial", data_json(initial)},
         {"target", data_json(target)},
         {"draws", draws},
         {"refine", refine},
         {"refine_dts", refine_dts},
         {"s_values", s_values},
         {"t_end", t_end},
         {"linearized", linearized},
         {"fit_t0", fit_t0},
         {"fit_t1", fit_t1},
         {"max_iter", max_iter},
         {"tol", tol},
         {"delta", delta},
         {"t_max", t_max},
         {"switch_norm", switch_norm},
         {"lambda_damp", lambda_damp},
         {"observability_samples", observability_samples},
         {"b1", b1},
         {"g1", g1},
         {"b2", b2},
         {"g2", g2},
         {"n_values", n_values},
         {"gamma_sweep", gamma_sweep}};
  if (window) j["window"] = *window;
  return j.dump(2);
}

}  // namespace dctl
