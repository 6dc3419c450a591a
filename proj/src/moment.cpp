#include "dctl/moment.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "dctl/evolution.hpp"
#include "json.hpp"

namespace dctl {

using std::numbers::pi;
using cld = std::complex<long double>;
using MatrixXcld = Eigen::Matrix<cld, Eigen::Dynamic, Eigen::Dynamic>;

cplx gram_entry(double a, double b, double T) {
  const long double x = static_cast<long double>(a) - static_cast<long double>(b);
  const long double th = 0.5L * x * T;
  if (th == 0) return T;
  const long double s = std::sin(th) / th;
  return cplx(double(T * s * std::cos(th)), double(T * s * std::sin(th)));
}

namespace {

cld gram_entry_ld(long double a, long double b, long double T) {
  const long double th = 0.5L * (a - b) * T;
  if (th == 0) return T;
  const long double s = std::sin(th) / th;
  return cld(T * s * std::cos(th), T * s * std::sin(th));
}

struct BlockFunctions {
  Eigen::MatrixXcd coeffs;  // row b
  double cond = 0;
  double residual = 0;
};

// Time functions q_b = sum_{j in b} q_j from the Gram system Gamma Y = E, solved in long double.
BlockFunctions block_functions(const std::vector<double>& freqs,
                               const std::vector<std::vector<int>>& blocks, double T,
                               double cond_cap) {
  const int n = static_cast<int>(freqs.size());
  const int nb = static_cast<int>(blocks.size());
  BlockFunctions out;
  out.coeffs = Eigen::MatrixXcd::Zero(nb, n);
  if (n == 0) return out;
  MatrixXcld gram(n, n);
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m) gram(k, m) = gram_entry_ld(freqs[k], freqs[m], T);
  Eigen::MatrixXcd gd = gram.cast<cplx>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gd, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  out.cond = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(out.cond <= cond_cap))
    throw Error(ErrorCode::IllConditioned,
                "Gram condition number " + std::to_string(out.cond) + " exceeds cap");
  MatrixXcld e = MatrixXcld::Zero(n, nb);
  for (int b = 0; b < nb; ++b)
    for (int j : blocks[b]) e(j, b) = 1.0L;
  Eigen::LDLT<MatrixXcld> ldlt(gram);
  const MatrixXcld y = ldlt.solve(e);
  // int_0^T e^{i w_k t} q_b(t) dt = sum_m Gamma_km Y_mb
  const Eigen::MatrixXcd yd = y.cast<cplx>();
  const MatrixXcld r = gram * yd.cast<cld>() - e;
  double res = 0;
  for (int i = 0; i < r.rows(); ++i)
    for (int j = 0; j < r.cols(); ++j) res = std::max(res, double(std::abs(r(i, j))));
  out.residual = res;
  out.coeffs = yd.transpose();
  return out;
}

std::vector<std::vector<int>> group_blocks(const std::vector<double>& freqs, double window,
                                           double tol) {
  std::vector<int> order(freqs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return freqs[a] < freqs[b]; });
  std::vector<std::vector<int>> blocks;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!blocks.empty()) {
      const double prev = freqs[blocks.back().back()];
      const double w = freqs[order[i]];
      const double thr =
          std::max(window, tol * std::max({1.0, std::abs(w), std::abs(prev)}));
      if (w - prev <= thr) {
        blocks.back().push_back(order[i]);
        continue;
      }
    }
    blocks.push_back({order[i]});
  }
  return blocks;
}

}  // namespace

Eigen::VectorXcd BiorthogonalFamily::exponentials(double t) const {
  Eigen::VectorXcd e(freqs.size());
  for (std::size_t m = 0; m < freqs.size(); ++m) e(m) = std::polar(1.0, -freqs[m] * t);
  return e;
}

cplx BiorthogonalFamily::q(int j, double t) const { return (C.row(j) * exponentials(t))(0); }

BiorthogonalFamily build_biorthogonal(const std::vector<double>& freqs, double T,
                                      double cond_cap) {
  if (!(T > 0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  std::vector<std::vector<int>> singletons(freqs.size());
  for (std::size_t j = 0; j < freqs.size(); ++j) singletons[j] = {int(j)};
  const BlockFunctions bf = block_functions(freqs, singletons, T, cond_cap);
  BiorthogonalFamily fam;
  fam.T = T;
  fam.freqs = freqs;
  fam.C = bf.coeffs;
  fam.gram_cond = bf.cond;
  fam.residual = bf.residual;
  return fam;
}

SynthOptions SynthOptions::for_horizon(double T) {
  SynthOptions o;
  o.window = 0.4 * 2 * pi / T;
  return o;
}

bool ControlPlan::is_zero() const {
  return F.size() == 0 || F.cwiseAbs().maxCoeff() == 0.0;
}

namespace {

Eigen::VectorXcd exps(const std::vector<double>& freqs, double t) {
  Eigen::VectorXcd e(freqs.size());
  for (std::size_t m = 0; m < freqs.size(); ++m) e(m) = std::polar(1.0, -freqs[m] * t);
  return e;
}

PeriodicField field_from(const Eigen::VectorXcd& v, int n) {
  PeriodicField f(n);
  for (int k = 0; k <= n; ++k) f[k] = v(k);
  f[0] = cplx(f[0].real(), 0.0);
  return f;
}

}  // namespace

PeriodicField ControlPlan::f_at(double t) const {
  if (wf.size() == 0) return PeriodicField(n_modes);
  return field_from(wf * exps(freqs, t), n_modes);
}

PeriodicField ControlPlan::h_at(double t) const {
  if (wh.size() == 0) return PeriodicField(n_modes);
  return field_from(wh * exps(freqs, t), n_modes);
}

void ControlPlan::input_at(double t, cplx* gu, cplx* gv) const {
  if (wu.size() == 0) {
    std::fill(gu, gu + n_modes + 1, cplx(0.0));
    std::fill(gv, gv + n_modes + 1, cplx(0.0));
    return;
  }
  const Eigen::VectorXcd e = exps(freqs, t);
  Eigen::Map<Eigen::VectorXcd>(gu, n_modes + 1).noalias() = wu * e;
  Eigen::Map<Eigen::VectorXcd>(gv, n_modes + 1).noalias() = wv * e;
}

namespace {

using nlohmann::json;

json cmat(const Eigen::MatrixXcd& m) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array(), s = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      s.push_back(m(i, j).imag());
    }
    re.push_back(r);
    im.push_back(s);
  }
  return {{"re", re}, {"im", im}};
}

Eigen::MatrixXcd cmat_from(const json& j) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  const int rows = static_cast<int>(re.size());
  const int cols = rows ? static_cast<int>(re[0].size()) : 0;
  Eigen::MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = cplx(re[i][c].get<double>(), im[i][c].get<double>());
  return m;
}

json cvec(const Eigen::VectorXcd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

Eigen::VectorXcd cvec_from(const json& a) {
  Eigen::VectorXcd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(i) = cplx(a[i][0].get<double>(), a[i][1].get<double>());
  return v;
}

}  // namespace

std::string ControlPlan::to_json() const {
  json j;
  j["N"] = n_modes;
  j["T"] = T;
  j["window"] = window;
  j["frequencies"] = freqs;
  json lab = json::array();
  for (const auto& l : labels) lab.push_back({l.k, l.branch});
  j["labels"] = lab;
  j["blocks"] = blocks;
  j["block_coeffs"] = cmat(block_coeffs);
  j["F"] = cvec(F);
  j["f_k"] = cvec(f_coef);
  j["h_k"] = cvec(h_coef);
  j["gram_cond"] = gram_cond;
  j["biorth_residual"] = biorth_residual;
  j["max_block_cond"] = max_block_cond;
  j["wf"] = cmat(wf);
  j["wh"] = cmat(wh);
  j["wu"] = cmat(wu);
  j["wv"] = cmat(wv);
  return j.dump();
}

ControlPlan ControlPlan::from_json(const std::string& text) {
  ControlPlan p;
  try {
    const json j = json::parse(text);
    p.n_modes = j.at("N").get<int>();
    p.T = j.at("T").get<double>();
    p.window = j.at("window").get<double>();
    p.freqs = j.at("frequencies").get<std::vector<double>>();
    for (const auto& l : j.at("labels")) p.labels.push_back({l[0].get<int>(), l[1].get<int>()});
    p.blocks = j.at("blocks").get<std::vector<std::vector<int>>>();
    p.block.assign(p.freqs.size(), 0);
    for (std::size_t b = 0; b < p.blocks.size(); ++b)
      for (int i : p.blocks[b]) p.block[i] = static_cast<int>(b);
    p.block_coeffs = cmat_from(j.at("block_coeffs"));
    p.F = cvec_from(j.at("F"));
    p.f_coef = cvec_from(j.at("f_k"));
    p.h_coef = cvec_from(j.at("h_k"));
    p.gram_cond = j.at("gram_cond").get<double>();
    p.biorth_residual = j.at("biorth_residual").get<double>();
    p.max_block_cond = j.at("max_block_cond").get<double>();
    p.wf = cmat_from(j.at("wf"));
    p.wh = cmat_from(j.at("wh"));
    p.wu = cmat_from(j.at("wu"));
    p.wv = cmat_from(j.at("wv"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad plan JSON: ") + e.what());
  }
  return p;
}

ControlPlan synthesize_linear(const StatePair& x0, const StatePair& x1, double T,
                              const DerivedParams& d, const GOperator& G,
                              const SynthOptions& opt) {
  const int n = G.n_modes();
  if (x0.n_modes() != n || x1.n_modes() != n)
    throw Error(ErrorCode::InvalidArgument, "truncation mismatch");
  if (!(T > 0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  for (const auto* f : {&x0.u, &x0.v, &x1.u, &x1.v})
    if (!f->zero_mean(1e-14)) throw Error(ErrorCode::InvalidArgument, "data must have zero mean");
  if (!(G.beta_floor() > 0))
    throw Error(ErrorCode::ClusterSingular, "control weights vanish; the gain profile is empty");

  ControlPlan p;
  p.n_modes = n;
  p.T = T;
  p.window = opt.window;
  std::vector<Vec2> z;
  std::vector<double> lam;
  for (int k = -n; k <= n; ++k) {
    if (k == 0) continue;
    const auto w = omega(k, d);
    const auto zz = eigvec(k, d);
    p.labels.push_back({k, 0});
    lam.push_back(w.first);
    z.push_back(zz.first);
    p.labels.push_back({k, 1});
    lam.push_back(w.second);
    z.push_back(zz.second);
  }
  const int ne = static_cast<int>(p.labels.size());
  for (double l : lam) p.freqs.push_back(-l);

  // moments d_i = e^{-i w T} c1 - c0
  Eigen::VectorXcd mom(ne);
  for (int i = 0; i < ne; ++i) {
    const int k = p.labels[i].k;
    const Vec2& zi = z[i];
    const cplx c0 = zi[0] * x0.u.coeff(k) + zi[1] * x0.v.coeff(k);
    const cplx c1 = zi[0] * x1.u.coeff(k) + zi[1] * x1.v.coeff(k);
    mom(i) = std::polar(1.0, -lam[i] * T) * c1 - c0;
  }

  p.blocks = group_blocks(p.freqs, opt.window, opt.cluster_tol);
  p.block.assign(ne, 0);
  for (std::size_t b = 0; b < p.blocks.size(); ++b)
    for (int i : p.blocks[b]) p.block[i] = static_cast<int>(b);

  const auto& gg = G.gg();
  p.F = Eigen::VectorXcd::Zero(ne);
  p.max_block_cond = 1.0;
  for (auto& blk : p.blocks) {
    std::sort(blk.begin(), blk.end());
    const int s = static_cast<int>(blk.size());
    if (s == 1) {
      const int i = blk[0];
      const double m = (z[i][0] * z[i][0] + z[i][1] * z[i][1]) *
                       gg(p.labels[i].k + n, p.labels[i].k + n).real();
      if (!(m > 0)) throw Error(ErrorCode::ClusterSingular, "zero control weight");
      p.F(i) = mom(i) / m;
      continue;
    }
    Eigen::MatrixXcd mb(s, s);
    Eigen::VectorXcd rhs(s);
    for (int a = 0; a < s; ++a) {
      const int i = blk[a];
      rhs(a) = mom(i);
      for (int b = 0; b < s; ++b) {
        const int j = blk[b];
        const double zz = z[i][0] * z[j][0] + z[i][1] * z[j][1];
        mb(a, b) = zz * gg(p.labels[i].k + n, p.labels[j].k + n);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mb, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 1e-13 * hi))
      throw Error(ErrorCode::ClusterSingular, "block matrix is numerically singular");
    p.max_block_cond = std::max(p.max_block_cond, hi / lo);
    Eigen::LLT<Eigen::MatrixXcd> llt(mb);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::ClusterSingular, "block matrix factorization failed");
    const Eigen::VectorXcd sol = llt.solve(rhs);
    for (int a = 0; a < s; ++a) p.F(blk[a]) = sol(a);
  }
  p.f_coef.resize(ne);
  p.h_coef.resize(ne);
  for (int i = 0; i < ne; ++i) {
    p.f_coef(i) = p.F(i) * z[i][0];
    p.h_coef(i) = p.F(i) * z[i][1];
  }

  const BlockFunctions bf = block_functions(p.freqs, p.blocks, T, opt.cond_cap);
  p.block_coeffs = bf.coeffs;
  p.gram_cond = bf.cond;
  p.biorth_residual = bf.residual;

  // per-entry time function coefficients, then half-spectrum maps
  Eigen::MatrixXcd q(ne, ne);
  for (int i = 0; i < ne; ++i) q.row(i) = p.block_coeffs.row(p.block[i]);
  const auto& g1 = G.matrix();
  Eigen::MatrixXcd af(n + 1, ne), ah(n + 1, ne), au(n + 1, ne), av(n + 1, ne);
  for (int i = 0; i < ne; ++i) {
    const int col = p.labels[i].k + n;
    for (int k = 0; k <= n; ++k) {
      af(k, i) = p.f_coef(i) * g1(k + n, col);
      ah(k, i) = p.h_coef(i) * g1(k + n, col);
      au(k, i) = p.f_coef(i) * gg(k + n, col);
      av(k, i) = p.h_coef(i) * gg(k + n, col);
    }
  }
  p.wf = af * q;
  p.wh = ah * q;
  p.wu = au * q;
  p.wv = av * q;
  return p;
}

PlanNorm plan_norm(const ControlPlan& plan, const StatePair& x0, const StatePair& x1, double s) {
  PlanNorm r{0, 0, hs_norm(x0, s) + hs_norm(x1, s), 0};
  const int ne = static_cast<int>(plan.freqs.size());
  if (ne > 0 && plan.wf.size() > 0) {
    Eigen::MatrixXcd h(ne, ne);
    for (int m = 0; m < ne; ++m)
      for (int mp = 0; mp < ne; ++mp) h(m, mp) = gram_entry(plan.freqs[mp], plan.freqs[m], plan.T);
    auto sq = [&](const Eigen::MatrixXcd& w) {
      double acc = 0;
      for (int k = 0; k <= plan.n_modes; ++k) {
        const Eigen::RowVectorXcd a = w.row(k);
        const double v = (a * h * a.adjoint())(0).real();
        acc += (k == 0 ? 1.0 : 2.0) * std::pow(1.0 + k, 2 * s) * std::max(v, 0.0);
      }
      return 2 * pi * acc;
    };
    r.f_norm = std::sqrt(sq(plan.wf));
    r.h_norm = std::sqrt(sq(plan.wh));
  }
  const double tot = std::hypot(r.f_norm, r.h_norm);
  r.ratio = r.data_norm > 0 ? tot / r.data_norm : 0.0;
  return r;
}

ControlMaps phi_psi(const StatePair& x0, const StatePair& x1, double T, const DerivedParams& d,
                    const GOperator& G, const SynthOptions& opt) {
  ControlMaps m;
  m.plan = synthesize_linear(x0, x1, T, d, G, opt);
  auto plan = std::make_shared<ControlPlan>(m.plan);
  m.phi = [plan](double t) { return plan->f_at(t); };
  m.psi = [plan](double t) { return plan->h_at(t); };
  return m;
}

namespace {

double sup_distance(const Trajectory& a, const Trajectory& b) {
  double d = 0;
  const std::size_t n = std::min(a.snapshots.size(), b.snapshots.size());
  for (std::size_t i = 0; i < n; ++i) d = std::max(d, l2_norm(a.snapshots[i] - b.snapshots[i]));
  return d;
}

}  // namespace

SteerResult steer_nonlinear(const StatePair& x0, const StatePair& x1, double T,
                            const DerivedParams& d, const GOperator& G, const SteerOptions& opt) {
  EvolutionConfig cfg;
  cfg.dt = opt.dt;
  cfg.t_end = T;
  cfg.record_every = opt.record_every;
  cfg.keep_snapshots = true;
  const double scale = std::max({l2_norm(x0), l2_norm(x1), std::numeric_limits<double>::min()});

  SteerResult res;
  StatePair target = x1;
  res.plan = synthesize_linear(x0, target, T, d, G, opt.synth);
  Attachments att;
  att.G = &G;
  att.plan = &res.plan;

  auto nonlinear = [&](const ControlPlan& plan) {
    Attachments a = att;
    a.plan = &plan;
    return run(cfg, x0, Mode::Nonlinear, d, a);
  };

  Trajectory prev;
  try {
    prev = nonlinear(res.plan);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BlowUp)
      throw Error(ErrorCode::NoContraction, std::string("first iterate diverged: ") + e.what());
    throw;
  }
  res.terminal = prev.final_state;
  res.terminal_error = l2_norm(prev.final_state - x1);
  if (l2_norm(x0) == 0 && l2_norm(x1) == 0) {
    res.history.push_back({1, 0.0, std::numeric_limits<double>::quiet_NaN(), 0.0});
    res.converged = true;
    return res;
  }

  int rises = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    EvolutionConfig lcfg = cfg;
    lcfg.keep_snapshots = false;
    Attachments la = att;
    la.plan = &res.plan;
    const Trajectory lin = run(lcfg, x0, Mode::Linear, d, la);
    target = x1 + (lin.final_state - prev.final_state);
    ControlPlan next = synthesize_linear(x0, target, T, d, G, opt.synth);
    Trajectory cur;
    try {
      cur = nonlinear(next);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::BlowUp)
        throw Error(ErrorCode::NoContraction,
                    "iterate " + std::to_string(it) + " diverged: " + e.what());
      throw;
    }
    const double dist = sup_distance(cur, prev);
    const double factor = res.history.empty() ? std::numeric_limits<double>::quiet_NaN()
                                              : dist / res.history.back().distance;
    const double err = l2_norm(cur.final_state - x1);
    if (!res.history.empty() && dist > res.history.back().distance)
      ++rises;
    else
      rises = 0;
    res.history.push_back({it, dist, factor, err});
    res.plan = std::move(next);
    res.terminal = cur.final_state;
    res.terminal_error = err;
    prev = std::move(cur);
    if (rises >= 3)
      throw Error(ErrorCode::NoContraction,
                  "iterate distance grew for 3 consecutive steps (last " + std::to_string(dist) + ")");
    if (dist <= opt.tol * scale) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace dctl
