#include "dctl/evolution.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "fft.hpp"

namespace dctl {

using std::numbers::pi;

void EvolutionConfig::validate() const {
  if (!(dt > 0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (!(t_end >= dt)) throw Error(ErrorCode::InvalidArgument, "t_end must be at least dt");
  if (record_every < 1) throw Error(ErrorCode::InvalidArgument, "record_every must be positive");
}

double energy(const StatePair& y) {
  const double n = l2_norm(y);
  return 0.5 * n * n;
}

double mass(const PeriodicField& f) { return 2 * pi * f[0].real(); }

Stepper::Stepper(int n_modes, double dt, const DerivedParams& d, Mode mode, const Attachments& att,
                 const EvolutionConfig& cfg)
    : n_(n_modes), dt_(dt), d_(d), mode_(mode), att_(att), cfg_(cfg) {
  grid_m_ = fft_size(cfg.dealias ? 3 * n_ + 1 : 2 * n_ + 1);
  e_full_.resize(n_ + 1);
  e_half_.resize(n_ + 1);
  for (int k = 1; k <= n_; ++k) {
    e_full_[k] = mode_propagator(k, dt, d);
    e_half_[k] = mode_propagator(k, 0.5 * dt, d);
  }
  if (att_.plan && att_.plan->n_modes != n_)
    throw Error(ErrorCode::InvalidArgument, "plan truncation mismatch");
  if (mode_ == Mode::ClosedLoop) {
    if (!att_.G) throw Error(ErrorCode::InvalidArgument, "closed loop needs the G operator");
    if (att_.G->n_modes() != n_) throw Error(ErrorCode::InvalidArgument, "G truncation mismatch");
    const Eigen::MatrixXcd& mu = att_.fb_u ? att_.fb_u->k_matrix() : att_.G->gg();
    const Eigen::MatrixXcd& mv = att_.fb_v ? att_.fb_v->k_matrix() : att_.G->gg();
    ku_ = mu.bottomRows(n_ + 1);
    kv_ = mv.bottomRows(n_ + 1);
  }
}

void Stepper::rhs(const Eigen::ArrayXcd& u, const Eigen::ArrayXcd& v, double t,
                  Eigen::ArrayXcd& du, Eigen::ArrayXcd& dv) const {
  du.setZero(n_ + 1);
  dv.setZero(n_ + 1);
  const bool nonlinear = mode_ != Mode::Linear && !cfg_.linearized;
  if (nonlinear) {
    const auto& p = d_.phys;
    thread_local std::vector<double> gu, gv, gp, gq;
    thread_local std::vector<cplx> hp, hq;
    gu.resize(grid_m_);
    gv.resize(grid_m_);
    gp.resize(grid_m_);
    gq.resize(grid_m_);
    hp.resize(n_ + 1);
    hq.resize(n_ + 1);
    detail::synth(u.data(), n_, grid_m_, gu.data());
    detail::synth(v.data(), n_, grid_m_, gv.data());
    for (int j = 0; j < grid_m_; ++j) {
      const double a = gu[j], b = gv[j];
      gp[j] = p.A * a * a + p.B * a * b + 0.5 * p.C * b * b;
      gq[j] = p.D * b * b + p.C * a * b + 0.5 * p.B * a * a;
    }
    detail::analyze(gp.data(), grid_m_, n_, hp.data());
    detail::analyze(gq.data(), grid_m_, n_, hq.data());
    for (int k = 1; k <= n_; ++k) {
      const cplx ik(0.0, double(k));
      du(k) = -ik * hp[k];
      dv(k) = -ik * hq[k];
    }
  }
  if (att_.plan && mode_ != Mode::ClosedLoop) {
    thread_local std::vector<cplx> cu, cv;
    cu.resize(n_ + 1);
    cv.resize(n_ + 1);
    att_.plan->input_at(t, cu.data(), cv.data());
    for (int k = 1; k <= n_; ++k) {
      du(k) += cu[k];
      dv(k) += cv[k];
    }
  }
  if (mode_ == Mode::ClosedLoop) {
    Eigen::VectorXcd fu(2 * n_ + 1), fv(2 * n_ + 1);
    for (int k = 0; k <= n_; ++k) {
      fu(n_ + k) = u(k);
      fv(n_ + k) = v(k);
      fu(n_ - k) = std::conj(u(k));
      fv(n_ - k) = std::conj(v(k));
    }
    const Eigen::VectorXcd ku = ku_ * fu;
    const Eigen::VectorXcd kv = kv_ * fv;
    for (int k = 1; k <= n_; ++k) {
      du(k) -= ku(k);
      dv(k) -= kv(k);
    }
  }
  du(0) = 0.0;
  dv(0) = 0.0;
}

void Stepper::prop(const Eigen::Matrix2cd* e, Eigen::ArrayXcd& u, Eigen::ArrayXcd& v) const {
  for (int k = 1; k <= n_; ++k) {
    const Eigen::Matrix2cd& m = e[k];
    const cplx a = u(k), b = v(k);
    u(k) = m(0, 0) * a + m(0, 1) * b;
    v(k) = m(1, 0) * a + m(1, 1) * b;
  }
}

void Stepper::step(StatePair& y, double t) const {
  const int n = n_;
  Eigen::ArrayXcd u = Eigen::Map<const Eigen::ArrayXcd>(y.u.half().data(), n + 1);
  Eigen::ArrayXcd v = Eigen::Map<const Eigen::ArrayXcd>(y.v.half().data(), n + 1);
  const double h = dt_;
  Eigen::ArrayXcd k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
  rhs(u, v, t, k1u, k1v);

  Eigen::ArrayXcd au = u + (0.5 * h) * k1u, av = v + (0.5 * h) * k1v;
  prop(e_half_.data(), au, av);
  rhs(au, av, t + 0.5 * h, k2u, k2v);

  Eigen::ArrayXcd hu = u, hv = v;
  prop(e_half_.data(), hu, hv);
  au = hu + (0.5 * h) * k2u;
  av = hv + (0.5 * h) * k2v;
  rhs(au, av, t + 0.5 * h, k3u, k3v);

  Eigen::ArrayXcd fu = u, fv = v;
  prop(e_full_.data(), fu, fv);
  Eigen::ArrayXcd tu = k3u, tv = k3v;
  prop(e_half_.data(), tu, tv);
  au = fu + h * tu;
  av = fv + h * tv;
  rhs(au, av, t + h, k4u, k4v);

  Eigen::ArrayXcd s1u = k1u, s1v = k1v;
  prop(e_full_.data(), s1u, s1v);
  Eigen::ArrayXcd s2u = k2u + k3u, s2v = k2v + k3v;
  prop(e_half_.data(), s2u, s2v);
  const Eigen::ArrayXcd nu = fu + (h / 6.0) * (s1u + 2.0 * s2u + k4u);
  const Eigen::ArrayXcd nv = fv + (h / 6.0) * (s1v + 2.0 * s2v + k4v);
  for (int k = 1; k <= n; ++k) {
    y.u[k] = nu(k);
    y.v[k] = nv(k);
  }
}

double Stepper::energy_dissipation(const StatePair& y) const {
  if (!att_.G) return 0.0;
  const PeriodicField gu = att_.G->apply(y.u);
  const PeriodicField gv = att_.G->apply(y.v);
  const double a = hs_norm(gu, 0), b = hs_norm(gv, 0);
  return a * a + b * b;
}

StatePair step_linear(const StatePair& y, double dt, const DerivedParams& d) {
  StatePair out = y;
  for (int k = 1; k <= y.n_modes(); ++k) {
    const Eigen::Matrix2cd m = mode_propagator(k, dt, d);
    const cplx a = y.u[k], b = y.v[k];
    out.u[k] = m(0, 0) * a + m(0, 1) * b;
    out.v[k] = m(1, 0) * a + m(1, 1) * b;
  }
  return out;
}

StatePair step_nonlinear(const StatePair& y, double t, double dt, const DerivedParams& d,
                         const ControlPlan* plan) {
  EvolutionConfig cfg;
  Attachments att;
  att.plan = plan;
  Stepper s(y.n_modes(), dt, d, Mode::Nonlinear, att, cfg);
  StatePair out = y;
  s.step(out, t);
  if (out.u.max_abs() > cfg.blowup || out.v.max_abs() > cfg.blowup ||
      !std::isfinite(out.u.max_abs() + out.v.max_abs()))
    throw Error(ErrorCode::BlowUp, "coefficient bound exceeded");
  return out;
}

StatePair step_closed_loop(const StatePair& y, double dt, const DerivedParams& d,
                           const FeedbackOp& fu, const FeedbackOp& fv, const GOperator& G) {
  EvolutionConfig cfg;
  Attachments att;
  att.G = &G;
  att.fb_u = &fu;
  att.fb_v = &fv;
  Stepper s(y.n_modes(), dt, d, Mode::ClosedLoop, att, cfg);
  StatePair out = y;
  s.step(out, 0.0);
  if (out.u.max_abs() > cfg.blowup || out.v.max_abs() > cfg.blowup ||
      !std::isfinite(out.u.max_abs() + out.v.max_abs()))
    throw Error(ErrorCode::BlowUp, "coefficient bound exceeded");
  return out;
}

Trajectory run(const EvolutionConfig& cfg, const StatePair& initial, Mode mode,
               const DerivedParams& d, const Attachments& att) {
  cfg.validate();
  const long nsteps = std::max(1L, std::lround(cfg.t_end / cfg.dt));
  const double dt = cfg.t_end / double(nsteps);
  Stepper stepper(initial.n_modes(), dt, d, mode, att, cfg);
  Trajectory tr;
  StatePair y = initial;
  auto record = [&](double t) {
    tr.t.push_back(t);
    tr.mass_u.push_back(mass(y.u));
    tr.mass_v.push_back(mass(y.v));
    tr.energy.push_back(energy(y));
    tr.l2.push_back(l2_norm(y));
    tr.hs.push_back(hs_norm(y, cfg.hs_s));
    tr.dissipation.push_back(stepper.energy_dissipation(y));
    if (cfg.keep_snapshots) tr.snapshots.push_back(y);
  };
  record(0.0);
  double e_prev = energy(y);
  tr.max_mass = std::max(std::abs(mass(y.u)), std::abs(mass(y.v)));
  for (long s = 1; s <= nsteps; ++s) {
    const double t0 = double(s - 1) * dt;
    stepper.step(y, t0);
    const double mx = std::max(y.u.max_abs(), y.v.max_abs());
    if (!(mx <= cfg.blowup))
      throw Error(ErrorCode::BlowUp, "coefficient bound exceeded at t=" + std::to_string(t0 + dt));
    const double e = energy(y);
    tr.max_energy_rise = std::max(tr.max_energy_rise, e - e_prev);
    e_prev = e;
    tr.max_mass = std::max({tr.max_mass, std::abs(mass(y.u)), std::abs(mass(y.v))});
    if (s % cfg.record_every == 0 || s == nsteps) record(double(s) * dt);
  }
  tr.steps = nsteps;
  tr.final_state = y;
  return tr;
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  os << "t,mass_u,mass_v,energy,l2,hs\r\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    os << fmt(t[i]) << ',' << fmt(mass_u[i]) << ',' << fmt(mass_v[i]) << ',' << fmt(energy[i])
       << ',' << fmt(l2[i]) << ',' << fmt(hs[i]) << "\r\n";
  return os.str();
}

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& norms) {
  if (t.size() != norms.size() || t.size() < 2)
    throw Error(ErrorCode::DegenerateFit, "need at least two samples");
  const double n = double(t.size());
  double st = 0, sy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(norms[i] > 1e-300) || !std::isfinite(norms[i]))
      throw Error(ErrorCode::DegenerateFit, "norm underflow in the fit window");
    st += t[i];
    sy += std::log(norms[i]);
  }
  const double mt = st / n, my = sy / n;
  double stt = 0, sty = 0, syy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double a = t[i] - mt, b = std::log(norms[i]) - my;
    stt += a * a;
    sty += a * b;
    syy += b * b;
  }
  if (!(stt > 0)) throw Error(ErrorCode::DegenerateFit, "fit window has no time extent");
  const double slope = sty / stt;
  const double icpt = my - slope * mt;
  const double ssres = std::max(0.0, syy - slope * sty);
  const double r2 = syy > 0 ? 1.0 - ssres / syy : 1.0;
  return {-slope, std::exp(icpt), r2};
}

DecayFit decay_fit(const Trajectory& traj, double t0, double t1) {
  std::vector<double> t, y;
  for (std::size_t i = 0; i < traj.t.size(); ++i)
    if (traj.t[i] >= t0 - 1e-12 && traj.t[i] <= t1 + 1e-12) {
      t.push_back(traj.t[i]);
      y.push_back(traj.l2[i]);
    }
  return decay_fit(t, y);
}

Observability observability_quotient(const std::vector<StatePair>& samples, double T,
                                     const EvolutionConfig& cfg, const DerivedParams& d,
                                     const GOperator& G) {
  Observability ob{0.0, {}};
  EvolutionConfig c = cfg;
  c.t_end = T;
  c.keep_snapshots = false;
  Attachments att;
  att.G = &G;
  for (const auto& s : samples) {
    const double num = std::pow(l2_norm(s), 2);
    if (!(num > 0)) throw Error(ErrorCode::InvalidArgument, "observability samples must be nonzero");
    const Trajectory tr = run(c, s, Mode::ClosedLoop, d, att);
    double den = 0;
    for (std::size_t i = 1; i < tr.t.size(); ++i)
      den += 0.5 * (tr.t[i] - tr.t[i - 1]) * (tr.dissipation[i] + tr.dissipation[i - 1]);
    if (!(den > 0) || !std::isfinite(num / den))
      throw Error(ErrorCode::ZeroDenominator, "observation integral vanishes");
    ob.rows.push_back({num, den, num / den});
    ob.rho_max = std::max(ob.rho_max, num / den);
  }
  return ob;
}

}  // namespace dctl
