#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "dctl/damping.hpp"
#include "dctl/field.hpp"
#include "dctl/moment.hpp"
#include "dctl/spectral.hpp"

namespace dctl {

enum class Mode { Linear, Nonlinear, ClosedLoop };

struct EvolutionConfig {
  double dt = 1e-4;
  double t_end = 1.0;
  int record_every = 100;
  bool dealias = true;
  bool keep_snapshots = false;
  bool linearized = false;  // drop P and Q
  double hs_s = 1.0;
  double blowup = 1e12;

  void validate() const;
};

struct Attachments {
  const ControlPlan* plan = nullptr;  // open-loop controls
  const GOperator* G = nullptr;       // needed for feedback and dissipation diagnostics
  // Closed loop uses -K u, -K v; without feedback operators K = GG.
  const FeedbackOp* fb_u = nullptr;
  const FeedbackOp* fb_v = nullptr;
};

struct Trajectory {
  std::vector<double> t, mass_u, mass_v, energy, l2, hs, dissipation;
  std::vector<StatePair> snapshots;
  StatePair final_state;
  double max_mass = 0;         // largest |mass| seen at any step
  double max_energy_rise = 0;  // largest per-step increase of the energy
  long steps = 0;

  std::string to_csv() const;
};

// RK4 in the integrating-factor (Lawson) form, exact 2x2 propagator per mode.
class Stepper {
public:
  Stepper(int n_modes, double dt, const DerivedParams& d, Mode mode, const Attachments& att,
          const EvolutionConfig& cfg);

  void step(StatePair& y, double t) const;
  double energy_dissipation(const StatePair& y) const;  // ||(Gu, Gv)||^2
  int n_modes() const { return n_; }

private:
  int n_;
  double dt_;
  DerivedParams d_;
  Mode mode_;
  Attachments att_;
  EvolutionConfig cfg_;
  int grid_m_;
  std::vector<Eigen::Matrix2cd> e_full_, e_half_;  // k = 0..N
  Eigen::MatrixXcd ku_, kv_;                        // rows k = 0..N of K

  void rhs(const Eigen::ArrayXcd& u, const Eigen::ArrayXcd& v, double t, Eigen::ArrayXcd& du,
           Eigen::ArrayXcd& dv) const;
  void prop(const Eigen::Matrix2cd* e, Eigen::ArrayXcd& u, Eigen::ArrayXcd& v) const;
};

double energy(const StatePair& y);
double mass(const PeriodicField& f);

StatePair step_linear(const StatePair& y, double dt, const DerivedParams& d);
StatePair step_nonlinear(const StatePair& y, double t, double dt, const DerivedParams& d,
                         const ControlPlan* plan = nullptr);
StatePair step_closed_loop(const StatePair& y, double dt, const DerivedParams& d,
                           const FeedbackOp& fu, const FeedbackOp& fv, const GOperator& G);

Trajectory run(const EvolutionConfig& cfg, const StatePair& initial, Mode mode,
               const DerivedParams& d, const Attachments& att = {});

struct DecayFit {
  double kappa, c, r2;
};
// Least squares of log ||(u,v)(t)|| over t0 <= t <= t1.
DecayFit decay_fit(const Trajectory& traj, double t0, double t1);
DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& norms);

struct ObservabilityRow {
  double numerator, denominator, quotient;
};
struct Observability {
  double rho_max;
  std::vector<ObservabilityRow> rows;
};
Observability observability_quotient(const std::vector<StatePair>& samples, double T,
                                     const EvolutionConfig& cfg, const DerivedParams& d,
                                     const GOperator& G);

}  // namespace dctl
