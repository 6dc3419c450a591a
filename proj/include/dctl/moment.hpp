#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "dctl/damping.hpp"
#include "dctl/field.hpp"
#include "dctl/spectral.hpp"

namespace dctl {

// q_j(t) = sum_m C(j, m) e^{-i freqs[m] t}, with int_0^T e^{i freqs[k] t} q_j(t) dt = delta_jk.
struct BiorthogonalFamily {
  double T = 0;
  std::vector<double> freqs;
  Eigen::MatrixXcd C;
  double gram_cond = 0;
  double residual = 0;

  Eigen::VectorXcd exponentials(double t) const;
  cplx q(int j, double t) const;
};

BiorthogonalFamily build_biorthogonal(const std::vector<double>& freqs, double T,
                                      double cond_cap = 1e12);

// Closed-form int_0^T e^{i(a - b)t} dt.
cplx gram_entry(double a, double b, double T);

struct SynthOptions {
  // Frequencies closer than window share one time function (a moment block). 0 disables.
  double window = 0.0;
  // Relative tie tolerance; exact ties are always merged.
  double cluster_tol = 1e-9;
  double cond_cap = 1e12;
  // Resolution-independent default: 0.4 * 2pi / T.
  static SynthOptions for_horizon(double T);
};

struct ControlPlan {
  int n_modes = 0;
  double T = 0;
  double window = 0;
  std::vector<FamilyLabel> labels;  // family entry i: mode k_i != 0, branch r_i
  std::vector<double> freqs;        // -omega_{k_i}^{r_i}
  std::vector<int> block;           // block id of entry i
  std::vector<std::vector<int>> blocks;
  Eigen::MatrixXcd block_coeffs;    // row b: time function of block b in the exponentials
  Eigen::VectorXcd F;               // moment coefficient per entry
  Eigen::VectorXcd f_coef, h_coef;  // F sigma, F tau
  double gram_cond = 0;
  double biorth_residual = 0;
  double max_block_cond = 0;
  // half-spectrum coefficients against the exponentials, rows k = 0..N
  Eigen::MatrixXcd wf, wh;          // controls f, h
  Eigen::MatrixXcd wu, wv;          // inputs G f, G h

  bool is_zero() const;
  PeriodicField f_at(double t) const;
  PeriodicField h_at(double t) const;
  // Writes (G f, G h) at time t into the half spectra.
  void input_at(double t, cplx* gu, cplx* gv) const;
  std::string to_json() const;
  static ControlPlan from_json(const std::string& text);
};

ControlPlan synthesize_linear(const StatePair& x0, const StatePair& x1, double T,
                              const DerivedParams& d, const GOperator& G,
                              const SynthOptions& opt);

struct PlanNorm {
  double f_norm, h_norm, data_norm, ratio;
};
PlanNorm plan_norm(const ControlPlan& plan, const StatePair& x0, const StatePair& x1, double s);

struct ControlMaps {
  ControlPlan plan;
  std::function<PeriodicField(double)> phi, psi;
};
ControlMaps phi_psi(const StatePair& x0, const StatePair& x1, double T, const DerivedParams& d,
                    const GOperator& G, const SynthOptions& opt);

struct SteerOptions {
  int max_iter = 8;
  double tol = 1e-6;   // relative to the data norm
  double dt = 1e-4;
  int record_every = 10;
  SynthOptions synth;
};

struct SteerIterate {
  int iter;
  double distance;  // sup_t ||y_n(t) - y_{n-1}(t)||
  double factor;    // distance ratio, NaN for the first iterate
  double terminal_error;
};

struct SteerResult {
  ControlPlan plan;
  std::vector<SteerIterate> history;
  bool converged = false;
  double terminal_error = 0;
  StatePair terminal;
};

SteerResult steer_nonlinear(const StatePair& x0, const StatePair& x1, double T,
                            const DerivedParams& d, const GOperator& G, const SteerOptions& opt);

}  // namespace dctl
