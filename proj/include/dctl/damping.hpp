#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dctl/field.hpp"
#include "dctl/spectral.hpp"

namespace dctl {

// Nonnegative profile g with int g = 1, stored through its coefficients g^(j), |j| <= 2N,
// and its samples on a fine grid.
class GainProfile {
public:
  // c exp(-1/(1 - ((x - center)/radius)^2)) on (center - radius, center + radius).
  static GainProfile bump(int n_modes, double center, double radius);
  // Uniform samples on [0, 2pi); rescaled to unit integral.
  static GainProfile from_samples(int n_modes, const std::vector<double>& samples);
  // g = 0. Violates the unit-integral invariant on purpose; G becomes the zero operator.
  static GainProfile empty(int n_modes);

  int n_modes() const { return n_; }
  bool is_empty() const { return empty_; }
  cplx ghat(int j) const;
  const std::vector<double>& fine_samples() const { return fine_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  std::string kind() const { return kind_; }
  double integral() const;       // trapezoid on the fine grid
  double min_sample() const;

private:
  int n_ = 0;
  bool empty_ = false;
  std::string kind_;
  double lo_ = 0, hi_ = 0;
  std::vector<cplx> ghat_;  // j = 0..2N
  std::vector<double> fine_;
  void finish();
};

class GOperator {
public:
  explicit GOperator(GainProfile profile);

  int n_modes() const { return n_; }
  const GainProfile& profile() const { return profile_; }
  // Galerkin matrices on k = -N..N (index k + N).
  const Eigen::MatrixXcd& matrix() const { return g_; }
  const Eigen::MatrixXcd& gg() const { return gg_; }
  // Galerkin weights sum_{|m|<=N} |G_{mk}|^2, index k + N.
  const std::vector<double>& beta() const { return beta_; }
  // (1/2pi) int g^2 |e^{ikx} - int g e^{iky} dy|^2 dx on the fine grid, index k + N.
  std::vector<double> beta_continuum() const;
  // (1/2pi) int g^2, the large-|k| limit of beta_k.
  double beta_limit() const;
  double beta_floor() const;
  double norm() const;  // spectral norm of the Galerkin matrix

  // <G phi_j, phi_k> with phi_j = sigma_j e^{ijx}/sqrt(2pi) (a) or tau_j (b), ordered basis.
  Eigen::MatrixXcd a_matrix(const Eigensystem& E) const;
  Eigen::MatrixXcd b_matrix(const Eigensystem& E) const;

  // g (f - int g f) on a grid of at least 4N+1 points, truncated to N modes.
  PeriodicField apply(const PeriodicField& f) const;
  PeriodicField apply_matrix(const Eigen::MatrixXcd& m, const PeriodicField& f) const;

private:
  int n_;
  GainProfile profile_;
  Eigen::MatrixXcd g_, gg_;
  std::vector<double> beta_;
  int grid_m_;
  std::vector<double> g_grid_;
};

// exp(i t M_k).
Eigen::Matrix2cd mode_propagator(int k, double t, const DerivedParams& d);

enum class Quadrature { Exact, Simpson, Midpoint };

struct Branch {
  double beta, gamma;
  static Branch u(const DerivedParams& d) { return {1.0, d.mu}; }
  static Branch v(const DerivedParams& d) { return {d.alpha(), d.zeta}; }
};

class FeedbackOp {
public:
  FeedbackOp(const GOperator& op, Branch branch, double lambda,
             Quadrature quad = Quadrature::Exact, int n_quad = 64);

  double lambda() const { return lambda_; }
  Branch branch() const { return branch_; }
  // L on the zero-mean modes, k = -N..-1, 1..N.
  const Eigen::MatrixXcd& l_matrix() const { return l_; }
  double min_eig() const { return min_eig_; }
  double max_eig() const { return max_eig_; }
  double asymmetry() const { return asym_; }
  // Dense K on k = -N..N: GG for lambda = 0, GG L^-1 otherwise.
  const Eigen::MatrixXcd& k_matrix() const { return k_; }

  PeriodicField solve(const PeriodicField& f) const;
  PeriodicField apply_K(const GOperator& op, const PeriodicField& f) const;

private:
  int n_;
  Branch branch_;
  double lambda_;
  Eigen::MatrixXcd l_, k_;
  Eigen::LLT<Eigen::MatrixXcd> llt_;
  double min_eig_ = 0, max_eig_ = 0, asym_ = 0;
};

// Growth constant 2 ||G||^2 (||L_u^-1|| + ||L_v^-1||).
double gronwall_constant(const GOperator& op, const FeedbackOp& fu, const FeedbackOp& fv);

}  // namespace dctl
