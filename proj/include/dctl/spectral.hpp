#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "dctl/error.hpp"

namespace dctl {

using cplx = std::complex<double>;
using Vec2 = std::array<double, 2>;

struct PhysParams {
  double alpha = -1.3;
  double A = 1.0, B = 0.2, C = 0.2, D = 1.0;
  double beta_mean = 0.0, gamma_mean = 0.0;

  // Throws InvalidArgument unless alpha < 0 and every field is finite.
  void validate() const;
};

struct DerivedParams {
  PhysParams phys;
  double mu = 0.0, eta = 0.0, zeta = 0.0;

  double alpha() const { return phys.alpha; }
  // Linear constants given directly, nonlinear coefficients kept from phys.
  static DerivedParams direct(double alpha, double mu, double eta, double zeta,
                              double A, double B, double C, double D);
  // Default experiment set: alpha=-1.3, (mu,eta,zeta)=(0.01,0.05,0.01), (A,B,C,D)=(1,0.2,0.2,1).
  static DerivedParams defaults();
};

DerivedParams derive_params(const PhysParams& p);

// Warnings that do not stop a computation.
std::vector<std::string> param_warnings(const DerivedParams& d, double smallness = 0.1);

// Entries of the per-mode matrix M_k = [[a, c], [c, b]].
struct ModeMatrix {
  double a, b, c;
};
ModeMatrix mode_matrix(std::int64_t k, const DerivedParams& d);

// (omega_plus, omega_minus). The plus branch reduces to k^3 - mu k when eta = 0.
std::pair<double, double> omega(std::int64_t k, const DerivedParams& d);

// Unit eigenvectors (Z_plus, Z_minus).
std::pair<Vec2, Vec2> eigvec(std::int64_t k, const DerivedParams& d);

// Unnormalized vectors 2k^-3 (eta k, k^3 - mu k - omega); k = 0 uses the limiting pair.
std::pair<Vec2, Vec2> eigvec_raw(std::int64_t k, const DerivedParams& d);

struct Eigensystem {
  int n_modes = 0;
  // Indexed by k + n_modes.
  std::vector<double> omega_plus, omega_minus;
  std::vector<Vec2> z_plus, z_minus;
  std::vector<double> ordered_omega;
  std::vector<Vec2> ordered_vec;
  std::vector<int> ordered_branch;  // 0 plus, 1 minus

  int index(int k) const { return k + n_modes; }
  double omega_of(int k, int branch) const {
    return branch == 0 ? omega_plus[index(k)] : omega_minus[index(k)];
  }
  const Vec2& z_of(int k, int branch) const {
    return branch == 0 ? z_plus[index(k)] : z_minus[index(k)];
  }
};

Eigensystem ordered_basis(int N, const DerivedParams& d);

struct GapReport {
  double min_gap = 0.0;
  int argmin_k1 = 0, argmin_k2 = 0;
  std::vector<int> k;  // k = 0..N-1
  std::vector<double> gap_plus, gap_minus;
  double plus_growth_coeff = 0.0;
};

GapReport gap_report(int N, const DerivedParams& d);

struct FamilyLabel {
  int k;
  int branch;
};

struct Cluster {
  std::vector<std::size_t> members;  // indices into the frequency list
  double omega;
};

// Groups frequencies with |w_a - w_b| <= tol * max(1, |w|), chained in sorted order.
std::vector<Cluster> cluster_frequencies(const std::vector<double>& freqs, double tol,
                                         std::size_t max_size = 3);

struct ClusterReport {
  std::vector<FamilyLabel> labels;
  std::vector<double> freqs;
  std::vector<Cluster> clusters;
};

// Both branches, all |k| <= N.
ClusterReport resonant_clusters(int N, const DerivedParams& d, double tol = 1e-9);

double h_resonance(std::int64_t k1, std::int64_t k2, std::int64_t k3, double b1, double g1,
                   double b2, double g2);

struct DeltaScan {
  double delta_min;
  std::array<int, 3> argmin;
  bool hypothesis_ok;  // b1/b2 < 1/4
};

DeltaScan delta_significance_scan(int N, double b1, double g1, double b2, double g2,
                                  int workers = 0);

}  // namespace dctl
