#include "dctl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace dctl {

const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ClusterTooLarge: return "ClusterTooLarge";
    case ErrorCode::NotOnGamma: return "NotOnGamma";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SolveFailure: return "SolveFailure";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::ClusterSingular: return "ClusterSingular";
    case ErrorCode::NoContraction: return "NoContraction";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

void PhysParams::validate() const {
  for (double x : {alpha, A, B, C, D, beta_mean, gamma_mean})
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite parameter");
  if (!(alpha < 0)) throw Error(ErrorCode::InvalidArgument, "alpha must be negative");
}

DerivedParams derive_params(const PhysParams& p) {
  p.validate();
  DerivedParams d;
  d.phys = p;
  d.mu = 2 * p.beta_mean * p.A + p.gamma_mean * p.B;
  d.eta = p.beta_mean * p.B + p.gamma_mean * p.C;
  d.zeta = 2 * p.gamma_mean * p.D + p.beta_mean * p.C;
  return d;
}

DerivedParams DerivedParams::direct(double alpha, double mu, double eta, double zeta, double A,
                                    double B, double C, double D) {
  DerivedParams d;
  d.phys.alpha = alpha;
  d.phys.A = A;
  d.phys.B = B;
  d.phys.C = C;
  d.phys.D = D;
  d.phys.validate();
  if (!std::isfinite(mu) || !std::isfinite(eta) || !std::isfinite(zeta))
    throw Error(ErrorCode::InvalidArgument, "non-finite coupling constant");
  d.mu = mu;
  d.eta = eta;
  d.zeta = zeta;
  return d;
}

DerivedParams DerivedParams::defaults() {
  return direct(-1.3, 0.01, 0.05, 0.01, 1.0, 0.2, 0.2, 1.0);
}

std::vector<std::string> param_warnings(const DerivedParams& d, double smallness) {
  std::vector<std::string> w;
  if (std::abs(d.mu) + std::abs(d.zeta) >= smallness)
    w.push_back("|mu|+|zeta| is not below the smallness threshold");
  if (!(d.zeta - d.mu > 0)) w.push_back("zeta - mu is not positive");
  return w;
}

ModeMatrix mode_matrix(std::int64_t k, const DerivedParams& d) {
  const double kk = static_cast<double>(k);
  return {kk * (kk * kk - d.mu), kk * (d.alpha() * kk * kk - d.zeta), -d.eta * kk};
}

namespace {

// Eigen-split of [[a, c], [c, b]]: u-like value a + s*delta, v-like value b - s*delta.
struct Split {
  double h, r, s, delta;
};

Split split(const ModeMatrix& m) {
  Split sp;
  sp.h = 0.5 * (m.a - m.b);
  sp.r = std::hypot(sp.h, m.c);
  sp.s = sp.h >= 0 ? 1.0 : -1.0;
  const double den = sp.r + std::abs(sp.h);
  sp.delta = den > 0 ? m.c * m.c / den : 0.0;
  return sp;
}

std::pair<double, double> omega_nonneg(std::int64_t k, const DerivedParams& d) {
  if (k == 0) return {0.0, 0.0};
  const ModeMatrix m = mode_matrix(k, d);
  const Split sp = split(m);
  return {m.a + sp.s * sp.delta, m.b - sp.s * sp.delta};
}

Vec2 normalized(double x, double y) {
  const double n = std::hypot(x, y);
  return {x / n, y / n};
}

}  // namespace

std::pair<double, double> omega(std::int64_t k, const DerivedParams& d) {
  if (k < 0) {
    auto w = omega_nonneg(-k, d);
    return {-w.first, -w.second};
  }
  return omega_nonneg(k, d);
}

std::pair<Vec2, Vec2> eigvec(std::int64_t k, const DerivedParams& d) {
  const Vec2 e1{1.0, 0.0}, e2{0.0, 1.0};
  if (d.eta == 0.0) return {e1, e2};
  const double one_a = 1.0 - d.alpha();
  if (k == 0) {
    const double root = std::hypot(one_a, 2 * d.eta);
    const double plus2 = -4 * d.eta * d.eta / (one_a + root);
    return {normalized(2 * d.eta, plus2), normalized(2 * d.eta, one_a + root)};
  }
  const std::int64_t ak = k < 0 ? -k : k;
  const ModeMatrix m = mode_matrix(ak, d);
  const Split sp = split(m);
  const double den = sp.r + std::abs(sp.h);
  if (den == 0.0) return {e1, e2};
  const double ek = d.eta * static_cast<double>(ak);
  const double t = ek / den;
  const double nrm = std::sqrt(1.0 + t * t);
  const double sg = ek >= 0 ? 1.0 : -1.0;
  Vec2 zp{sg / nrm, -sg * sp.s * t / nrm};
  Vec2 zm{t / nrm, sp.s / nrm};
  return {zp, zm};
}

std::pair<Vec2, Vec2> eigvec_raw(std::int64_t k, const DerivedParams& d) {
  const double one_a = 1.0 - d.alpha();
  if (k == 0) {
    const double root = std::hypot(one_a, 2 * d.eta);
    return {Vec2{2 * d.eta, -4 * d.eta * d.eta / (one_a + root)},
            Vec2{2 * d.eta, one_a + root}};
  }
  const std::int64_t ak = k < 0 ? -k : k;
  const ModeMatrix m = mode_matrix(ak, d);
  const Split sp = split(m);
  const double kk = static_cast<double>(ak);
  const double scale = 2.0 / (kk * kk * kk);
  const double ek = d.eta * kk;
  // k^3 - mu k - omega for each branch, in cancellation-free form.
  const double up = -sp.s * sp.delta;
  const double um = sp.s * (std::abs(sp.h) + sp.r);
  return {Vec2{scale * ek, scale * up}, Vec2{scale * ek, scale * um}};
}

Eigensystem ordered_basis(int N, const DerivedParams& d) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be at least 1");
  Eigensystem e;
  e.n_modes = N;
  const std::size_t n = 2 * static_cast<std::size_t>(N) + 1;
  e.omega_plus.resize(n);
  e.omega_minus.resize(n);
  e.z_plus.resize(n);
  e.z_minus.resize(n);
  e.ordered_omega.resize(n);
  e.ordered_vec.resize(n);
  e.ordered_branch.resize(n);
  for (int k = -N; k <= N; ++k) {
    const auto w = omega(k, d);
    const auto z = eigvec(k, d);
    const int i = e.index(k);
    e.omega_plus[i] = w.first;
    e.omega_minus[i] = w.second;
    e.z_plus[i] = z.first;
    e.z_minus[i] = z.second;
    const bool even = (k % 2) == 0;
    e.ordered_branch[i] = even ? 0 : 1;
    e.ordered_omega[i] = even ? w.first : w.second;
    e.ordered_vec[i] = even ? z.first : z.second;
  }
  return e;
}

GapReport gap_report(int N, const DerivedParams& d) {
  if (N < 4) throw Error(ErrorCode::InvalidArgument, "gap_report needs N >= 4");
  const Eigensystem e = ordered_basis(N, d);
  GapReport g;
  std::vector<std::pair<double, int>> w;
  for (int k = -N; k <= N; ++k) w.push_back({e.ordered_omega[e.index(k)], k});
  std::sort(w.begin(), w.end());
  g.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < w.size(); ++i) {
    const double gap = w[i].first - w[i - 1].first;
    if (gap < g.min_gap) {
      g.min_gap = gap;
      g.argmin_k1 = w[i - 1].second;
      g.argmin_k2 = w[i].second;
    }
  }
  for (int k = 0; k < N; ++k) {
    g.k.push_back(k);
    g.gap_plus.push_back(e.omega_plus[e.index(k + 1)] - e.omega_plus[e.index(k)]);
    g.gap_minus.push_back(e.omega_minus[e.index(k + 1)] - e.omega_minus[e.index(k)]);
  }
  double num = 0, den = 0;
  for (int k = N / 2; k < N; ++k) {
    const double q = 3.0 * k * k + 3.0 * k + 1.0;
    num += q * g.gap_plus[k];
    den += q * q;
  }
  g.plus_growth_coeff = num / den;
  return g;
}

std::vector<Cluster> cluster_frequencies(const std::vector<double>& freqs, double tol,
                                         std::size_t max_size) {
  if (!(tol >= 0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be non-negative");
  std::vector<std::size_t> order(freqs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return freqs[a] < freqs[b]; });
  std::vector<Cluster> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double w = freqs[order[i]];
    if (!out.empty()) {
      const double prev = freqs[out.back().members.back()];
      const double scale = std::max({1.0, std::abs(w), std::abs(prev)});
      if (w - prev <= tol * scale) {
        out.back().members.push_back(order[i]);
        continue;
      }
    }
    out.push_back(Cluster{{order[i]}, w});
  }
  for (auto& c : out) {
    std::sort(c.members.begin(), c.members.end());
    double s = 0;
    for (auto m : c.members) s += freqs[m];
    c.omega = s / static_cast<double>(c.members.size());
    if (max_size > 0 && c.members.size() > max_size)
      throw Error(ErrorCode::ClusterTooLarge,
                  "cluster of size " + std::to_string(c.members.size()) + " near frequency " +
                      std::to_string(c.omega));
  }
  return out;
}

ClusterReport resonant_clusters(int N, const DerivedParams& d, double tol) {
  if (!(tol > 0) && tol != 0) throw Error(ErrorCode::InvalidArgument, "bad tolerance");
  ClusterReport r;
  for (int k = -N; k <= N; ++k) {
    const auto w = omega(k, d);
    r.labels.push_back({k, 0});
    r.freqs.push_back(w.first);
    r.labels.push_back({k, 1});
    r.freqs.push_back(w.second);
  }
  r.clusters = cluster_frequencies(r.freqs, tol, 3);
  return r;
}

double h_resonance(std::int64_t k1, std::int64_t k2, std::int64_t k3, double b1, double g1,
                   double b2, double g2) {
  if (k1 + k2 + k3 != 0) throw Error(ErrorCode::NotOnGamma, "k1 + k2 + k3 must vanish");
  auto phi = [](double b, double g, double k) { return b * k * k * k - g * k; };
  return phi(b1, g1, double(k1)) + phi(b2, g2, double(k2)) + phi(b2, g2, double(k3));
}

namespace {

struct ScanBest {
  double value = std::numeric_limits<double>::infinity();
  std::array<int, 3> triple{0, 0, 0};
};

bool better(double v, const std::array<int, 3>& t, const ScanBest& b) {
  if (v < b.value) return true;
  if (v > b.value) return false;
  return t < b.triple;
}

void scan_range(int N, int k1_lo, int k1_hi, double b1, double g1, double b2, double g2,
                ScanBest& best) {
  for (int k1 = k1_lo; k1 <= k1_hi; ++k1) {
    if (k1 == 0) continue;
    for (int k2 = -N; k2 <= N; ++k2) {
      if (k2 == 0) continue;
      const int k3 = -k1 - k2;
      if (k3 == 0 || k3 < -N || k3 > N) continue;
      const double h = h_resonance(k1, k2, k3, b1, g1, b2, g2);
      const double prod = std::abs(double(k1) * double(k2) * double(k3));
      const double v = (1.0 + std::abs(h)) / prod;
      const std::array<int, 3> t{k1, k2, k3};
      if (better(v, t, best)) {
        best.value = v;
        best.triple = t;
      }
    }
  }
}

}  // namespace

DeltaScan delta_significance_scan(int N, double b1, double g1, double b2, double g2,
                                  int workers) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be at least 1");
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, 2 * N + 1);
  std::vector<ScanBest> part(workers);
  std::vector<std::thread> pool;
  const int span = 2 * N + 1;
  for (int w = 0; w < workers; ++w) {
    const int lo = -N + (span * w) / workers;
    const int hi = -N + (span * (w + 1)) / workers - 1;
    if (workers == 1)
      scan_range(N, lo, hi, b1, g1, b2, g2, part[w]);
    else
      pool.emplace_back(scan_range, N, lo, hi, b1, g1, b2, g2, std::ref(part[w]));
  }
  for (auto& t : pool) t.join();
  ScanBest best;
  for (const auto& p : part)
    if (better(p.value, p.triple, best)) best = p;
  return {best.value, best.triple, b1 / b2 < 0.25};
}

}  // namespace dctl
