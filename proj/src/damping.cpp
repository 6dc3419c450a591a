#include "dctl/damping.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"

namespace dctl {

using std::numbers::pi;

namespace {

int fine_size(int n) { return fft_size(std::max(4096, 16 * n + 1)); }

}  // namespace

GainProfile GainProfile::bump(int n_modes, double center, double radius) {
  if (!(radius > 0) || radius > pi)
    throw Error(ErrorCode::InvalidArgument, "bump radius must lie in (0, pi]");
  GainProfile p;
  p.n_ = n_modes;
  p.kind_ = "bump";
  p.lo_ = center - radius;
  p.hi_ = center + radius;
  const int m = fine_size(n_modes);
  p.fine_.assign(m, 0.0);
  for (int j = 0; j < m; ++j) {
    const double x = 2 * pi * j / m;
    // periodic distance to the center
    double s = std::remainder(x - center, 2 * pi) / radius;
    if (std::abs(s) < 1) p.fine_[j] = std::exp(-1.0 / (1.0 - s * s));
  }
  p.finish();
  return p;
}

GainProfile GainProfile::from_samples(int n_modes, const std::vector<double>& samples) {
  if (samples.size() < 3) throw Error(ErrorCode::InvalidArgument, "too few profile samples");
  GainProfile p;
  p.n_ = n_modes;
  p.kind_ = "grid";
  const int ns = static_cast<int>(samples.size());
  const int m = fine_size(n_modes);
  if (ns == m) {
    p.fine_ = samples;
  } else {
    // trigonometric interpolation of the given samples onto the fine grid
    const int nk = (ns - 1) / 2;
    std::vector<cplx> half(nk + 1);
    detail::analyze(samples.data(), ns, nk, half.data());
    p.fine_.assign(m, 0.0);
    detail::synth(half.data(), std::min(nk, m / 2 - 1), m, p.fine_.data());
  }
  double lo = 2 * pi, hi = 0;
  for (int j = 0; j < m; ++j) {
    if (p.fine_[j] > 0) {
      const double x = 2 * pi * j / m;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  p.lo_ = lo;
  p.hi_ = hi;
  p.finish();
  return p;
}

GainProfile GainProfile::empty(int n_modes) {
  GainProfile p;
  p.n_ = n_modes;
  p.kind_ = "empty";
  p.empty_ = true;
  p.fine_.assign(fine_size(n_modes), 0.0);
  p.ghat_.assign(2 * n_modes + 1, cplx(0.0));
  return p;
}

void GainProfile::finish() {
  const int m = static_cast<int>(fine_.size());
  double sum = 0;
  for (double x : fine_) sum += x;
  const double integral = 2 * pi * sum / m;
  if (!(integral > 0)) throw Error(ErrorCode::InvalidArgument, "profile has zero integral");
  for (double& x : fine_) x /= integral;
  ghat_.assign(2 * n_ + 1, cplx(0.0));
  detail::analyze(fine_.data(), m, 2 * n_, ghat_.data());
  ghat_[0] = cplx(1.0 / (2 * pi), 0.0);
}

cplx GainProfile::ghat(int j) const {
  const int a = j < 0 ? -j : j;
  if (a > 2 * n_) return 0.0;
  return j >= 0 ? ghat_[a] : std::conj(ghat_[a]);
}

double GainProfile::integral() const {
  double s = 0;
  for (double x : fine_) s += x;
  return 2 * pi * s / static_cast<double>(fine_.size());
}

double GainProfile::min_sample() const { return *std::min_element(fine_.begin(), fine_.end()); }

GOperator::GOperator(GainProfile profile) : n_(profile.n_modes()), profile_(std::move(profile)) {
  const int n = n_;
  const int dim = 2 * n + 1;
  g_ = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = -n; k <= n; ++k) {
    if (k == 0) continue;
    for (int m = -n; m <= k; ++m) {
      if (m == 0) continue;
      const cplx val =
          profile_.ghat(k - m) - 2 * pi * profile_.ghat(k) * profile_.ghat(-m);
      if (m == k) {
        g_(k + n, m + n) = cplx(val.real(), 0.0);
      } else {
        g_(k + n, m + n) = val;
        g_(m + n, k + n) = std::conj(val);
      }
    }
  }
  gg_ = g_ * g_;
  for (int i = 0; i < dim; ++i) gg_(i, i) = cplx(gg_(i, i).real(), 0.0);
  beta_.assign(dim, 0.0);
  for (int k = -n; k <= n; ++k) beta_[k + n] = g_.col(k + n).squaredNorm();
  beta_[n] = 0.0;

  grid_m_ = fft_size(4 * n + 1);
  g_grid_.assign(grid_m_, 0.0);
  if (!profile_.is_empty()) {
    std::vector<cplx> half(2 * n + 1);
    for (int j = 0; j <= 2 * n; ++j) half[j] = profile_.ghat(j);
    detail::synth(half.data(), 2 * n, grid_m_, g_grid_.data());
  }
}

std::vector<double> GOperator::beta_continuum() const {
  const auto& g = profile_.fine_samples();
  const int m = static_cast<int>(g.size());
  std::vector<double> out(2 * n_ + 1, 0.0);
  for (int k = -n_; k <= n_; ++k) {
    if (k == 0 || profile_.is_empty()) continue;
    const cplx c = 2 * pi * profile_.ghat(-k);
    double acc = 0;
    for (int j = 0; j < m; ++j) {
      const double x = 2 * pi * j / m;
      acc += g[j] * g[j] * std::norm(std::polar(1.0, k * x) - c);
    }
    out[k + n_] = acc / m;
  }
  return out;
}

double GOperator::beta_limit() const {
  const auto& g = profile_.fine_samples();
  double acc = 0;
  for (double x : g) acc += x * x;
  return acc / static_cast<double>(g.size());
}

double GOperator::beta_floor() const {
  double b = std::numeric_limits<double>::infinity();
  for (int k = -n_; k <= n_; ++k)
    if (k != 0) b = std::min(b, beta_[k + n_]);
  return b;
}

double GOperator::norm() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd GOperator::a_matrix(const Eigensystem& E) const {
  Eigen::MatrixXcd a(2 * n_ + 1, 2 * n_ + 1);
  for (int j = -n_; j <= n_; ++j)
    for (int k = -n_; k <= n_; ++k)
      a(j + n_, k + n_) = E.ordered_vec[E.index(j)][0] * E.ordered_vec[E.index(k)][0] *
                          g_(k + n_, j + n_);
  return a;
}

Eigen::MatrixXcd GOperator::b_matrix(const Eigensystem& E) const {
  Eigen::MatrixXcd b(2 * n_ + 1, 2 * n_ + 1);
  for (int j = -n_; j <= n_; ++j)
    for (int k = -n_; k <= n_; ++k)
      b(j + n_, k + n_) = E.ordered_vec[E.index(j)][1] * E.ordered_vec[E.index(k)][1] *
                          g_(k + n_, j + n_);
  return b;
}

PeriodicField GOperator::apply(const PeriodicField& f) const {
  if (f.n_modes() != n_) throw Error(ErrorCode::InvalidArgument, "truncation mismatch");
  if (profile_.is_empty()) return PeriodicField(n_);
  std::vector<double> fg(grid_m_);
  detail::synth(f.half().data(), n_, grid_m_, fg.data());
  double mean = 0;
  for (int j = 0; j < grid_m_; ++j) mean += g_grid_[j] * fg[j];
  const double integral = 2 * pi * mean / grid_m_;
  for (int j = 0; j < grid_m_; ++j) fg[j] = g_grid_[j] * (fg[j] - integral);
  PeriodicField out(n_);
  detail::analyze(fg.data(), grid_m_, n_, out.half().data());
  out[0] = cplx(out[0].real(), 0.0);
  return out;
}

PeriodicField GOperator::apply_matrix(const Eigen::MatrixXcd& m, const PeriodicField& f) const {
  const int n = n_;
  Eigen::VectorXcd x(2 * n + 1);
  for (int k = -n; k <= n; ++k) x(k + n) = f.coeff(k);
  PeriodicField out(n);
  for (int k = 0; k <= n; ++k) out[k] = (m.row(k + n) * x)(0);
  out[0] = cplx(out[0].real(), 0.0);
  return out;
}

Eigen::Matrix2cd mode_propagator(int k, double t, const DerivedParams& d) {
  const auto w = omega(k, d);
  const auto z = eigvec(k, d);
  Eigen::Matrix2d W;
  W << z.first[0], z.second[0], z.first[1], z.second[1];
  Eigen::Matrix2cd D = Eigen::Matrix2cd::Zero();
  D(0, 0) = std::polar(1.0, w.first * t);
  D(1, 1) = std::polar(1.0, w.second * t);
  return W.cast<cplx>() * D * W.transpose().cast<cplx>();
}

namespace {

// int_0^1 e^{a tau} d tau
cplx exp_integral(cplx a) {
  if (std::abs(a) < 1e-2) {
    cplx term = 1.0, sum = 1.0;
    for (int n = 1; n <= 8; ++n) {
      term *= a / double(n + 1);
      sum += term;
    }
    return sum;
  }
  return (std::exp(a) - 1.0) / a;
}

cplx quad_integral(cplx a, Quadrature q, int n) {
  switch (q) {
    case Quadrature::Exact: return exp_integral(a);
    case Quadrature::Simpson: {
      const double h = 1.0 / n;
      cplx s = 1.0 + std::exp(a);
      for (int j = 1; j < n; ++j) s += (j % 2 ? 4.0 : 2.0) * std::exp(a * (j * h));
      return s * (h / 3.0);
    }
    case Quadrature::Midpoint: {
      const double h = 1.0 / n;
      cplx s = 0.0;
      for (int j = 0; j < n; ++j) s += std::exp(a * ((j + 0.5) * h));
      return s * h;
    }
  }
  return 0.0;
}

}  // namespace

FeedbackOp::FeedbackOp(const GOperator& op, Branch branch, double lambda, Quadrature quad,
                       int n_quad)
    : n_(op.n_modes()), branch_(branch), lambda_(lambda) {
  if (!(lambda >= 0)) throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");
  if (quad != Quadrature::Exact && (n_quad < 8 || n_quad % 2 != 0))
    throw Error(ErrorCode::InvalidArgument, "n_quad must be even and at least 8");
  const int n = n_;
  const int dim = 2 * n;
  auto red = [n](int k) { return k < 0 ? k + n : k + n - 1; };
  auto phi = [&](int k) {
    const double kk = k;
    return branch.beta * kk * kk * kk - branch.gamma * kk;
  };
  l_ = Eigen::MatrixXcd::Zero(dim, dim);
  const auto& gg = op.gg();
  for (int k = -n; k <= n; ++k) {
    if (k == 0) continue;
    for (int m = -n; m <= k; ++m) {
      if (m == 0) continue;
      const cplx a(-2 * lambda, phi(m) - phi(k));
      const cplx val = gg(k + n, m + n) * quad_integral(a, quad, n_quad);
      if (m == k) {
        l_(red(k), red(m)) = cplx(val.real(), 0.0);
      } else {
        l_(red(k), red(m)) = val;
        l_(red(m), red(k)) = std::conj(val);
      }
    }
  }
  // entries (m, k) for m > k come from the conjugate rule; record the raw mismatch
  asym_ = 0;
  for (int k = -n; k <= n && quad != Quadrature::Exact; ++k) {
    if (k == 0) continue;
    for (int m = k + 1; m <= n; ++m) {
      if (m == 0) continue;
      const cplx a(-2 * lambda, phi(m) - phi(k));
      const cplx raw = gg(k + n, m + n) * quad_integral(a, quad, n_quad);
      asym_ = std::max(asym_, std::abs(raw - std::conj(l_(red(m), red(k)))));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(l_, Eigen::EigenvaluesOnly);
  min_eig_ = es.eigenvalues().minCoeff();
  max_eig_ = es.eigenvalues().maxCoeff();
  if (!(min_eig_ > 0))
    throw Error(ErrorCode::NotPositiveDefinite,
                "L has minimum eigenvalue " + std::to_string(min_eig_));
  llt_.compute(l_);
  if (llt_.info() != Eigen::Success)
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization of L failed");

  k_ = Eigen::MatrixXcd::Zero(2 * n + 1, 2 * n + 1);
  if (lambda == 0) {
    k_ = gg;
  } else {
    // K = GG L^-1 restricted to the zero-mean modes: K^T = L^-T (GG)^T
    Eigen::MatrixXcd ggr(dim, dim);
    for (int k = -n; k <= n; ++k)
      for (int m = -n; m <= n; ++m)
        if (k != 0 && m != 0) ggr(red(k), red(m)) = gg(k + n, m + n);
    // (GG L^-1)^H = L^-1 GG since both are Hermitian
    const Eigen::MatrixXcd kh = llt_.solve(ggr);
    for (int k = -n; k <= n; ++k)
      for (int m = -n; m <= n; ++m)
        if (k != 0 && m != 0) k_(k + n, m + n) = std::conj(kh(red(m), red(k)));
  }
}

PeriodicField FeedbackOp::solve(const PeriodicField& f) const {
  const int n = n_;
  Eigen::VectorXcd x(2 * n);
  for (int k = -n; k <= n; ++k)
    if (k != 0) x(k < 0 ? k + n : k + n - 1) = f.coeff(k);
  const Eigen::VectorXcd y = llt_.solve(x);
  if (!y.allFinite()) throw Error(ErrorCode::SolveFailure, "L solve produced non-finite values");
  PeriodicField out(n);
  for (int k = 1; k <= n; ++k) out[k] = y(k + n - 1);
  return out;
}

PeriodicField FeedbackOp::apply_K(const GOperator& op, const PeriodicField& f) const {
  if (f.n_modes() != n_) throw Error(ErrorCode::InvalidArgument, "truncation mismatch");
  PeriodicField z(n_);
  for (int k = 1; k <= n_; ++k) z[k] = f[k];
  if (lambda_ > 0) z = solve(z);
  return op.apply(op.apply(z));
}

double gronwall_constant(const GOperator& op, const FeedbackOp& fu, const FeedbackOp& fv) {
  const double g = op.norm();
  return 2 * g * g * (1.0 / fu.min_eig() + 1.0 / fv.min_eig());
}

}  // namespace dctl
