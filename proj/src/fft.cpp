#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace dctl::detail {

namespace {

struct Plans {
  fftw_plan c2r = nullptr;
  fftw_plan r2c = nullptr;
};

std::mutex plan_mutex;

const Plans& plans_for(int m) {
  static std::map<int, Plans> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  double* r = fftw_alloc_real(m);
  fftw_complex* c = fftw_alloc_complex(m / 2 + 1);
  Plans p;
  p.c2r = fftw_plan_dft_c2r_1d(m, c, r, FFTW_ESTIMATE);
  p.r2c = fftw_plan_dft_r2c_1d(m, r, c, FFTW_ESTIMATE);
  fftw_free(r);
  fftw_free(c);
  return cache.emplace(m, p).first->second;
}

struct Buffers {
  int m = 0;
  double* r = nullptr;
  fftw_complex* c = nullptr;
  ~Buffers() {
    fftw_free(r);
    fftw_free(c);
  }
  void ensure(int size) {
    if (size == m) return;
    fftw_free(r);
    fftw_free(c);
    m = size;
    r = fftw_alloc_real(m);
    c = fftw_alloc_complex(m / 2 + 1);
  }
};

Buffers& buffers(int m) {
  thread_local Buffers b;
  b.ensure(m);
  return b;
}

}  // namespace

void synth(const std::complex<double>* half, int n, int m, double* samples) {
  const Plans& p = plans_for(m);
  Buffers& b = buffers(m);
  const int nh = m / 2 + 1;
  std::memset(b.c, 0, sizeof(fftw_complex) * nh);
  for (int k = 0; k <= n && k < nh; ++k) {
    b.c[k][0] = half[k].real();
    b.c[k][1] = half[k].imag();
  }
  b.c[0][1] = 0.0;
  fftw_execute_dft_c2r(p.c2r, b.c, b.r);
  std::memcpy(samples, b.r, sizeof(double) * m);
}

void analyze(const double* samples, int m, int n, std::complex<double>* half) {
  const Plans& p = plans_for(m);
  Buffers& b = buffers(m);
  std::memcpy(b.r, samples, sizeof(double) * m);
  fftw_execute_dft_r2c(p.r2c, b.r, b.c);
  const double s = 1.0 / m;
  const int nh = m / 2 + 1;
  for (int k = 0; k <= n; ++k)
    half[k] = k < nh ? std::complex<double>(b.c[k][0] * s, b.c[k][1] * s) : 0.0;
}

}  // namespace dctl::detail
