#pragma once

#include <complex>
#include <vector>

namespace dctl::detail {

// Real transforms of size m through cached FFTW plans. Buffers are per thread.
// synth: samples[j] = sum_{|k|<=n} c_k e^{2 pi i jk/m}, c_{-k} = conj(c_k).
// analyze: c_k = (1/m) sum_j samples[j] e^{-2 pi i jk/m}, k = 0..n.
void synth(const std::complex<double>* half, int n, int m, double* samples);
void analyze(const double* samples, int m, int n, std::complex<double>* half);

}  // namespace dctl::detail
