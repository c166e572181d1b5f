#pragma once

// Internal FFT helpers shared by grid.cpp and riesz.cpp.  Complex-to-complex
// FFTW transforms on row-major real data; plans are created per call with
// FFTW_ESTIMATE (deterministic) under the planner lock.

#include <complex>
#include <cstdint>
#include <vector>

#include "choquard/grid.hpp"

namespace choq::detail {

struct Dims {
  int rank = 1;
  int n[3] = {1, 1, 1};
  std::int64_t total() const {
    std::int64_t t = 1;
    for (int d = 0; d < rank; ++d) t *= n[d];
    return t;
  }
};

inline Dims dims_of(const GridSpec& g) {
  Dims d;
  d.rank = g.dim;
  for (int i = 0; i < g.dim; ++i) d.n[i] = g.n;
  return d;
}

std::vector<std::complex<double>> fft(const Dims& d, const std::vector<double>& in);
void fft_inplace(const Dims& d, std::vector<std::complex<double>>& buf);
/// Inverse transform including the 1/total() normalization; returns real part.
std::vector<double> ifft_real(const Dims& d, std::vector<std::complex<double>>& buf);

/// Signed frequency index for mode k on an n-point axis (Nyquist -> -n/2).
inline int signed_freq(int k, int n) { return k <= n / 2 ? k : k - n; }

/// |ξ|² at flat spectral index `flat` for a periodic box of period `period`
/// per axis: ξ_d = 2π k'_d / period.
double xi_sq(const Dims& d, double period, std::int64_t flat);

}  // namespace choq::detail
