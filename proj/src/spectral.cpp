#include "spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace choq::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::vector<std::complex<double>> fft(const Dims& d, const std::vector<double>& in) {
  std::vector<std::complex<double>> buf(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) buf[i] = in[i];
  fft_inplace(d, buf);
  return buf;
}

void fft_inplace(const Dims& d, std::vector<std::complex<double>>& buf) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(d.rank, d.n, reinterpret_cast<fftw_complex*>(buf.data()),
                         reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                         FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

std::vector<double> ifft_real(const Dims& d, std::vector<std::complex<double>>& buf) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(d.rank, d.n, reinterpret_cast<fftw_complex*>(buf.data()),
                         reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD,
                         FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double inv = 1.0 / double(d.total());
  std::vector<double> out(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real() * inv;
  return out;
}

double xi_sq(const Dims& d, double period, std::int64_t flat) {
  double s = 0;
  const double base = 2.0 * M_PI / period;
  for (int a = d.rank - 1; a >= 0; --a) {
    const int k = int(flat % d.n[a]);
    flat /= d.n[a];
    const double xi = base * signed_freq(k, d.n[a]);
    s += xi * xi;
  }
  return s;
}

}  // namespace choq::detail
