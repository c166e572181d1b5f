#include "choquard/grid.hpp"

#include <atomic>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "spectral.hpp"

namespace choq {

using detail::Dims;

GridSpec make_grid(int dim, int points_per_axis, double half_extent) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("make_grid: dim must be 1, 2 or 3");
  const int n = points_per_axis;
  if (n < 8 || (n & (n - 1)) != 0)
    throw std::invalid_argument("make_grid: points_per_axis must be a power of two >= 8");
  if (!(half_extent > 0)) throw std::invalid_argument("make_grid: half_extent must be positive");
  GridSpec g;
  g.dim = dim;
  g.n = n;
  g.half_extent = half_extent;
  g.spacing = 2.0 * half_extent / double(n);
  return g;
}

std::int64_t GridSpec::nearest_index(const Vec& x) const {
  std::int64_t flat = 0;
  for (int d = 0; d < dim; ++d) {
    double t = (x[d] + half_extent) / spacing - 0.5;
    std::int64_t i = std::llround(t);
    i = std::clamp<std::int64_t>(i, 0, n - 1);
    flat = flat * n + i;
  }
  return flat;
}

void require_same_grid(const Field& a, const Field& b, const char* what) {
  if (!(a.grid == b.grid)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

void require_finite(const Field& f, const char* what) {
  for (double x : f.v)
    if (!std::isfinite(x)) throw std::runtime_error(std::string(what) + ": non-finite field value");
}

Field sample(const GridSpec& g, const std::function<double(const Vec&)>& fn) {
  Field f(g);
  for (std::int64_t i = 0; i < f.size(); ++i) f[i] = fn(g.point(i));
  return f;
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 64) {
    double s = 0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

double integrate(const Field& f) { return f.grid.cell_volume() * pairwise_sum(f.v); }

double inner(const Field& f, const Field& g) {
  require_same_grid(f, g, "inner");
  std::vector<double> prod(f.v.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = f.v[i] * g.v[i];
  return f.grid.cell_volume() * pairwise_sum(prod);
}

double l2_norm(const Field& f) {
  std::vector<double> sq(f.v.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = f.v[i] * f.v[i];
  return std::sqrt(f.grid.cell_volume() * pairwise_sum(sq));
}

double max_abs(const Field& f) {
  double m = 0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}

double min_value(const Field& f) {
  double m = f.v.empty() ? 0 : f.v[0];
  for (double x : f.v) m = std::min(m, x);
  return m;
}

std::int64_t argmax_index(const Field& f) {
  std::int64_t best = 0;
  for (std::int64_t i = 1; i < f.size(); ++i)
    if (f[i] > f[best]) best = i;
  return best;
}

double boundary_layer_max(const Field& f) {
  const GridSpec& g = f.grid;
  double m = 0;
  for (std::int64_t flat = 0; flat < f.size(); ++flat) {
    std::int64_t rem = flat;
    bool in_layer = false;
    for (int d = g.dim - 1; d >= 0; --d) {
      const int i = int(rem % g.n);
      rem /= g.n;
      if (i < 2 || i >= g.n - 2) in_layer = true;
    }
    if (in_layer) m = std::max(m, std::abs(f[flat]));
  }
  return m;
}

void check_boundary_decay(const Field& f, bool strict, double rel_tol) {
  const double m = max_abs(f);
  if (m == 0) return;
  const double b = boundary_layer_max(f);
  if (b > rel_tol * m) {
    if (strict)
      throw std::runtime_error("boundary decay violated: boundary-layer max " +
                               std::to_string(b / m) + " relative");
    static std::atomic<int> warned{0};
    if (warned.fetch_add(1) < 8)
      std::cerr << "warning: weak boundary decay (relative boundary-layer max " << b / m
                << ")\n";
  }
}

namespace {

Field apply_multiplier(const Field& f, const std::function<double(double)>& mult_of_xi2) {
  const Dims d = detail::dims_of(f.grid);
  auto spec = detail::fft(d, f.v);
  const double period = 2.0 * f.grid.half_extent;
  for (std::int64_t k = 0; k < std::int64_t(spec.size()); ++k)
    spec[k] *= mult_of_xi2(detail::xi_sq(d, period, k));
  Field out(f.grid);
  out.v = detail::ifft_real(d, spec);
  return out;
}

}  // namespace

double grad_sq_integral(const Field& f, bool strict) {
  check_boundary_decay(f, strict);
  const Dims d = detail::dims_of(f.grid);
  auto spec = detail::fft(d, f.v);
  const double period = 2.0 * f.grid.half_extent;
  std::vector<double> terms(spec.size());
  for (std::int64_t k = 0; k < std::int64_t(spec.size()); ++k)
    terms[k] = detail::xi_sq(d, period, k) * std::norm(spec[k]);
  // Parseval: h^N Σ_x |∇f|² = (h^N / M) Σ_k |ξ_k|² |f̂_k|²
  return f.grid.cell_volume() / double(d.total()) * pairwise_sum(terms);
}

Field laplacian(const Field& f) {
  return apply_multiplier(f, [](double xi2) { return -xi2; });
}

Field inv_helmholtz(const Field& f, double eps2, double shift) {
  if (!(eps2 > 0) || !(shift > 0))
    throw std::invalid_argument("inv_helmholtz: eps2 and shift must be positive");
  return apply_multiplier(f, [=](double xi2) { return 1.0 / (eps2 * xi2 + shift); });
}

namespace {

// Periodic sinc (trig interpolation cardinal function) for an even-n axis,
// Nyquist handled as a cosine.  d is the displacement, P the period.
double dirichlet_even(double d, int n, double P) {
  const double t = M_PI * d / P;
  // near a sample point
  if (std::abs(std::sin(t)) < 1e-14) return std::abs(std::cos(t)) > 0.5 ? 1.0 : 0.0;
  return std::sin(double(n) * t) / (double(n) * std::tan(t));
}

}  // namespace

Field scale_resample(const Field& f, const Vec& center, double stretch) {
  const GridSpec& g = f.grid;
  const double P = 2.0 * g.half_extent;
  // 1D resampling matrix: target point t_j = center + stretch*(x_j - center)
  // along each axis (separable scaling about `center`).
  Field cur = f;
  for (int axis = 0; axis < g.dim; ++axis) {
    std::vector<double> T(std::size_t(g.n) * g.n, 0.0);
    for (int j = 0; j < g.n; ++j) {
      const double tj = center[axis] + stretch * (g.coord(j) - center[axis]);
      if (tj < -g.half_extent || tj > g.half_extent) continue;  // outside box -> 0
      for (int i = 0; i < g.n; ++i) T[std::size_t(j) * g.n + i] = dirichlet_even(tj - g.coord(i), g.n, P);
    }
    Field next(g);
    // apply T along `axis`
    std::int64_t stride = 1;
    for (int d = axis + 1; d < g.dim; ++d) stride *= g.n;
    const std::int64_t outer = cur.size() / (std::int64_t(g.n) * stride);
    for (std::int64_t o = 0; o < outer; ++o)
      for (std::int64_t s = 0; s < stride; ++s) {
        const std::int64_t base = o * g.n * stride + s;
        for (int j = 0; j < g.n; ++j) {
          double acc = 0;
          const double* row = &T[std::size_t(j) * g.n];
          for (int i = 0; i < g.n; ++i) acc += row[i] * cur[base + std::int64_t(i) * stride];
          next[base + std::int64_t(j) * stride] = acc;
        }
      }
    cur = std::move(next);
  }
  return cur;
}

int spectral_bandwidth(const Field& f, double rel_floor) {
  const Dims d = detail::dims_of(f.grid);
  auto spec = detail::fft(d, f.v);
  double peak = 0;
  for (auto& c : spec) peak = std::max(peak, std::abs(c));
  if (peak == 0) return 0;
  int bw = 0;
  for (std::int64_t flat = 0; flat < std::int64_t(spec.size()); ++flat) {
    if (std::abs(spec[flat]) <= rel_floor * peak) continue;
    std::int64_t rem = flat;
    for (int a = d.rank - 1; a >= 0; --a) {
      const int k = int(rem % d.n[a]);
      rem /= d.n[a];
      bw = std::max(bw, std::abs(detail::signed_freq(k, d.n[a])));
    }
  }
  return bw;
}

}  // namespace choq
