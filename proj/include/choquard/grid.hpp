#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace choq {

using Vec = std::array<double, 3>;

/// Uniform tensor grid on [-L, L]^dim with midpoint samples
/// x_i = -L + (i + 1/2) h, h = 2L/n.  No sample lies on the boundary
/// and none lies exactly at the origin.
struct GridSpec {
  int dim = 1;
  int n = 8;               // points per axis, power of two
  double half_extent = 1;  // L
  double spacing = 0.25;   // h = 2L/n

  std::int64_t size() const {
    std::int64_t s = 1;
    for (int d = 0; d < dim; ++d) s *= n;
    return s;
  }
  double coord(std::int64_t i) const { return -half_extent + (double(i) + 0.5) * spacing; }
  Vec point(std::int64_t flat) const {
    Vec x{0, 0, 0};
    for (int d = dim - 1; d >= 0; --d) {
      x[d] = coord(flat % n);
      flat /= n;
    }
    return x;
  }
  /// Flat index of the grid point nearest to x (coordinates clamped to the box).
  std::int64_t nearest_index(const Vec& x) const;
  double cell_volume() const {
    double v = 1;
    for (int d = 0; d < dim; ++d) v *= spacing;
    return v;
  }
  bool operator==(const GridSpec& o) const {
    return dim == o.dim && n == o.n && half_extent == o.half_extent;
  }
};

GridSpec make_grid(int dim, int points_per_axis, double half_extent);

/// Real scalar function sampled on a GridSpec, row-major over axes.
struct Field {
  GridSpec grid;
  std::vector<double> v;

  Field() = default;
  explicit Field(const GridSpec& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

  std::int64_t size() const { return std::int64_t(v.size()); }
  double& operator[](std::int64_t i) { return v[i]; }
  double operator[](std::int64_t i) const { return v[i]; }
};

/// Throws std::invalid_argument if the grids differ.
void require_same_grid(const Field& a, const Field& b, const char* what);
/// Throws std::runtime_error if any value is NaN/Inf.
void require_finite(const Field& f, const char* what);

Field sample(const GridSpec& g, const std::function<double(const Vec&)>& fn);

/// Deterministic pairwise summation (stable across runs and thread counts).
double pairwise_sum(std::span<const double> xs);

/// h^N * sum(f)  (midpoint rule over the box).
double integrate(const Field& f);
/// h^N * sum(f g).
double inner(const Field& f, const Field& g);
double l2_norm(const Field& f);
double max_abs(const Field& f);
double min_value(const Field& f);
std::int64_t argmax_index(const Field& f);  // ties: lowest row-major index

/// Max |f| over the outermost two cells on every side.
double boundary_layer_max(const Field& f);
/// Relative boundary decay check used by spectral differential operators.
/// Warns (stderr, once per call site pattern) or throws in strict mode when
/// boundary values exceed `rel_tol * max|f|`.
void check_boundary_decay(const Field& f, bool strict, double rel_tol = 1e-5);

/// ∫|∇f|² via the Fourier multiplier |ξ|² on the periodic extension.
double grad_sq_integral(const Field& f, bool strict = false);
/// Δf via the multiplier -|ξ|².
Field laplacian(const Field& f);
/// (-eps2·Δ + shift)^{-1} f.  Requires eps2 > 0, shift > 0.
Field inv_helmholtz(const Field& f, double eps2, double shift);

/// Band-limited evaluation of f at center + stretch·(y - center) for every
/// grid point y, axis by axis (trig interpolation; points mapping outside
/// the box read as 0).
Field scale_resample(const Field& f, const Vec& center, double stretch);

/// Highest |signed frequency index| along any axis carrying spectral mass
/// above rel_floor * max; used for Nyquist checks before compression.
int spectral_bandwidth(const Field& f, double rel_floor = 1e-10);

/// Free-space Riesz potential kernel I_α on the zero-padding (doubled) grid.
struct RieszKernel {
  double alpha = 1;
  double norm_const = 0;  // A_α = Γ((N-α)/2) / (Γ(α/2) π^{N/2} 2^α)
  GridSpec grid;          // the source grid (kernel itself lives on 2n per axis)
  double self_cell_weight = 0;
  std::vector<double> padded_kernel;  // (2n)^N values, displacement-indexed
  std::vector<std::complex<double>> padded_spectrum;  // cached DFT of padded_kernel
};

double riesz_norm_const(int dim, double alpha);
RieszKernel make_riesz_kernel(const GridSpec& g, double alpha);

/// (I_α ∗ f)(x) ≈ h^N Σ_y K(x-y) f(y) over the box, via zero-padded FFT.
Field riesz_convolve(const Field& f, const RieszKernel& k);
/// ∫ (I_α ∗ f) g.  Symmetric in (f, g).
double riesz_bilinear(const Field& f, const Field& g, const RieszKernel& k);

}  // namespace choq
