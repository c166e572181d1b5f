#include <cmath>
#include <stdexcept>

#include "choquard/grid.hpp"
#include "spectral.hpp"

namespace choq {

using detail::Dims;

double riesz_norm_const(int dim, double alpha) {
  if (!(alpha > 0 && alpha < dim))
    throw std::invalid_argument("riesz_norm_const: alpha must lie in (0, N)");
  const double N = dim;
  return std::exp(std::lgamma((N - alpha) / 2) - std::lgamma(alpha / 2)) /
         (std::pow(M_PI, N / 2) * std::pow(2.0, alpha));
}

namespace {

constexpr int Q = 24;  // Gauss-Legendre points per axis

// Golub-Welsch is overkill at fixed Q; Newton iteration on Legendre P_Q.
void gauss_legendre(std::vector<double>& nodes, std::vector<double>& weights) {
  if (!nodes.empty()) return;
  nodes.resize(Q);
  weights.resize(Q);
  for (int i = 0; i < Q; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (Q + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= Q; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = Q * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = x;
    double p0 = 1, p1 = x;
    for (int k = 2; k <= Q; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = Q * (x * p1 - p0) / (x * x - 1);
    weights[i] = 2.0 / ((1 - x * x) * dp * dp);
  }
}

// ∫_{[-1,1]^N} |x|^{α-N} dx by dyadic-shell scaling: the integral over the
// cube equals the integral over the annulus [-1,1]^N \ [-1/2,1/2]^N divided
// by (1 - 2^{-α}).  The annulus is covered by side-1/2 cells with |x| >= 1/2,
// each handled by tensor Gauss-Legendre.
double unit_cube_riesz_integral(int dim, double alpha) {
  static thread_local std::vector<double> nodes, weights;
  gauss_legendre(nodes, weights);
  // cells of side 1/2 tiling [-1,1]^N; skip the central 2^N block
  double annulus = 0;
  const int cells = 4;  // per axis, [-1,1] in steps of 1/2
  int idx[3] = {0, 0, 0};
  const int total = dim == 1 ? 4 : dim == 2 ? 16 : 64;
  for (int c = 0; c < total; ++c) {
    int rem = c;
    bool central = true;
    double lo[3];
    for (int d = 0; d < dim; ++d) {
      idx[d] = rem % cells;
      rem /= cells;
      lo[d] = -1.0 + 0.5 * idx[d];
      if (idx[d] == 0 || idx[d] == 3) central = false;
    }
    if (central) continue;
    // tensor Gauss over [lo, lo+1/2]^dim
    const int qtotal = dim == 1 ? Q : dim == 2 ? Q * Q : Q * Q * Q;
    double cell = 0;
    for (int q = 0; q < qtotal; ++q) {
      int qr = q;
      double r2 = 0, w = 1;
      for (int d = 0; d < dim; ++d) {
        const int qi = qr % Q;
        qr /= Q;
        const double x = lo[d] + 0.25 * (nodes[qi] + 1.0);
        r2 += x * x;
        w *= 0.25 * weights[qi];
      }
      cell += w * std::pow(r2, (alpha - dim) / 2.0);
    }
    annulus += cell;
  }
  return annulus / (1.0 - std::pow(2.0, -alpha));
}

// cell average of A|x|^{α-N} over the non-singular grid cell at displacement
// s·h, tensor Gauss-Legendre (N >= 2; N = 1 has a closed form)
double cell_average(int dim, double alpha, const int s[3], double h, double A,
                    const std::vector<double>& nodes, const std::vector<double>& weights) {
  const int qtotal = dim == 2 ? Q * Q : Q * Q * Q;
  double acc = 0;
  for (int q = 0; q < qtotal; ++q) {
    int qr = q;
    double r2 = 0, w = 1;
    for (int d = 0; d < dim; ++d) {
      const int qi = qr % Q;
      qr /= Q;
      const double x = (s[d] + 0.5 * nodes[qi]) * h;
      r2 += x * x;
      w *= 0.5 * weights[qi];
    }
    acc += w * std::pow(r2, (alpha - dim) / 2.0);
  }
  return A * acc;
}

}  // namespace

RieszKernel make_riesz_kernel(const GridSpec& g, double alpha) {
  RieszKernel k;
  k.alpha = alpha;
  k.grid = g;
  k.norm_const = riesz_norm_const(g.dim, alpha);
  const double h = g.spacing;
  // cell average of A_α |x|^{α-N} over the singular cell
  k.self_cell_weight = k.norm_const * std::pow(h / 2, alpha) *
                       unit_cube_riesz_integral(g.dim, alpha) / std::pow(h, g.dim);

  Dims pd;
  pd.rank = g.dim;
  for (int d = 0; d < g.dim; ++d) pd.n[d] = 2 * g.n;
  k.padded_kernel.assign(pd.total(), 0.0);
  const int M = 2 * g.n;
  std::vector<double> nodes, weights;
  if (g.dim >= 2) gauss_legendre(nodes, weights);
  for (std::int64_t flat = 0; flat < std::int64_t(k.padded_kernel.size()); ++flat) {
    std::int64_t rem = flat;
    double r2 = 0;
    int s[3] = {0, 0, 0};
    int linf = 0;
    for (int d = g.dim - 1; d >= 0; --d) {
      const int i = int(rem % M);
      rem /= M;
      s[d] = i <= M / 2 ? i : i - M;  // wrapped displacement index
      linf = std::max(linf, std::abs(s[d]));
      const double x = s[d] * h;
      r2 += x * x;
    }
    // Pointwise sampling next to the singularity costs O(h^α) consistency;
    // cell averages restore second order.  N=1 has a closed form for every
    // cell; N>=2 quadratures only the near-diagonal block.
    double v;
    if (r2 == 0) {
      v = k.self_cell_weight;
    } else if (g.dim == 1) {
      const double a = std::abs(s[0]) * h;
      v = k.norm_const *
          (std::pow(a + h / 2, alpha) - std::pow(a - h / 2, alpha)) / (alpha * h);
    } else if (linf <= 3) {
      v = cell_average(g.dim, alpha, s, h, k.norm_const, nodes, weights);
    } else {
      v = k.norm_const * std::pow(r2, (alpha - g.dim) / 2.0);
    }
    k.padded_kernel[flat] = v;
  }
  k.padded_spectrum = detail::fft(pd, k.padded_kernel);
  return k;
}

Field riesz_convolve(const Field& f, const RieszKernel& k) {
  if (!(f.grid == k.grid)) throw std::invalid_argument("riesz_convolve: grid mismatch");
  const GridSpec& g = f.grid;
  Dims pd;
  pd.rank = g.dim;
  for (int d = 0; d < g.dim; ++d) pd.n[d] = 2 * g.n;
  // embed f in the zero-padded grid (box occupies the low-index block)
  std::vector<double> fp(pd.total(), 0.0);
  const int M = 2 * g.n;
  for (std::int64_t flat = 0; flat < f.size(); ++flat) {
    std::int64_t rem = flat, pf = 0, mul = 1;
    for (int d = g.dim - 1; d >= 0; --d) {
      pf += (rem % g.n) * mul;
      rem /= g.n;
      mul *= M;
    }
    fp[pf] = f[flat];
  }
  auto spec = detail::fft(pd, fp);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= k.padded_spectrum[i];
  auto conv = detail::ifft_real(pd, spec);
  Field out(g);
  const double hN = g.cell_volume();
  for (std::int64_t flat = 0; flat < out.size(); ++flat) {
    std::int64_t rem = flat, pf = 0, mul = 1;
    for (int d = g.dim - 1; d >= 0; --d) {
      pf += (rem % g.n) * mul;
      rem /= g.n;
      mul *= M;
    }
    out[flat] = conv[pf] * hN;
  }
  return out;
}

double riesz_bilinear(const Field& f, const Field& g, const RieszKernel& k) {
  require_same_grid(f, g, "riesz_bilinear");
  return inner(riesz_convolve(f, k), g);
}

}  // namespace choq
