#include "choquard/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace choq {

namespace {

double dist(const Vec& a, const Vec& b, int dim) {
  double s = 0;
  for (int d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

double norm(const Vec& a, int dim) {
  double s = 0;
  for (int d = 0; d < dim; ++d) s += a[d] * a[d];
  return std::sqrt(s);
}

}  // namespace

double PotentialSpec::eval(const Vec& x, int dim) const {
  double v = 0;
  const double r = dist(x, center, dim);
  switch (kind) {
    case PotentialKind::constant:
      v = floor;
      break;
    case PotentialKind::gaussian_well:
      v = floor + depth * (1.0 - std::exp(-r * r / (width * width)));
      break;
    case PotentialKind::power_decay:
      v = floor + scale / std::pow(1.0 + r * r, decay_gamma / 2.0);
      break;
    case PotentialKind::compact_support: {
      const double t = 1.0 - (r / support_radius) * (r / support_radius);
      v = t > 0 ? scale * t * t : 0.0;
      break;
    }
    case PotentialKind::custom_table:
      if (!table) throw std::invalid_argument("custom_table potential without table");
      v = table(x);
      break;
  }
  if (has_zero) {
    const double rz = dist(x, zero_center, dim) / zero_radius;
    v *= std::pow(std::min(1.0, rz), zero_exponent);
  }
  return v;
}

bool RegionSpec::contains(const Vec& x, int dim) const {
  if (shape == Shape::ball) return dist(x, center, dim) < halfwidths[0];
  for (int d = 0; d < dim; ++d)
    if (std::abs(x[d] - center[d]) >= halfwidths[d]) return false;
  return true;
}

double RegionSpec::interior_distance(const Vec& x, int dim) const {
  if (shape == Shape::ball) return halfwidths[0] - dist(x, center, dim);
  double m = HUGE_VAL;
  for (int d = 0; d < dim; ++d) m = std::min(m, halfwidths[d] - std::abs(x[d] - center[d]));
  return m;
}

void RegionSpec::validate_inside(const GridSpec& g) const {
  const double margin = 2.0 * g.spacing;
  for (int d = 0; d < g.dim; ++d) {
    const double hw = shape == Shape::ball ? halfwidths[0] : halfwidths[d];
    if (!(hw > 0)) throw std::invalid_argument("region has nonpositive extent");
    if (std::abs(center[d]) + hw > g.half_extent - margin)
      throw std::invalid_argument("region does not fit in the computational box with margin");
  }
}

Field ProblemParams::potential_field() const {
  return sample(grid, [this](const Vec& x) { return potential.eval(x, grid.dim); });
}

Field ProblemParams::lambda_mask() const {
  return sample(grid,
                [this](const Vec& x) { return lambda_region.contains(x, grid.dim) ? 1.0 : 0.0; });
}

void ProblemParams::validate() const {
  if (!(alpha > 0 && alpha < grid.dim)) throw std::invalid_argument("alpha must lie in (0, N)");
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  if (!(p >= 1)) throw std::invalid_argument("p must be >= 1");
  lambda_region.validate_inside(grid);
  outer_region.validate_inside(grid);
  // closure(Λ) ⊂ U with at least one cell of margin
  const double margin = grid.spacing;
  if (lambda_region.shape == RegionSpec::Shape::ball &&
      outer_region.shape == RegionSpec::Shape::ball) {
    if (dist(lambda_region.center, outer_region.center, grid.dim) + lambda_region.radius() +
            margin >
        outer_region.radius())
      throw std::invalid_argument("lambda_region must be strictly inside outer_region");
  }
  Field V = potential_field();
  if (min_value(V) < 0) throw std::invalid_argument("potential must be nonnegative");
}

HlsConstants hls_constants(int dim, double alpha) {
  if (!(alpha > 0 && alpha < dim)) throw std::invalid_argument("hls_constants: alpha out of range");
  const double N = dim;
  const double ratio = std::exp(std::lgamma((N - alpha) / 4) - std::lgamma((N + alpha) / 4));
  return {std::pow(2.0, -alpha) * ratio * ratio, riesz_norm_const(dim, alpha)};
}

RegimeReport validate_params(int dim, double alpha, double p) {
  if (dim < 1) throw std::invalid_argument("validate_params: dim must be >= 1");
  if (!(alpha > 0 && alpha < dim))
    throw std::invalid_argument("validate_params: alpha must lie in (0, N)");
  if (!(p >= 1)) throw std::invalid_argument("validate_params: p must be >= 1");
  RegimeReport r;
  const double N = dim;
  r.p_lower = (N + alpha) / N;
  r.p_upper = dim > 2 ? (N + alpha) / (N - 2) : HUGE_VAL;
  if (p <= r.p_lower) {
    r.limiting_solvable = false;
    r.reason = "p <= (N+alpha)/N (lower critical exponent)";
  } else if (p >= r.p_upper) {
    r.limiting_solvable = false;
    r.reason = "p >= (N+alpha)/(N-2) (upper critical exponent)";
  } else {
    r.limiting_solvable = true;
    r.reason = "(N+alpha)/N < p < (N+alpha)/(N-2)_+";
  }
  return r;
}

double penalized_g(double s, bool at_x_in_lambda, double h_at_x, double p) {
  const double sp = std::max(s, 0.0);
  const double pw = sp == 0 ? 0.0 : std::pow(sp, p - 1);
  if (at_x_in_lambda) return pw;
  return std::min(pw, h_at_x);
}

double penalized_G(double s, bool at_x_in_lambda, double h_at_x, double p) {
  const double sp = std::max(s, 0.0);
  if (sp == 0) return 0.0;
  if (at_x_in_lambda) return std::pow(sp, p) / p;
  const double crossover = h_at_x <= 0 ? 0.0 : std::pow(h_at_x, 1.0 / (p - 1));
  if (sp <= crossover) return std::pow(sp, p) / p;
  return h_at_x * sp - (1.0 - 1.0 / p) * std::pow(h_at_x, p / (p - 1));
}

double penalized_g_prime(double s, bool at_x_in_lambda, double h_at_x, double p) {
  const double sp = std::max(s, 0.0);
  if (sp == 0) return 0.0;
  const double pw = std::pow(sp, p - 1);
  if (!at_x_in_lambda && pw >= h_at_x) return 0.0;
  return (p - 1) * (p == 2 ? 1.0 : std::pow(sp, p - 2));
}

double Penalization::sup_outside_lambda() const {
  double m = 0;
  for (double x : h_field.v) m = std::max(m, x);
  return m;
}

namespace {

// C1 log-space cubic Hermite between (value va, log-slope sa) at rho=a and
// (vb, sb) at rho=b.
double log_hermite(double rho, double a, double b, double va, double sa, double vb, double sb) {
  const double t = (rho - a) / (b - a);
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  const double lw =
      h00 * std::log(va) + h10 * (b - a) * sa + h01 * std::log(vb) + h11 * (b - a) * sb;
  return std::exp(lw);
}

struct CaseGeometry {
  double r_lam, r_out, big_r;
};

// Radial supersolution profile w_μ(ρ): 1 on Λ, the case formula far out,
// C1 positive blends in between.
double w_profile_at(double rho, int case_id, double mu, const CaseGeometry& geo) {
  const double rl = geo.r_lam, ru = geo.r_out;
  if (rho <= rl) return 1.0;
  if (case_id == 1 || case_id == 2) {
    if (rho >= ru) return std::pow(rho, -mu);
    return log_hermite(rho, rl, ru, 1.0, 0.0, std::pow(ru, -mu), -mu / ru);
  }
  // case 3: quadratic bridge 2R² - ρ² on [ru, R], power tail past 2R
  const double R = geo.big_r;
  auto quad = [R](double r) { return 2 * R * R - r * r; };
  if (rho < ru) return log_hermite(rho, rl, ru, 1.0, 0.0, quad(ru), -2 * ru / quad(ru));
  if (rho <= R) return quad(rho);
  if (rho >= 2 * R) return std::pow(rho, -mu);
  return log_hermite(rho, R, 2 * R, quad(R), -2 * R / quad(R), std::pow(2 * R, -mu),
                     -mu / (2 * R));
}

}  // namespace

double inf_lambda_potential(const ProblemParams& params) {
  Field V = params.potential_field();
  double m = HUGE_VAL;
  for (std::int64_t i = 0; i < V.size(); ++i)
    if (params.lambda_region.contains(params.grid.point(i), params.dim())) m = std::min(m, V[i]);
  if (!std::isfinite(m)) throw std::invalid_argument("lambda_region contains no grid point");
  return m;
}

Penalization build_penalization(int case_id, const ProblemParams& params, double lam,
                                double delta) {
  params.validate();
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0,1)");
  if (params.lambda_region.shape != RegionSpec::Shape::ball ||
      params.outer_region.shape != RegionSpec::Shape::ball)
    throw std::invalid_argument("penalization requires ball-shaped regions");
  const double N = params.dim(), alpha = params.alpha, p = params.p;
  Field V = params.potential_field();

  CaseGeometry geo{params.lambda_region.radius(), params.outer_region.radius(), 0};
  double mu = 0;
  switch (case_id) {
    case 1: {
      if (params.dim() < 3) throw std::invalid_argument("case 1 requires N >= 3");
      const double bound = 1 + std::max(alpha, (alpha + 2) / 2) / (N - 2);
      if (!(p > bound))
        throw std::invalid_argument("case 1 requires p > 1 + max(alpha,(alpha+2)/2)/(N-2) = " +
                                    std::to_string(bound));
      const double lo = std::max(alpha / p, (2 + alpha) / (2 * (p - 1)));
      const double hi = N - 2;
      mu = (lo + hi) / 2;
      break;
    }
    case 2: {
      if (std::abs(p - 2) > 1e-12) throw std::invalid_argument("case 2 requires p = 2");
      if (!(alpha >= N - 2)) throw std::invalid_argument("case 2 requires alpha >= N - 2");
      double vmin = HUGE_VAL;
      for (std::int64_t i = 0; i < V.size(); ++i) {
        const double r = norm(params.grid.point(i), params.dim());
        vmin = std::min(vmin, V[i] * (1 + std::pow(r, N - alpha)));
      }
      if (!(vmin > 0))
        throw std::invalid_argument("case 2 requires inf V(x)(1+|x|^{N-alpha}) > 0 (measured " +
                                    std::to_string(vmin) + ")");
      mu = N / 2 + 1;
      break;
    }
    case 3: {
      if (!(p > 2)) throw std::invalid_argument("case 3 requires p > 2");
      double vmin = HUGE_VAL;
      for (std::int64_t i = 0; i < V.size(); ++i) {
        const double r = norm(params.grid.point(i), params.dim());
        if (r >= 0.5 * params.grid.half_extent) vmin = std::min(vmin, V[i] * r * r);
      }
      if (!(vmin > 0))
        throw std::invalid_argument("case 3 requires liminf V(x)|x|^2 > 0 (measured " +
                                    std::to_string(vmin) + ")");
      const double lo = std::max(N / p, (2 - N + alpha) / (p - 2));
      const double hi = 2 * N;
      if (!(lo < hi)) throw std::invalid_argument("case 3: empty admissible mu interval");
      mu = (lo + hi) / 2;
      geo.big_r = geo.r_out + 1.0;
      break;
    }
    default:
      throw std::invalid_argument("penalization case must be 1, 2 or 3");
  }

  if (lam < 0) {
    const double m = 0.9 * std::sqrt((1 - delta) * inf_lambda_potential(params));
    const double r = 0.4 * params.lambda_region.radius();
    lam = 0.5 * m * r;
  }

  Penalization pen;
  pen.case_id = case_id;
  pen.mu = mu;
  pen.lam = lam;
  pen.delta = delta;
  pen.eps = params.eps;
  const Vec c = params.lambda_region.center;
  pen.w_profile = sample(params.grid, [&](const Vec& x) {
    return w_profile_at(dist(x, c, params.dim()), case_id, mu, geo);
  });
  const double amp = std::exp(-(p - 1) * lam / params.eps);
  pen.h_field = Field(params.grid);
  for (std::int64_t i = 0; i < pen.h_field.size(); ++i) {
    const Vec x = params.grid.point(i);
    pen.h_field[i] = params.lambda_region.contains(x, params.dim())
                         ? 0.0
                         : amp * std::pow(pen.w_profile[i], p - 1);
  }
  require_finite(pen.h_field, "build_penalization");
  return pen;
}

Penalization disabled_penalization(const ProblemParams& params) {
  Penalization pen;
  pen.disabled = true;
  pen.eps = params.eps;
  pen.h_field = Field(params.grid);
  pen.w_profile = Field(params.grid, 1.0);
  return pen;
}

double hardy_quotient(Penalization& pen, const ProblemParams& params, int trial_count,
                      std::uint64_t seed, const Field* iterate) {
  if (trial_count < 16) throw std::invalid_argument("hardy_quotient: trial_count must be >= 16");
  const GridSpec& g = params.grid;
  Field V = params.potential_field();
  const double eps = params.eps;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cdist(-0.5 * g.half_extent, 0.5 * g.half_extent);
  std::uniform_real_distribution<double> wdist(0.5, 2.0);

  auto quotient = [&](const Field& phi) -> double {
    std::vector<double> num(phi.size()), den(phi.size());
    for (std::int64_t i = 0; i < phi.size(); ++i) {
      const double r = norm(g.point(i), g.dim);
      num[i] = pen.h_field[i] * pen.h_field[i] * phi[i] * phi[i] * std::pow(r, params.alpha);
      den[i] = V[i] * phi[i] * phi[i];
    }
    const double hN = g.cell_volume();
    const double denom = eps * eps * grad_sq_integral(phi) + hN * pairwise_sum(den);
    if (!(denom > 0)) throw std::invalid_argument("hardy_quotient: degenerate trial field");
    return std::pow(eps, -params.alpha) * hN * pairwise_sum(num) / denom;
  };

  double kappa = 0;
  for (int t = 0; t < trial_count; ++t) {
    Vec c{0, 0, 0};
    for (int d = 0; d < g.dim; ++d) c[d] = cdist(rng);
    const double w = wdist(rng) * params.lambda_region.radius();
    Field phi = sample(g, [&](const Vec& x) {
      const double r = dist(x, c, g.dim);
      return std::exp(-r * r / (w * w));
    });
    kappa = std::max(kappa, quotient(phi));
  }
  if (iterate && l2_norm(*iterate) > 0) kappa = std::max(kappa, quotient(*iterate));
  pen.measured_kappa = kappa;
  return kappa;
}

double measure_nu(Penalization& pen, const ProblemParams& params, const Field& u,
                  const RieszKernel& kernel) {
  const GridSpec& g = params.grid;
  Field masked(g);
  for (std::int64_t i = 0; i < u.size(); ++i)
    masked[i] = params.lambda_region.contains(g.point(i), g.dim)
                    ? std::pow(std::max(u[i], 0.0), params.p)
                    : 0.0;
  Field conv = riesz_convolve(masked, kernel);
  const Vec c = params.lambda_region.center;
  const double epsN = std::pow(params.eps, g.dim);
  double nu = 0;
  for (std::int64_t i = 0; i < conv.size(); ++i) {
    const Vec x = g.point(i);
    if (params.lambda_region.contains(x, g.dim)) continue;
    const double ia = kernel.norm_const * std::pow(dist(x, c, g.dim), params.alpha - g.dim);
    nu = std::max(nu, conv[i] / (epsN * ia));
  }
  nu *= 1.2;  // measurement headroom
  pen.nu = std::max(pen.nu, nu);
  return pen.nu;
}

Field build_barrier(const Penalization& pen, const ProblemParams& params, const Vec& a_eps,
                    double r, double m, double /*big_r*/) {
  if (pen.disabled) throw std::invalid_argument("build_barrier: penalization disabled");
  const double infV = inf_lambda_potential(params);
  if (!(m * m < (1 - pen.delta) * infV))
    throw std::invalid_argument("build_barrier: need m^2 < (1-delta) inf_Lambda V");
  const double d_int = params.lambda_region.interior_distance(a_eps, params.dim());
  if (!(r < 0.5 * d_int))
    throw std::invalid_argument("build_barrier: need r < dist(a_eps, boundary)/2");
  const double eps = params.eps;
  const GridSpec& g = params.grid;
  Field bar(g);
  for (std::int64_t i = 0; i < bar.size(); ++i) {
    const double d = dist(g.point(i), a_eps, g.dim);
    // cosh(m(r-d)/eps)/cosh(mr/eps), overflow-safe; 1/cosh(mr/eps) outside
    double ratio;
    if (d < r)
      ratio = std::exp(-m * d / eps) * (1 + std::exp(-2 * m * (r - d) / eps)) /
              (1 + std::exp(-2 * m * r / eps));
    else
      ratio = 2 * std::exp(-m * r / eps) / (1 + std::exp(-2 * m * r / eps));
    bar[i] = 2.0 * pen.w_profile[i] * ratio;
  }
  return bar;
}

double limiting_energy_value(const Field& v, double lambda, const ProblemParams& params,
                             const RieszKernel& kernel) {
  if (!(lambda > 0)) throw std::invalid_argument("limiting_energy: lambda must be positive");
  Field vp(v.grid);
  for (std::int64_t i = 0; i < v.size(); ++i) vp[i] = std::pow(std::max(v[i], 0.0), params.p);
  const double A = grad_sq_integral(v, params.strict_boundary) + lambda * inner(v, v);
  return A / 2 - riesz_bilinear(vp, vp, kernel) / (2 * params.p);
}

Field limiting_residual(const Field& v, double lambda, const ProblemParams& params,
                        const RieszKernel& kernel) {
  check_boundary_decay(v, params.strict_boundary);
  Field vp(v.grid), vpm1(v.grid);
  for (std::int64_t i = 0; i < v.size(); ++i) {
    const double s = std::max(v[i], 0.0);
    vp[i] = std::pow(s, params.p);
    vpm1[i] = s == 0 ? 0.0 : std::pow(s, params.p - 1);
  }
  Field conv = riesz_convolve(vp, kernel);
  Field lap = laplacian(v);
  Field r(v.grid);
  for (std::int64_t i = 0; i < v.size(); ++i)
    r[i] = -lap[i] + lambda * v[i] - conv[i] * vpm1[i];
  return r;
}

Field apply_g(const Field& u, const Penalization& pen, const ProblemParams& params) {
  Field out(u.grid);
  for (std::int64_t i = 0; i < u.size(); ++i) {
    const bool inside =
        pen.disabled || params.lambda_region.contains(u.grid.point(i), u.grid.dim);
    out[i] = penalized_g(u[i], inside, pen.h_field[i], params.p);
  }
  return out;
}

Field apply_G(const Field& u, const Penalization& pen, const ProblemParams& params) {
  Field out(u.grid);
  for (std::int64_t i = 0; i < u.size(); ++i) {
    const bool inside =
        pen.disabled || params.lambda_region.contains(u.grid.point(i), u.grid.dim);
    out[i] = penalized_G(u[i], inside, pen.h_field[i], params.p);
  }
  return out;
}

Field apply_g_prime(const Field& u, const Penalization& pen, const ProblemParams& params) {
  Field out(u.grid);
  for (std::int64_t i = 0; i < u.size(); ++i) {
    const bool inside =
        pen.disabled || params.lambda_region.contains(u.grid.point(i), u.grid.dim);
    out[i] = penalized_g_prime(u[i], inside, pen.h_field[i], params.p);
  }
  return out;
}

double penalized_energy(const Field& u, const Penalization& pen, const ProblemParams& params,
                        const RieszKernel& kernel) {
  require_same_grid(u, pen.h_field, "penalized_energy");
  Field V = params.potential_field();
  Field Gu = apply_G(u, pen, params);
  Field Vu2(u.grid);
  for (std::int64_t i = 0; i < u.size(); ++i) Vu2[i] = V[i] * u[i] * u[i];
  const double quad =
      params.eps * params.eps * grad_sq_integral(u, params.strict_boundary) + integrate(Vu2);
  return quad / 2 -
         params.p / (2 * std::pow(params.eps, params.alpha)) * riesz_bilinear(Gu, Gu, kernel);
}

double original_energy(const Field& u, const ProblemParams& params, const RieszKernel& kernel) {
  Field V = params.potential_field();
  Field up(u.grid), Vu2(u.grid);
  for (std::int64_t i = 0; i < u.size(); ++i) {
    up[i] = std::pow(std::abs(u[i]), params.p);
    Vu2[i] = V[i] * u[i] * u[i];
  }
  const double quad =
      params.eps * params.eps * grad_sq_integral(u, params.strict_boundary) + integrate(Vu2);
  return quad / 2 - riesz_bilinear(up, up, kernel) /
                        (2 * params.p * std::pow(params.eps, params.alpha));
}

Field euler_lagrange_residual(const Field& u, const Penalization* pen,
                              const ProblemParams& params, const RieszKernel& kernel) {
  check_boundary_decay(u, params.strict_boundary);
  Field V = params.potential_field();
  Field lap = laplacian(u);
  const double e2 = params.eps * params.eps;
  const double escale = std::pow(params.eps, -params.alpha);
  Field r(u.grid);
  if (pen) {
    Field Gu = apply_G(u, *pen, params);
    Field gu = apply_g(u, *pen, params);
    Field conv = riesz_convolve(Gu, kernel);
    for (std::int64_t i = 0; i < u.size(); ++i)
      r[i] = -e2 * lap[i] + V[i] * u[i] - params.p * escale * conv[i] * gu[i];
  } else {
    Field up(u.grid), nl(u.grid);
    for (std::int64_t i = 0; i < u.size(); ++i) up[i] = std::pow(std::abs(u[i]), params.p);
    Field conv = riesz_convolve(up, kernel);
    for (std::int64_t i = 0; i < u.size(); ++i) {
      const double au = std::abs(u[i]);
      const double upm = au == 0 ? 0.0 : std::pow(au, params.p - 2) * u[i];
      r[i] = -e2 * lap[i] + V[i] * u[i] - escale * conv[i] * upm;
    }
  }
  return r;
}

}  // namespace choq
