#include "choquard/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace choq {

namespace {

double dist(const Vec& a, const Vec& b, int dim) {
  double s = 0;
  for (int d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

PohozaevDefects pohozaev_defect(const Field& v, double lambda, const ProblemParams& params,
                                const RieszKernel& kernel) {
  if (!(l2_norm(v) > 0)) throw std::invalid_argument("pohozaev_defect: zero field");
  const double N = params.dim(), p = params.p, alpha = params.alpha;
  Field vp(v.grid);
  for (std::int64_t i = 0; i < v.size(); ++i)
    vp[i] = std::pow(std::max(v[i], 0.0), p);
  const double K = grad_sq_integral(v);
  const double M = inner(v, v);
  const double D = riesz_bilinear(vp, vp, kernel);
  const double scale = K + lambda * M + D;
  PohozaevDefects d;
  d.pohozaev_rel =
      std::abs((N - 2) * K / 2 + N * lambda * M / 2 - (N + alpha) * D / (2 * p)) / scale;
  d.nehari_rel = std::abs(K + lambda * M - D) / scale;
  return d;
}

std::optional<double> mass_identity_check(const Field& v, double lambda, double energy,
                                          const ProblemParams& params) {
  if (std::abs(params.p - 2) > 1e-12 || std::abs(params.alpha - (params.dim() - 2)) > 1e-12)
    return std::nullopt;
  const double M = inner(v, v);
  if (!(M > 0)) throw std::invalid_argument("mass_identity_check: zero field");
  return std::abs(M - 2 * energy / lambda) / M;
}

double scaling_exponent(int dim, double alpha, double p) {
  return (alpha + 2) / (2 * (p - 1)) - (dim - 2) / 2.0;
}

double scaling_law_check(const SolveResult& result_1, const SolveResult& result_lambda,
                         double lambda, const ProblemParams& params) {
  if (!result_1.converged || !result_lambda.converged)
    throw std::invalid_argument("scaling_law_check: unconverged inputs");
  const double target = std::pow(lambda, scaling_exponent(params.dim(), params.alpha, params.p));
  return std::abs(result_lambda.energy / result_1.energy - target) / target;
}

EnergyBoundVerdict energy_upper_bound_check(const std::vector<SweepEntry>& sweep,
                                            double limiting_energy_at_min, double rel_tol) {
  if (sweep.empty()) throw std::invalid_argument("energy_upper_bound_check: empty sweep");
  EnergyBoundVerdict v;
  for (const SweepEntry& e : sweep)
    v.gaps.push_back(e.result.critical_value / std::pow(e.eps, e.result.field.grid.dim) -
                     limiting_energy_at_min);
  v.eventually_within = std::abs(v.gaps.back()) <= rel_tol * std::abs(limiting_energy_at_min);
  v.decreasing = true;
  for (std::size_t i = 1; i < v.gaps.size(); ++i)
    if (std::abs(v.gaps[i]) > std::abs(v.gaps[i - 1])) v.decreasing = false;
  return v;
}

ConcentrationMetrics concentration_metrics(const SolveResult& u, const ProblemParams& params,
                                           double rho, double big_r,
                                           const Field& limiting_profile) {
  const GridSpec& g = u.field.grid;
  const double eps = params.eps;
  ConcentrationMetrics m;
  const std::int64_t ai = argmax_index(u.field);
  m.a_eps = g.point(ai);
  m.a_in_lambda = params.lambda_region.contains(m.a_eps, g.dim);
  m.v_at_a = params.potential.eval(m.a_eps, g.dim);
  m.scaled_energy = u.critical_value / std::pow(eps, g.dim);

  const double epsN = std::pow(eps, g.dim);
  std::vector<double> in_ball(u.field.size(), 0.0);
  double sup_out = 0;
  for (std::int64_t i = 0; i < u.field.size(); ++i) {
    const double d = dist(g.point(i), m.a_eps, g.dim);
    if (d <= rho * eps) in_ball[i] = u.field[i] * u.field[i];
    if (d > big_r * eps) sup_out = std::max(sup_out, std::abs(u.field[i]));
  }
  m.scaled_mass_in_ball = g.cell_volume() * pairwise_sum(in_ball) / epsN;
  m.sup_outside = sup_out;

  // v_eps(y) = u(a + eps y), trig interpolation; compare against the limiting profile
  require_same_grid(u.field, limiting_profile, "concentration_metrics");
  Vec c{0, 0, 0};
  if (std::abs(1 - eps) > 1e-9)
    for (int d = 0; d < g.dim; ++d) c[d] = m.a_eps[d] / (1 - eps);
  Field v_eps = scale_resample(u.field, c, eps);
  Field diff(g);
  for (std::int64_t i = 0; i < diff.size(); ++i) diff[i] = v_eps[i] - limiting_profile[i];
  const double ref = l2_norm(limiting_profile);
  m.profile_l2_distance = ref > 0 ? l2_norm(diff) / ref : HUGE_VAL;
  return m;
}

UnpenalizationVerdict unpenalization_check(const SolveResult& u, const Penalization& pen,
                                           const ProblemParams& params,
                                           const RieszKernel& kernel) {
  UnpenalizationVerdict v;
  const GridSpec& g = u.field.grid;
  double worst = -HUGE_VAL;
  if (pen.disabled) {
    worst = 0;  // H ≡ +inf sentinel: vacuous
  } else {
    for (std::int64_t i = 0; i < u.field.size(); ++i) {
      if (params.lambda_region.contains(g.point(i), g.dim)) continue;
      const double up = std::pow(std::max(u.field[i], 0.0), params.p - 1);
      worst = std::max(worst, up - pen.h_field[i]);
    }
  }
  v.max_violation = std::max(worst, 0.0);
  v.ok = worst <= 1e-12;
  Field R = euler_lagrange_residual(u.field, nullptr, params, kernel);
  Field lap = laplacian(u.field);
  Field V = params.potential_field();
  Field denom(g);
  for (std::int64_t i = 0; i < denom.size(); ++i)
    denom[i] = -params.eps * params.eps * lap[i] + V[i] * u.field[i];
  v.unpenalized_residual_rel = l2_norm(R) / l2_norm(denom);
  return v;
}

int subsolution_check(const SolveResult& u, const Penalization& pen, const ProblemParams& params,
                      const Vec& a_eps, double big_r, double delta, const RieszKernel& kernel) {
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("subsolution_check: delta in (0,1)");
  if (pen.nu < 0) throw std::invalid_argument("subsolution_check: nu unmeasured");
  const GridSpec& g = u.field.grid;
  const double eps = params.eps, alpha = params.alpha, p = params.p;
  Field V = params.potential_field();
  Field lap = laplacian(u.field);
  Field Hu(g);
  for (std::int64_t i = 0; i < Hu.size(); ++i) Hu[i] = pen.h_field[i] * u.field[i];
  Field conv = riesz_convolve(Hu, kernel);
  const double c1 = p * std::pow(eps, -alpha);
  const double c2 = pen.nu * std::pow(eps, g.dim - alpha);
  const double collar = 2 * g.spacing;
  int violations = 0;
  for (std::int64_t i = 0; i < u.field.size(); ++i) {
    const Vec x = g.point(i);
    if (dist(x, a_eps, g.dim) <= big_r * eps) continue;
    if (std::abs(params.lambda_region.interior_distance(x, g.dim)) <= collar) continue;
    const double lhs = -eps * eps * lap[i] + (1 - delta) * V[i] * u.field[i];
    const double ia =
        kernel.norm_const * std::pow(dist(x, a_eps, g.dim), alpha - g.dim);
    const double rhs = (c1 * conv[i] + c2 * ia) * pen.h_field[i];
    const double slack = 1e-12 + 1e-9 * std::max(std::abs(lhs), std::abs(rhs));
    if (lhs > rhs + slack) ++violations;
  }
  return violations;
}

int comparison_check(const SolveResult& u, const Field& barrier, const Vec& a_eps, double big_r,
                     const ProblemParams& params) {
  require_same_grid(u.field, barrier, "comparison_check");
  const GridSpec& g = u.field.grid;
  int violations = 0;
  for (std::int64_t i = 0; i < u.field.size(); ++i) {
    if (dist(g.point(i), a_eps, g.dim) <= big_r * params.eps) continue;
    const double slack = 1e-12 + 1e-9 * std::abs(barrier[i]);
    if (u.field[i] > barrier[i] + slack) ++violations;
  }
  return violations;
}

std::optional<double> groundstate_transform_check(const SolveResult& u,
                                                  const ProblemParams& params,
                                                  const Vec& test_center, double rho,
                                                  const RieszKernel& kernel) {
  if (std::abs(params.p - 2) > 1e-12) return std::nullopt;
  const GridSpec& g = u.field.grid;
  Field phi = sample(g, [&](const Vec& x) {
    const double r = dist(x, test_center, g.dim) / rho;
    return r < 1 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
  });
  Field V = params.potential_field();
  Field u2(g), Vphi2(g);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    u2[i] = u.field[i] * u.field[i];
    Vphi2[i] = V[i] * phi[i] * phi[i];
  }
  Field conv = riesz_convolve(u2, kernel);
  Field rhs_int(g);
  for (std::int64_t i = 0; i < g.size(); ++i) rhs_int[i] = conv[i] * phi[i] * phi[i];
  const double lhs =
      params.eps * params.eps * grad_sq_integral(phi) + integrate(Vphi2);
  const double rhs = std::pow(params.eps, -params.alpha) * integrate(rhs_int);
  return lhs - rhs;
}

CriticalMassVerdict critical_mass_bound(const SolveResult& u, const ProblemParams& params) {
  CriticalMassVerdict v;
  const int N = params.dim();
  if (N < 3 || std::abs(params.p - 2) > 1e-12 || std::abs(params.alpha - (N - 2)) > 1e-12) {
    v.note = "needs p = 2, alpha = N-2, N >= 3";
    return v;
  }
  // annulus averages R^{2-N} ∫_{B_2R∖B_R} V must trend down
  const GridSpec& g = u.field.grid;
  const double r1 = g.half_extent / 4, r2 = g.half_extent / 2;
  auto annulus_avg = [&](double R) {
    std::vector<double> vals(g.size(), 0.0);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      const Vec x = g.point(i);
      const double r = dist(x, Vec{0, 0, 0}, g.dim);
      if (r > R && r <= 2 * R) vals[i] = params.potential.eval(x, g.dim);
    }
    return std::pow(R, 2 - N) * g.cell_volume() * pairwise_sum(vals);
  };
  const double q1 = annulus_avg(r1), q2 = annulus_avg(r2);
  if (!(q2 < q1)) {
    v.note = "annulus average of V is not decaying";
    return v;
  }
  v.applicable = true;
  v.scaled_mass = inner(u.field, u.field) / std::pow(params.eps, N);
  v.bound = critical_mass_bound_value(N);
  v.satisfied = v.scaled_mass <= v.bound;
  return v;
}

double critical_mass_bound_value(int dim) {
  if (dim < 3) throw std::invalid_argument("critical_mass_bound_value: needs N >= 3");
  const double half = (dim - 2) / 2.0;
  return std::tgamma(half) * std::pow(M_PI, dim / 2.0) * std::pow(2.0, dim - 2) * half * half;
}

std::string report_to_json(const DiagnosticsReport& r) {
  std::ostringstream os;
  os << "{";
  os << "\"pohozaev_defect_rel\":" << fmt17(r.pohozaev_defect_rel);
  os << ",\"nehari_defect_rel\":" << fmt17(r.nehari_defect_rel);
  os << ",\"scaling_ratio_error\":"
     << (r.scaling_ratio_error ? fmt17(*r.scaling_ratio_error) : "null");
  os << ",\"mass_identity_error\":"
     << (r.mass_identity_error ? fmt17(*r.mass_identity_error) : "null");
  os << ",\"energy_upper_gap\":" << fmt17(r.energy_upper_gap);
  os << ",\"a_eps\":[" << fmt17(r.concentration.a_eps[0]) << "," << fmt17(r.concentration.a_eps[1])
     << "," << fmt17(r.concentration.a_eps[2]) << "]";
  os << ",\"v_at_a\":" << fmt17(r.concentration.v_at_a);
  os << ",\"scaled_energy\":" << fmt17(r.concentration.scaled_energy);
  os << ",\"scaled_mass_in_ball\":" << fmt17(r.concentration.scaled_mass_in_ball);
  os << ",\"sup_outside\":" << fmt17(r.concentration.sup_outside);
  os << ",\"profile_l2_distance\":" << fmt17(r.concentration.profile_l2_distance);
  os << ",\"a_in_lambda\":" << (r.concentration.a_in_lambda ? "true" : "false");
  os << ",\"unpenalized\":" << (r.unpenalized ? "true" : "false");
  os << ",\"hardy_kappa\":" << fmt17(r.hardy_kappa);
  os << ",\"comparison_violations\":" << r.comparison_violations;
  os << ",\"subsolution_violations\":" << r.subsolution_violations;
  os << ",\"notes\":[";
  for (std::size_t i = 0; i < r.notes.size(); ++i) {
    if (i) os << ",";
    os << "\"" << r.notes[i] << "\"";
  }
  os << "]}";
  return os.str();
}

std::string report_csv_header() {
  return "eps,pohozaev_defect_rel,nehari_defect_rel,scaling_ratio_error,mass_identity_error,"
         "energy_upper_gap,a_eps_0,a_eps_1,a_eps_2,v_at_a,scaled_energy,scaled_mass_in_ball,"
         "sup_outside,profile_l2_distance,a_in_lambda,unpenalized,hardy_kappa,"
         "comparison_violations,subsolution_violations";
}

std::string report_csv_row(double eps, const DiagnosticsReport& r) {
  std::ostringstream os;
  os << fmt17(eps) << "," << fmt17(r.pohozaev_defect_rel) << "," << fmt17(r.nehari_defect_rel)
     << "," << (r.scaling_ratio_error ? fmt17(*r.scaling_ratio_error) : "")
     << "," << (r.mass_identity_error ? fmt17(*r.mass_identity_error) : "")
     << "," << fmt17(r.energy_upper_gap) << "," << fmt17(r.concentration.a_eps[0]) << ","
     << fmt17(r.concentration.a_eps[1]) << "," << fmt17(r.concentration.a_eps[2]) << ","
     << fmt17(r.concentration.v_at_a) << "," << fmt17(r.concentration.scaled_energy) << ","
     << fmt17(r.concentration.scaled_mass_in_ball) << "," << fmt17(r.concentration.sup_outside)
     << "," << fmt17(r.concentration.profile_l2_distance) << ","
     << (r.concentration.a_in_lambda ? 1 : 0) << "," << (r.unpenalized ? 1 : 0) << ","
     << fmt17(r.hardy_kappa) << "," << r.comparison_violations << ","
     << r.subsolution_violations;
  return os.str();
}

}  // namespace choq
