#include <cstdio>
#include <cstdlib>
#include "choquard/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace choq {

namespace {

Field positive_part_pow(const Field& v, double p) {
  Field out(v.grid);
  for (std::int64_t i = 0; i < v.size(); ++i) {
    const double s = std::max(v[i], 0.0);
    out[i] = s == 0 ? 0.0 : std::pow(s, p);
  }
  return out;
}

double median_potential_over_lambda(const ProblemParams& params) {
  Field V = params.potential_field();
  std::vector<double> vals;
  for (std::int64_t i = 0; i < V.size(); ++i)
    if (params.lambda_region.contains(params.grid.point(i), params.dim())) vals.push_back(V[i]);
  if (vals.empty()) throw std::invalid_argument("lambda_region contains no grid point");
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
  return vals[vals.size() / 2];
}

std::int64_t argmin_potential_in_lambda(const ProblemParams& params) {
  Field V = params.potential_field();
  std::int64_t best = -1;
  double bv = HUGE_VAL;
  for (std::int64_t i = 0; i < V.size(); ++i)
    if (params.lambda_region.contains(params.grid.point(i), params.dim()) && V[i] < bv) {
      bv = V[i];
      best = i;
    }
  if (best < 0) throw std::invalid_argument("lambda_region contains no grid point");
  return best;
}

void clamp_positive(SolveResult& res) {
  res.min_before_clamp = min_value(res.field);
  for (double& x : res.field.v) x = std::max(x, 0.0);
}

}  // namespace

double eps_norm(const Field& u, const ProblemParams& params) {
  Field V = params.potential_field();
  Field Vu2(u.grid);
  for (std::int64_t i = 0; i < u.size(); ++i) Vu2[i] = V[i] * u[i] * u[i];
  return std::sqrt(params.eps * params.eps * grad_sq_integral(u) + integrate(Vu2));
}

std::pair<double, double> nehari_scale(const Field& v, double lambda, const ProblemParams& params,
                                       const RieszKernel& kernel) {
  const double p = params.p;
  Field vp = positive_part_pow(v, p);
  const double B = riesz_bilinear(vp, vp, kernel);
  if (!(B > 0)) throw std::invalid_argument("nehari_scale: positive part carries no mass");
  const double A = grad_sq_integral(v) + lambda * inner(v, v);
  const double t_star = std::pow(A / B, 1.0 / (2 * p - 2));
  const double energy =
      (p - 1) / (2 * p) * std::pow(A, p / (p - 1)) * std::pow(B, -1.0 / (p - 1));
  return {t_star, energy};
}

SolveResult solve_limiting(double lambda, const ProblemParams& params, const SolveOptions& opts) {
  if (!(lambda > 0)) throw std::invalid_argument("solve_limiting: lambda must be positive");
  RegimeReport regime = validate_params(params.dim(), params.alpha, params.p);
  if (!regime.limiting_solvable)
    throw std::invalid_argument("solve_limiting: outside existence regime: " + regime.reason);
  const double p = params.p;
  const GridSpec& g = params.grid;
  RieszKernel kernel = make_riesz_kernel(g, params.alpha);

  // scale-invariant Nehari-reduced energy and its L2 gradient
  struct Eval {
    double A, B, Q;
    Field vp;  // v_+^p
  };
  auto evaluate = [&](const Field& v) -> Eval {
    Eval e;
    e.vp = positive_part_pow(v, p);
    e.B = riesz_bilinear(e.vp, e.vp, kernel);
    e.A = grad_sq_integral(v) + lambda * inner(v, v);
    e.Q = e.B > 0 ? (p - 1) / (2 * p) * std::pow(e.A, p / (p - 1)) * std::pow(e.B, -1.0 / (p - 1))
                  : HUGE_VAL;
    return e;
  };

  Field v = sample(g, [&](const Vec& x) {
    double r2 = 0;
    for (int d = 0; d < g.dim; ++d) r2 += x[d] * x[d];
    return std::exp(-0.5 * lambda * r2);
  });

  SolveResult res;
  res.lambda = lambda;
  Eval cur = evaluate(v);
  if (!(cur.B > 0)) throw std::invalid_argument("solve_limiting: degenerate initial field");
  double step = opts.step_init;

  for (int it = 0; it < opts.max_iters; ++it) {
    // residual of (R_lambda) at the fiber-rescaled field
    const double t_star = std::pow(cur.A / cur.B, 1.0 / (2 * p - 2));
    Field w(g);
    for (std::int64_t i = 0; i < v.size(); ++i) w[i] = t_star * v[i];
    Field R = limiting_residual(w, lambda, params, kernel);
    Field lw = laplacian(w);
    Field denom(g);
    for (std::int64_t i = 0; i < w.size(); ++i) denom[i] = -lw[i] + lambda * w[i];
    res.residual_rel = l2_norm(R) / l2_norm(denom);
    res.trace.push_back({cur.Q, res.residual_rel});
    res.iterations = it;
    if (res.residual_rel <= opts.residual_tol) {
      res.converged = true;
      res.field = w;
      break;
    }

    // grad Q = a1 (-Δ+λ)v - a2 (I∗v_+^p) v_+^{p-1}
    const double a1 = std::pow(cur.A, 1.0 / (p - 1)) * std::pow(cur.B, -1.0 / (p - 1));
    const double a2 = std::pow(cur.A, p / (p - 1)) * std::pow(cur.B, -p / (p - 1));
    Field conv = riesz_convolve(cur.vp, kernel);
    Field lv = laplacian(v);
    Field grad(g);
    for (std::int64_t i = 0; i < v.size(); ++i) {
      const double s = std::max(v[i], 0.0);
      const double vpm1 = s == 0 ? 0.0 : std::pow(s, p - 1);
      grad[i] = a1 * (-lv[i] + lambda * v[i]) - a2 * conv[i] * vpm1;
    }
    Field dir = inv_helmholtz(grad, 1.0, lambda);
    for (double& x : dir.v) x = -x;
    const double slope = inner(grad, dir);
    if (!(slope < 0)) break;  // numerically flat

    bool accepted = false;
    for (; step > 1e-14; step *= 0.5) {
      Field trial(g);
      for (std::int64_t i = 0; i < v.size(); ++i) trial[i] = v[i] + step * dir[i];
      Eval te = evaluate(trial);
      if (te.Q <= cur.Q + opts.armijo_c * step * slope) {
        v = trial;
        cur = te;
        accepted = true;
        step = std::min(step * 2.0, 64.0);
        break;
      }
    }
    if (!accepted) break;  // line search exhausted

    // Q is scale-invariant; renormalize to keep amplitudes tame
    const double nrm = l2_norm(v);
    if (nrm > 0 && (nrm > 1e6 || nrm < 1e-6)) {
      for (double& x : v.v) x /= nrm;
      cur = evaluate(v);
    }
  }

  if (!res.converged) {
    const double t_star = std::pow(cur.A / cur.B, 1.0 / (2 * p - 2));
    res.field = Field(g);
    for (std::int64_t i = 0; i < v.size(); ++i) res.field[i] = t_star * v[i];
  }
  clamp_positive(res);
  res.energy = cur.Q;
  res.critical_value = cur.Q;
  return res;
}

Field rescale_limiting(const SolveResult& v1, double lambda, const ProblemParams& params) {
  if (!v1.converged) throw std::invalid_argument("rescale_limiting: input solve not converged");
  if (!(lambda > 0)) throw std::invalid_argument("rescale_limiting: lambda must be positive");
  const GridSpec& g = v1.field.grid;
  const double stretch = std::sqrt(lambda);
  if (stretch > 1) {
    const int bw = spectral_bandwidth(v1.field, 1e-6);
    if (bw * stretch >= g.n / 2)
      throw std::invalid_argument("rescale_limiting: grid cannot resolve the compressed profile");
  }
  const double amp = std::pow(lambda, (params.alpha + 2) / (4 * (params.p - 1)));
  Field out = scale_resample(v1.field, Vec{0, 0, 0}, stretch);
  for (double& x : out.v) x *= amp;
  return out;
}

namespace {

// place v (centered at 0) at point a, compressed by eps: u(y) = v((y-a)/eps)
Field place_profile(const Field& v, const Vec& a, double eps) {
  const double s = 1.0 / eps;
  if (s > 1) {
    const int bw = spectral_bandwidth(v, 1e-6);
    if (bw * s >= v.grid.n / 2)
      throw std::invalid_argument("auto-init: grid cannot resolve the eps-compressed profile");
  }
  Vec c{0, 0, 0};
  if (std::abs(1 - s) > 1e-9)
    for (int d = 0; d < v.grid.dim; ++d) c[d] = -a[d] * s / (1 - s);
  return scale_resample(v, c, s);
}

}  // namespace

SolveResult solve_penalized(const ProblemParams& params, const Penalization& pen,
                            const SolveOptions& opts, const Field* init) {
  params.validate();
  if (std::abs(pen.eps - params.eps) > 1e-15 * params.eps)
    throw std::invalid_argument("solve_penalized: penalization built for a different eps");
  const double p = params.p, eps = params.eps, alpha = params.alpha;
  const GridSpec& g = params.grid;

  if (!pen.disabled) {
    double kappa = pen.measured_kappa;
    if (kappa < 0) {
      Penalization tmp = pen;
      kappa = hardy_quotient(tmp, params, 16, opts.seed);
    }
    const double prod = hls_constants(g.dim, alpha).c_alpha * p * kappa;
    if (!(prod < 1))
      throw std::invalid_argument("solve_penalized: penalization quotient bound fails: C*p*kappa = " +
                                  std::to_string(prod));
  }

  RieszKernel kernel = make_riesz_kernel(g, alpha);
  Field V = params.potential_field();
  const double shift =
      opts.precondition_shift > 0 ? opts.precondition_shift : median_potential_over_lambda(params);
  const double e2 = eps * eps;
  const double escale = std::pow(eps, -alpha);

  Field u(g);
  if (init) {
    require_same_grid(*init, V, "solve_penalized init");
    u = *init;
  } else {
    const std::int64_t ai = argmin_potential_in_lambda(params);
    const Vec a = g.point(ai);
    const double lam0 = V[ai];
    if (!(lam0 > 0))
      throw std::invalid_argument("solve_penalized: V vanishes at its minimum over Lambda");
    SolveOptions lopts = opts;  // init only needs a few digits
    lopts.residual_tol = std::max(opts.residual_tol, 1e-8);
    SolveResult lim = solve_limiting(lam0, params, lopts);
    if (!lim.converged)
      throw std::runtime_error("solve_penalized: limiting solve for auto-init did not converge");
    u = place_profile(lim.field, a, eps);
    // analytic fiber rescale against the homogeneous part of J_eps
    Field up = positive_part_pow(u, p);
    const double D = riesz_bilinear(up, up, kernel);
    if (D > 0) {
      Field Vu2(g);
      for (std::int64_t i = 0; i < u.size(); ++i) Vu2[i] = V[i] * u[i] * u[i];
      const double A = e2 * grad_sq_integral(u) + integrate(Vu2);
      const double t = std::pow(std::pow(eps, alpha) * A / D, 1.0 / (2 * p - 2));
      for (double& x : u.v) x *= t;
    }
  }

  for (double& x : u.v) x = std::max(x, 0.0);  // resampling ringing can undershoot
  const double init_norm = eps_norm(u, params);
  if (!(init_norm > 0))
    throw std::runtime_error("solve_penalized: zero initial field (trivial critical point)");

  auto residual = [&](const Field& w) { return euler_lagrange_residual(w, &pen, params, kernel); };
  // fiber-critical amplitude of the penalized functional: the zero of
  // f(t) = d/dt J(t u) = <R(t u), u>, located by bisection in log t
  auto fiber_scale = [&](const Field& w) -> double {
    auto f = [&](double t) {
      Field tw(g);
      for (std::int64_t i = 0; i < w.size(); ++i) tw[i] = t * w[i];
      return inner(residual(tw), w);
    };
    double lo = 1.0, hi = 1.0;
    double flo = f(lo);
    if (flo < 0) {
      while (flo < 0 && lo > 1e-6) flo = f(lo /= 2);
      if (flo < 0) return 1.0;
      hi = 2 * lo;
    } else {
      double fhi = flo;
      while (fhi > 0 && hi < 1e6) fhi = f(hi *= 2);
      if (fhi > 0) return 1.0;
      lo = hi / 2;
    }
    for (int k = 0; k < 40; ++k) {
      const double mid = std::sqrt(lo * hi);
      if (f(mid) > 0)
        lo = mid;
      else
        hi = mid;
    }
    return std::sqrt(lo * hi);
  };
  auto precond = [&](const Field& r) { return inv_helmholtz(r, e2, shift); };
  // merit Φ(u) = ½⟨R(u), P R(u)⟩ — minimized, 0 exactly at critical points
  auto merit = [&](const Field& R, const Field& PR) { return 0.5 * inner(R, PR); };
  auto hessian_apply = [&](const Field& w, const Field& gw, const Field& gpw, const Field& convG,
                           const Field& x) {
    Field gx(g);
    for (std::int64_t i = 0; i < x.size(); ++i) gx[i] = gw[i] * x[i];
    Field conv_gx = riesz_convolve(gx, kernel);
    Field lap = laplacian(x);
    Field out(g);
    for (std::int64_t i = 0; i < x.size(); ++i)
      out[i] = -e2 * lap[i] + V[i] * x[i] -
               p * escale * (conv_gx[i] * gw[i] + convG[i] * gpw[i] * x[i]);
    return out;
  };

  SolveResult res;
  {
    const double t0 = fiber_scale(u);
    if (std::isfinite(t0) && t0 > 0)
      for (double& x : u.v) x *= t0;
  }
  Field R = residual(u);
  Field PR = precond(R);
  double phi = merit(R, PR);
  double step = opts.step_init;

  auto rel_residual = [&](const Field& w, const Field& Rw) {
    Field lw = laplacian(w);
    Field denom(g);
    for (std::int64_t i = 0; i < w.size(); ++i) denom[i] = -e2 * lw[i] + V[i] * w[i];
    return l2_norm(Rw) / l2_norm(denom);
  };

  for (int it = 0; it < opts.max_iters; ++it) {
    res.residual_rel = rel_residual(u, R);
    res.iterations = it;
    res.trace.push_back({penalized_energy(u, pen, params, kernel), res.residual_rel});
    if (res.residual_rel <= opts.residual_tol) {
      res.converged = true;
      break;
    }
    if (eps_norm(u, params) < 1e-8 * init_norm)
      throw std::runtime_error(
          "solve_penalized: collapse to zero (mountain-pass structure lost; enlarge the initial "
          "field)");

    // anti-collapse guard: far from the critical point, pull the iterate back
    // to its fiber-critical amplitude (t* = 1 at the solution, so the guard is
    // dormant once Newton enters its basin)
    {
      const double t = fiber_scale(u);
      if (t > 1.25 || t < 0.8) {
        if (std::getenv("CHOQ_SOLVER_TRACE"))
          std::fprintf(stderr, "   fiber guard t=%.3e norm=%.3e\n", t, eps_norm(u, params));
        for (double& x : u.v) x *= t;
        R = residual(u);
        PR = precond(R);
        phi = merit(R, PR);
        res.residual_rel = rel_residual(u, R);
      }
    }

    Field gw = apply_g(u, pen, params);
    Field gpw = apply_g_prime(u, pen, params);
    Field convG = riesz_convolve(apply_G(u, pen, params), kernel);
    auto hess = [&](const Field& x) { return hessian_apply(u, gw, gpw, convG, x); };
    Field grad = hess(PR);

    // Newton-Krylov step: preconditioned CG on Hess d = -R, stopped at
    // negative curvature (the mountain-pass Hessian is indefinite at large
    // scales but positive near the critical point).
    Field dir(g);
    {
      Field rk(g);
      for (std::int64_t i = 0; i < g.size(); ++i) rk[i] = -R[i];
      Field zk = precond(rk);
      Field pk = zk;
      double rz = inner(rk, zk);
      const double rhs_norm = l2_norm(rk);
      for (int cg = 0; cg < 50 && rz > 0; ++cg) {
        Field Ap = hess(pk);
        const double pAp = inner(pk, Ap);
        if (!(pAp > 0)) break;  // negative curvature: keep the partial step
        const double ak = rz / pAp;
        for (std::int64_t i = 0; i < g.size(); ++i) {
          dir[i] += ak * pk[i];
          rk[i] -= ak * Ap[i];
        }
        if (l2_norm(rk) <= 0.1 * rhs_norm) break;
        zk = precond(rk);
        const double rz_new = inner(rk, zk);
        const double bk = rz_new / rz;
        rz = rz_new;
        for (std::int64_t i = 0; i < g.size(); ++i) pk[i] = zk[i] + bk * pk[i];
      }
    }
    double slope = inner(grad, dir);
    bool newton = slope < 0;
    if (!newton) {
      // Gauss-Newton: (Hess P Hess) d = -grad is positive definite even where
      // the mountain-pass Hessian is indefinite, and d is always a descent
      // direction for the merit.
      auto normal_op = [&](const Field& x) { return hess(precond(hess(x))); };
      dir = Field(g);
      Field rk(g);
      for (std::int64_t i = 0; i < g.size(); ++i) rk[i] = -grad[i];
      Field zk = precond(rk);
      Field pk = zk;
      double rz = inner(rk, zk);
      const double rhs_norm = l2_norm(rk);
      for (int cg = 0; cg < 25 && rz > 0; ++cg) {
        Field Ap = normal_op(pk);
        const double pAp = inner(pk, Ap);
        if (!(pAp > 0)) break;
        const double ak = rz / pAp;
        for (std::int64_t i = 0; i < g.size(); ++i) {
          dir[i] += ak * pk[i];
          rk[i] -= ak * Ap[i];
        }
        if (l2_norm(rk) <= 0.1 * rhs_norm) break;
        zk = precond(rk);
        const double rz_new = inner(rk, zk);
        const double bk = rz_new / rz;
        rz = rz_new;
        for (std::int64_t i = 0; i < g.size(); ++i) pk[i] = zk[i] + bk * pk[i];
      }
      slope = inner(grad, dir);
      newton = slope < 0;  // full steps suit least-squares directions too
      if (!newton) {
        dir = precond(grad);
        for (double& x : dir.v) x = -x;
        slope = inner(grad, dir);
        if (!(slope < 0)) break;
      }
    }

    static const bool dbg = std::getenv("CHOQ_SOLVER_TRACE") != nullptr;
    if (dbg)
      std::fprintf(stderr, "it=%d res=%.3e phi=%.3e newton=%d slope=%.3e\n", it, res.residual_rel,
                   phi, int(newton), slope);
    bool accepted = false;
    double ls = newton ? 1.0 : step;
    for (; ls > 1e-14; ls *= 0.5) {
      // positivity projection: the target critical point is nonnegative by the
      // maximum principle, and sign crossings break the merit's derivative
      // (g has a kink at zero when p = 2)
      Field trial(g);
      for (std::int64_t i = 0; i < u.size(); ++i) trial[i] = std::max(u[i] + ls * dir[i], 0.0);
      Field Rt = residual(trial);
      Field PRt = precond(Rt);
      const double phit = merit(Rt, PRt);
      if (phit <= phi + opts.armijo_c * ls * slope) {
        u = trial;
        R = Rt;
        PR = PRt;
        phi = phit;
        accepted = true;
        if (!newton) step = std::min(ls * 2.0, 64.0);
        break;
      }
    }
    if (dbg && accepted) std::fprintf(stderr, "   accepted ls=%.3e\n", ls);
    if (!accepted) {
      if (dbg) std::fprintf(stderr, "   line search failed\n");
      break;
    }
  }

  res.field = u;
  clamp_positive(res);
  Field Rc = residual(res.field);
  res.residual_rel = rel_residual(res.field, Rc);
  if (res.converged && res.residual_rel > opts.residual_tol)
    res.converged = res.residual_rel <= 2 * opts.residual_tol;  // clamp perturbation allowance
  res.energy = penalized_energy(res.field, pen, params, kernel);
  res.critical_value = res.energy;
  return res;
}

std::vector<SweepEntry> continuation_sweep(
    const std::vector<double>& eps_list, ProblemParams params,
    const std::function<Penalization(const ProblemParams&)>& pen_builder, const SolveOptions& opts,
    const std::function<void(SweepEntry&, const ProblemParams&)>& per_eps) {
  if (eps_list.empty()) throw std::invalid_argument("continuation_sweep: empty eps list");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      throw std::invalid_argument("continuation_sweep: eps list must be strictly decreasing");

  std::vector<SweepEntry> out;
  Field warm;
  double eps_prev = 0;
  for (double eps : eps_list) {
    params.eps = eps;
    Penalization pen = pen_builder(params);
    SolveResult r;
    if (out.empty()) {
      r = solve_penalized(params, pen, opts, nullptr);
    } else {
      const Vec a = params.grid.point(argmax_index(warm));
      const double stretch = eps_prev / eps;
      const int bw = spectral_bandwidth(warm, 1e-6);
      if (bw * stretch >= params.grid.n / 2) {
        // warm start would alias when compressed; restart this rung cold
        r = solve_penalized(params, pen, opts, nullptr);
      } else {
        Field init = scale_resample(warm, a, stretch);
        r = solve_penalized(params, pen, opts, &init);
      }
    }
    const bool ok = r.converged;
    out.push_back({eps, std::move(pen), std::move(r)});
    if (ok) {
      warm = out.back().result.field;
      eps_prev = eps;
      if (per_eps) per_eps(out.back(), params);
    } else {
      break;  // partial ladder; the failing eps is the last entry
    }
  }
  return out;
}

}  // namespace choq
