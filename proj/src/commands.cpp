#include "choquard/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "choquard/snapshot.hpp"

namespace choq {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string run_dir(const RunConfig& cfg) { return cfg.out_dir + "/" + cfg.label; }

void emit_resolved_config(const RunConfig& cfg) {
  write_text(run_dir(cfg) + "/resolved-config.ini", cfg.resolved_text());
}

// values along the first axis through the center row (radial profile data)
std::string axis_profile_csv(const std::vector<const Field*>& fields,
                             const std::vector<std::string>& names) {
  const GridSpec& g = fields.front()->grid;
  std::string s = "x";
  for (const std::string& n : names) s += "," + n;
  s += "\n";
  std::int64_t stride = 1;
  for (int d = 1; d < g.dim; ++d) stride *= g.n;
  const std::int64_t row0 = (g.size() / g.n / 2) * (g.dim > 1 ? 1 : 0);
  for (int i = 0; i < g.n; ++i) {
    // for N>1 walk axis 0 with the other indices at n/2
    std::int64_t flat = i;
    for (int d = 1; d < g.dim; ++d) flat = flat * g.n + g.n / 2;
    (void)row0;
    s += fmt(g.coord(i));
    for (const Field* f : fields) s += "," + fmt((*f)[flat]);
    s += "\n";
  }
  return s;
}

struct LimitCache {
  double lambda = -1;
  SolveResult result;
};

const SolveResult& limiting_at(double lambda, const ProblemParams& params,
                               const SolveOptions& opts, LimitCache& cache) {
  if (cache.lambda >= 0 && std::abs(cache.lambda - lambda) <= 1e-12 * lambda)
    return cache.result;
  cache.result = solve_limiting(lambda, params, opts);
  cache.lambda = lambda;
  if (!cache.result.converged)
    throw std::runtime_error("limiting solve at lambda = " + fmt(lambda) + " did not converge");
  return cache.result;
}

double inf_lambda_v(const ProblemParams& params) { return inf_lambda_potential(params); }

}  // namespace

void cmd_validate(const RunConfig& cfg, std::ostream& out) {
  ProblemParams params = cfg.problem_params();
  params.validate();
  emit_resolved_config(cfg);
  RegimeReport regime = validate_params(cfg.dim, cfg.alpha, cfg.p);
  HlsConstants hls = hls_constants(cfg.dim, cfg.alpha);
  out << "regime: " << (regime.limiting_solvable ? "solvable" : "not solvable") << " ("
      << regime.reason << ")\n";
  out << "p interval: (" << fmt(regime.p_lower) << ", "
      << (std::isfinite(regime.p_upper) ? fmt(regime.p_upper) : "inf") << ")\n";
  out << "A_alpha = " << fmt(hls.a_alpha) << "\nC_alpha = " << fmt(hls.c_alpha) << "\n";
  out << "scaling exponent theta = " << fmt(scaling_exponent(cfg.dim, cfg.alpha, cfg.p)) << "\n";
  if (cfg.dim >= 3 && std::abs(cfg.p - 2) < 1e-12 &&
      std::abs(cfg.alpha - (cfg.dim - 2)) < 1e-12) {
    const double half = (cfg.dim - 2) / 2.0;
    out << "critical mass bound = "
        << fmt(std::tgamma(half) * std::pow(M_PI, cfg.dim / 2.0) * std::pow(2.0, cfg.dim - 2) *
               half * half)
        << "\n";
  }
  for (int c : {1, 2, 3}) {
    ProblemParams q = params;
    q.eps = cfg.effective_eps_list().front();
    try {
      Penalization pen = build_penalization(c, q, cfg.lam, cfg.delta);
      out << "penalization case " << c << ": applicable (mu = " << fmt(pen.mu) << ")\n";
    } catch (const std::exception& e) {
      out << "penalization case " << c << ": not applicable — " << e.what() << "\n";
    }
  }
}

void cmd_solve_limit(const RunConfig& cfg, const std::vector<double>& lambdas, std::ostream& out) {
  ProblemParams params = cfg.problem_params();
  params.validate();
  emit_resolved_config(cfg);
  const std::string dir = run_dir(cfg);
  RieszKernel kernel = make_riesz_kernel(params.grid, params.alpha);
  std::vector<double> ls = lambdas.empty() ? std::vector<double>{1.0} : lambdas;
  std::vector<SolveResult> results;
  for (double lambda : ls) {
    SolveResult r = solve_limiting(lambda, params, cfg.solver);
    if (!r.converged)
      throw std::runtime_error("solve_limiting did not converge at lambda = " + fmt(lambda));
    PohozaevDefects d = pohozaev_defect(r.field, lambda, params, kernel);
    DiagnosticsReport rep;
    rep.pohozaev_defect_rel = d.pohozaev_rel;
    rep.nehari_defect_rel = d.nehari_rel;
    rep.mass_identity_error = mass_identity_check(r.field, lambda, r.energy, params);
    const std::string tag = "limit_lambda_" + fmt(lambda);
    write_field_snapshot(dir, tag, r.field,
                         {{"lambda", lambda}, {"energy", r.energy},
                          {"residual_rel", r.residual_rel}});
    write_text(dir + "/" + tag + "_report.json", report_to_json(rep) + "\n");
    write_text(dir + "/" + tag + "_profile.csv",
               axis_profile_csv({&r.field}, {"v"}));
    out << "lambda = " << fmt(lambda) << ": energy = " << fmt(r.energy)
        << ", residual = " << fmt(r.residual_rel) << ", pohozaev = " << fmt(d.pohozaev_rel)
        << ", nehari = " << fmt(d.nehari_rel);
    if (rep.mass_identity_error) out << ", mass_identity = " << fmt(*rep.mass_identity_error);
    out << "\n";
    results.push_back(std::move(r));
  }
  if (results.size() >= 2) {
    const double err =
        scaling_law_check(results.front(), results.back(), ls.back() / ls.front(), params);
    out << "scaling law E(" << fmt(ls.back()) << ")/E(" << fmt(ls.front())
        << "): relative error = " << fmt(err) << "\n";
    write_text(dir + "/scaling_law.txt", fmt(err) + "\n");
  }
}

void cmd_concentrate(const RunConfig& cfg, std::ostream& out) {
  ProblemParams params = cfg.problem_params();
  params.validate();
  emit_resolved_config(cfg);
  const std::string dir = run_dir(cfg);
  const std::vector<double> eps_list = cfg.effective_eps_list();

  auto builder = [&](const ProblemParams& q) {
    if (cfg.pen_case == 0) return disabled_penalization(q);
    Penalization pen = build_penalization(cfg.pen_case, q, cfg.lam, cfg.delta);
    hardy_quotient(pen, q, 32, cfg.solver.seed);
    return pen;
  };

  std::vector<SweepEntry> sweep =
      continuation_sweep(eps_list, params, builder, cfg.solver);

  const double lam_star = inf_lambda_v(params);
  LimitCache cache;
  const SolveResult& lim_star = limiting_at(lam_star, params, cfg.solver, cache);
  const double limit_energy = lim_star.energy;

  std::string table =
      "eps,energy,scaled_energy,a0,a1,a2,v_at_a,scaled_mass,sup_outside,unpenalized,"
      "hardy_kappa,residual,iterations\n";
  std::string reports = report_csv_header() + "\n";
  RieszKernel kernel = make_riesz_kernel(params.grid, params.alpha);
  LimitCache rung_cache;
  for (SweepEntry& e : sweep) {
    if (!e.result.converged) {
      out << "eps = " << fmt(e.eps) << ": DID NOT CONVERGE (residual "
          << fmt(e.result.residual_rel) << "); ladder aborted here\n";
      break;
    }
    ProblemParams q = params;
    q.eps = e.eps;
    const std::int64_t ai = argmax_index(e.result.field);
    const Vec a = q.grid.point(ai);
    const double lam_a = q.potential.eval(a, q.dim());
    const SolveResult& lim_a = limiting_at(lam_a, q, cfg.solver, rung_cache);
    ConcentrationMetrics m =
        concentration_metrics(e.result, q, cfg.probe_rho, cfg.probe_big_r, lim_a.field);
    UnpenalizationVerdict up = unpenalization_check(e.result, e.pen, q, kernel);

    DiagnosticsReport rep;
    PohozaevDefects d = pohozaev_defect(lim_a.field, lam_a, q, kernel);
    rep.pohozaev_defect_rel = d.pohozaev_rel;
    rep.nehari_defect_rel = d.nehari_rel;
    rep.energy_upper_gap = m.scaled_energy - limit_energy;
    rep.concentration = m;
    rep.unpenalized = up.ok;
    rep.hardy_kappa = e.pen.measured_kappa;
    if (!e.pen.disabled) {
      measure_nu(e.pen, q, e.result.field, kernel);
      const double infv = inf_lambda_potential(q);
      const double mbar = 0.9 * std::sqrt((1 - e.pen.delta) * infv);
      const double rbar = 0.4 * q.lambda_region.interior_distance(a, q.dim());
      rep.subsolution_violations =
          subsolution_check(e.result, e.pen, q, a, cfg.probe_big_r, e.pen.delta, kernel);
      Field barrier = build_barrier(e.pen, q, a, rbar, mbar, cfg.probe_big_r);
      rep.comparison_violations = comparison_check(e.result, barrier, a, cfg.probe_big_r, q);
    }
    reports += report_csv_row(e.eps, rep) + "\n";
    table += fmt(e.eps) + "," + fmt(e.result.energy) + "," + fmt(m.scaled_energy) + "," +
             fmt(a[0]) + "," + fmt(a[1]) + "," + fmt(a[2]) + "," + fmt(m.v_at_a) + "," +
             fmt(m.scaled_mass_in_ball) + "," + fmt(m.sup_outside) + "," +
             (up.ok ? "1" : "0") + "," + fmt(e.pen.measured_kappa) + "," +
             fmt(e.result.residual_rel) + "," + std::to_string(e.result.iterations) + "\n";
    out << "eps = " << fmt(e.eps) << ": c_eps/eps^N = " << fmt(m.scaled_energy)
        << ", a_eps = " << fmt(a[0]) << ", V(a_eps) = " << fmt(m.v_at_a)
        << ", unpenalized = " << (up.ok ? "yes" : "no") << ", sup H = "
        << fmt(e.pen.sup_outside_lambda()) << "\n";

    if (&e == &sweep.front() || &e == &sweep.back()) {
      const std::string tag = "u_eps_" + fmt(e.eps);
      write_field_snapshot(dir, tag, e.result.field,
                           {{"eps", e.eps}, {"energy", e.result.energy},
                            {"residual_rel", e.result.residual_rel}});
    }
    if (&e == &sweep.back() && e.result.converged) {
      // overlay: rescaled computed profile vs limiting ground state
      Vec c{0, 0, 0};
      if (std::abs(1 - e.eps) > 1e-9)
        for (int dmn = 0; dmn < q.dim(); ++dmn) c[dmn] = a[dmn] / (1 - e.eps);
      Field v_eps = scale_resample(e.result.field, c, e.eps);
      write_text(dir + "/profile_overlay.csv",
                 axis_profile_csv({&v_eps, &lim_a.field}, {"v_eps", "v_limit"}));
    }
  }
  write_text(dir + "/sweep.csv", table);
  write_text(dir + "/diagnostics.csv", reports);
  out << "limiting energy at inf_Lambda V = " << fmt(limit_energy) << "\n";
  if (!sweep.back().result.converged)
    throw std::runtime_error("sweep aborted at eps = " + fmt(sweep.back().eps));
}

void cmd_nonexist(const RunConfig& cfg, std::ostream& out) {
  ProblemParams params = cfg.problem_params();
  params.validate();
  emit_resolved_config(cfg);
  const std::string dir = run_dir(cfg);
  const std::vector<double> eps_list = cfg.effective_eps_list();

  auto builder = [&](const ProblemParams& q) {
    if (cfg.pen_case == 0) return disabled_penalization(q);
    Penalization pen = build_penalization(cfg.pen_case, q, cfg.lam, cfg.delta);
    hardy_quotient(pen, q, 32, cfg.solver.seed);
    return pen;
  };
  std::vector<SweepEntry> sweep = continuation_sweep(eps_list, params, builder, cfg.solver);

  RieszKernel kernel = make_riesz_kernel(params.grid, params.alpha);
  std::string table = "eps,scaled_mass_K,transform_margin_min,residual\n";
  std::vector<double> masses;
  for (const SweepEntry& e : sweep) {
    if (!e.result.converged) {
      out << "eps = " << fmt(e.eps) << ": DID NOT CONVERGE (residual "
          << fmt(e.result.residual_rel) << ", iters " << e.result.iterations
          << "); ladder aborted here\n";
      break;
    }
    ProblemParams q = params;
    q.eps = e.eps;
    std::vector<double> in_k(e.result.field.size(), 0.0);
    for (std::int64_t i = 0; i < e.result.field.size(); ++i) {
      double s = 0;
      const Vec x = q.grid.point(i);
      for (int d2 = 0; d2 < q.dim(); ++d2)
        s += (x[d2] - cfg.probe_center[d2]) * (x[d2] - cfg.probe_center[d2]);
      if (std::sqrt(s) <= cfg.probe_radius) in_k[i] = e.result.field[i] * e.result.field[i];
    }
    const double mass_k =
        q.grid.cell_volume() * pairwise_sum(in_k) / std::pow(e.eps, q.dim());
    masses.push_back(mass_k);

    double margin_min = HUGE_VAL;
    bool any = false;
    for (int k = -2; k <= 2; ++k) {
      Vec c = cfg.probe_center;
      c[0] += k * cfg.probe_bump_rho;
      auto margin = groundstate_transform_check(e.result, q, c, cfg.probe_bump_rho, kernel);
      if (margin) {
        margin_min = std::min(margin_min, *margin);
        any = true;
      }
    }
    if (!any) out << "ground-state transform check n/a (p != 2)\n";
    table += fmt(e.eps) + "," + fmt(mass_k) + "," + (any ? fmt(margin_min) : "") + "," +
             fmt(e.result.residual_rel) + "\n";
    out << "eps = " << fmt(e.eps) << ": eps^-N mass over K = " << fmt(mass_k);
    if (any) out << ", min transform margin = " << fmt(margin_min);
    out << "\n";

    CriticalMassVerdict cm = critical_mass_bound(e.result, q);
    if (cm.applicable)
      out << "  critical mass: scaled mass " << fmt(cm.scaled_mass) << " vs bound "
          << fmt(cm.bound) << " (" << (cm.satisfied ? "satisfied" : "VIOLATED") << ")\n";
    else
      out << "  critical mass bound n/a (" << cm.note << ")\n";
  }
  for (std::size_t i = 1; i < masses.size(); ++i)
    out << "mass ratio eps " << fmt(sweep[i - 1].eps) << " -> " << fmt(sweep[i].eps) << ": "
        << fmt(masses[i - 1] / masses[i]) << "x decrease\n";
  write_text(dir + "/nonexist.csv", table);
  if (!sweep.back().result.converged)
    throw std::runtime_error("sweep aborted at eps = " + fmt(sweep.back().eps));
}

int run_command(const std::string& name, const RunConfig& cfg,
                const std::vector<double>& lambdas, std::ostream& out, std::ostream& err) {
  try {
    if (name == "validate")
      cmd_validate(cfg, out);
    else if (name == "solve-limit")
      cmd_solve_limit(cfg, lambdas, out);
    else if (name == "concentrate")
      cmd_concentrate(cfg, out);
    else if (name == "nonexist")
      cmd_nonexist(cfg, out);
    else {
      err << "unknown command: " << name << "\n";
      return 2;
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "refused: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace choq
