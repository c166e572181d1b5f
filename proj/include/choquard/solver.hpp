#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "choquard/model.hpp"

namespace choq {

struct SolveOptions {
  int max_iters = 5000;
  double residual_tol = 1e-8;
  double step_init = 1.0;
  double armijo_c = 1e-4;
  double precondition_shift = -1;  // < 0: auto (median of V over Λ / the given λ)
  bool strict_boundary = false;
  std::uint64_t seed = 42;
};

struct TraceEntry {
  double energy;
  double residual;
};

struct SolveResult {
  Field field;  // nonnegative after the positive-part post-process
  double energy = 0;
  double residual_rel = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<TraceEntry> trace;
  double critical_value = 0;      // J_ε(u_ε) for penalized solves, E(λ) estimate otherwise
  double min_before_clamp = 0;    // most negative value before clamping
  double lambda = 0;              // the λ of a limiting solve
};

/// Fiber maximum of t ↦ I_λ(t v): t* = (A/B)^{1/(2p-2)} and the value
/// (p-1)/(2p) A^{p/(p-1)} B^{-1/(p-1)}, A = ∫(|∇v|²+λv²), B = ∫(I_α∗v_+^p)v_+^p.
std::pair<double, double> nehari_scale(const Field& v, double lambda, const ProblemParams& params,
                                       const RieszKernel& kernel);

/// Ground state of -Δv + λv = (I_α∗v_+^p) v_+^{p-1} by Nehari-reduced
/// preconditioned descent from a centered Gaussian bump.
SolveResult solve_limiting(double lambda, const ProblemParams& params, const SolveOptions& opts);

/// v_λ(y) = λ^{(α+2)/(4(p-1))} v(√λ y), band-limited resampling from a λ=1 solve.
Field rescale_limiting(const SolveResult& v1, double lambda, const ProblemParams& params);

/// Critical point of J_ε by damped preconditioned flow on the squared
/// preconditioned residual; init == nullptr places the rescaled limiting
/// ground state at the grid argmin of V over Λ.
SolveResult solve_penalized(const ProblemParams& params, const Penalization& pen,
                            const SolveOptions& opts, const Field* init = nullptr);

struct SweepEntry {
  double eps;
  Penalization pen;
  SolveResult result;
};

/// Warm-started ε ladder: auto-init at the largest ε, each later ε starts
/// from the previous solution compressed about its peak.  Aborts on the
/// first non-convergence, returning the partial ladder.  `per_eps` (may be
/// empty) runs after each converged rung — diagnostics hook.
std::vector<SweepEntry> continuation_sweep(
    const std::vector<double>& eps_list, ProblemParams params,
    const std::function<Penalization(const ProblemParams&)>& pen_builder, const SolveOptions& opts,
    const std::function<void(SweepEntry&, const ProblemParams&)>& per_eps = nullptr);

/// ‖u‖_ε = (∫ ε²|∇u|² + V u²)^{1/2}.
double eps_norm(const Field& u, const ProblemParams& params);

}  // namespace choq
