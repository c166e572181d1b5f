#pragma once

#include <optional>
#include <string>
#include <vector>

#include "choquard/solver.hpp"

namespace choq {

struct ConcentrationMetrics {
  Vec a_eps{0, 0, 0};             // grid argmax of u_eps
  double v_at_a = 0;              // V(a_eps)
  double scaled_energy = 0;       // J_eps(u_eps) / eps^N
  double scaled_mass_in_ball = 0; // eps^{-N} ∫_{B(a_eps, rho*eps)} u²
  double sup_outside = 0;         // max u on the grid minus B(a_eps, R*eps)
  double profile_l2_distance = 0; // rel. L² distance of u(a+eps·) to the limiting profile
  bool a_in_lambda = true;
};

struct DiagnosticsReport {
  double pohozaev_defect_rel = 0;
  double nehari_defect_rel = 0;
  std::optional<double> scaling_ratio_error;
  std::optional<double> mass_identity_error;
  double energy_upper_gap = 0;
  ConcentrationMetrics concentration;
  bool unpenalized = false;
  double hardy_kappa = 0;
  int comparison_violations = 0;
  int subsolution_violations = 0;
  std::vector<std::string> notes;
};

struct PohozaevDefects {
  double pohozaev_rel;
  double nehari_rel;
};

/// Pohozaev and Nehari identity defects of a claimed (R_lambda) solution:
/// |(N-2)K/2 + NλM/2 - (N+α)D/(2p)| and |K + λM - D|, both over K + λM + D.
PohozaevDefects pohozaev_defect(const Field& v, double lambda, const ProblemParams& params,
                                const RieszKernel& kernel);

/// |∫v² - 2·energy/λ| / ∫v², valid only for p = 2, α = N-2 (else nullopt).
std::optional<double> mass_identity_check(const Field& v, double lambda, double energy,
                                          const ProblemParams& params);

/// |E_λ/E_1 - λ^θ| / λ^θ with θ = (α+2)/(2(p-1)) - (N-2)/2.
double scaling_law_check(const SolveResult& result_1, const SolveResult& result_lambda,
                         double lambda, const ProblemParams& params);
double scaling_exponent(int dim, double alpha, double p);

struct EnergyBoundVerdict {
  std::vector<double> gaps;  // c_eps/eps^N - inf_Λ C, one per rung
  bool eventually_within = false;
  bool decreasing = false;
};
/// Gap of c_eps/eps^N against the limiting level; within-verdict uses
/// rel_tol * |limiting_energy_at_min| at the smallest eps.
EnergyBoundVerdict energy_upper_bound_check(const std::vector<SweepEntry>& sweep,
                                            double limiting_energy_at_min, double rel_tol = 0.1);

ConcentrationMetrics concentration_metrics(const SolveResult& u, const ProblemParams& params,
                                           double rho, double big_r,
                                           const Field& limiting_profile);

struct UnpenalizationVerdict {
  bool ok = false;
  double max_violation = 0;       // max of u^{p-1} - H over the exterior of Λ
  double unpenalized_residual_rel = 0;
};
/// u^{p-1} ≤ H_eps on R^N∖Λ (1e-12 absolute slack); when it holds the
/// computed field solves the unpenalized equation, whose residual is reported.
UnpenalizationVerdict unpenalization_check(const SolveResult& u, const Penalization& pen,
                                           const ProblemParams& params, const RieszKernel& kernel);

/// Count of points outside B(a_eps, R*eps) and away from ∂Λ (2-cell collar)
/// violating -ε²Δu + (1-δ)Vu ≤ (p ε^{-α} I_α∗(H u) + ν ε^{N-α} I_α(·-a)) H.
int subsolution_check(const SolveResult& u, const Penalization& pen, const ProblemParams& params,
                      const Vec& a_eps, double big_r, double delta, const RieszKernel& kernel);

/// Count of points outside B(a_eps, R*eps) with u > barrier + slack.
int comparison_check(const SolveResult& u, const Field& barrier, const Vec& a_eps, double big_r,
                     const ProblemParams& params);

/// LHS - RHS of ∫(ε²|∇φ|² + Vφ²) ≥ ε^{-α}∫(I_α∗u²)φ² for a C_c^∞ bump φ
/// of radius rho at test_center (p = 2 only, else nullopt).
std::optional<double> groundstate_transform_check(const SolveResult& u,
                                                  const ProblemParams& params,
                                                  const Vec& test_center, double rho,
                                                  const RieszKernel& kernel);

struct CriticalMassVerdict {
  bool applicable = false;
  double scaled_mass = 0;
  double bound = 0;
  bool satisfied = false;
  std::string note;
};
/// eps^{-N}∫u² against Γ((N-2)/2) π^{N/2} 2^{N-2} ((N-2)/2)²; needs p = 2,
/// α = N-2, N ≥ 3 and a decaying annulus average of V.
CriticalMassVerdict critical_mass_bound(const SolveResult& u, const ProblemParams& params);
/// Γ((N-2)/2) π^{N/2} 2^{N-2} ((N-2)/2)², the closed-form mass ceiling.
double critical_mass_bound_value(int dim);

/// Deterministic flat-JSON serialization of a report.
std::string report_to_json(const DiagnosticsReport& r);
/// One CSV row per (eps, report); header in csv_header().
std::string report_csv_header();
std::string report_csv_row(double eps, const DiagnosticsReport& r);

}  // namespace choq
