#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "choquard/grid.hpp"

namespace choq {

enum class PotentialKind { constant, gaussian_well, power_decay, compact_support, custom_table };

/// Continuous potential V : R^N -> [0, inf).  The optional multiplicative
/// zero factor min(1, |x - zero_center| / zero_radius)^{zero_exponent}
/// carves a power-rate zero into any base kind (critical-well experiments).
struct PotentialSpec {
  PotentialKind kind = PotentialKind::constant;
  double floor = 1.0;           // constant value / well bottom
  double depth = 0.0;           // gaussian_well: V = floor + depth (1 - e^{-|x-c|²/w²})
  double width = 1.0;
  double scale = 1.0;           // power_decay: V = floor + scale/(1+|x-c|²)^{γ/2}
  double decay_gamma = 0.0;     //              compact_support: scale·max(0, 1-(|x-c|/R)²)²
  double support_radius = 1.0;
  Vec center{0, 0, 0};
  bool has_zero = false;
  Vec zero_center{0, 0, 0};
  double zero_exponent = 1.0;
  double zero_radius = 1.0;
  std::function<double(const Vec&)> table;  // custom_table (continuity is the caller's business)

  double eval(const Vec& x, int dim) const;
};

struct RegionSpec {
  enum class Shape { ball, box };
  Shape shape = Shape::ball;
  Vec center{0, 0, 0};
  Vec halfwidths{1, 1, 1};  // ball: halfwidths[0] is the radius

  bool contains(const Vec& x, int dim) const;
  double radius() const { return halfwidths[0]; }
  /// Distance from an interior point to the region boundary (ball only).
  double interior_distance(const Vec& x, int dim) const;
  void validate_inside(const GridSpec& g) const;  // margin >= 2 cells
};

/// One Choquard problem instance.
struct ProblemParams {
  GridSpec grid;
  double alpha = 1.0;
  double p = 2.0;
  double eps = 0.1;
  PotentialSpec potential;
  RegionSpec lambda_region;
  RegionSpec outer_region;
  bool strict_boundary = false;

  int dim() const { return grid.dim; }
  Field potential_field() const;  // V sampled on the grid
  Field lambda_mask() const;      // χ_Λ on the grid
  void validate() const;
};

struct HlsConstants {
  double c_alpha;  // 2^{-α} (Γ((N-α)/4)/Γ((N+α)/4))²
  double a_alpha;  // Riesz normalization
};
HlsConstants hls_constants(int dim, double alpha);

struct RegimeReport {
  bool limiting_solvable = false;
  std::string reason;
  double p_lower = 0;  // (N+α)/N
  double p_upper = 0;  // (N+α)/(N-2)_+, infinity encoded as HUGE_VAL
};
RegimeReport validate_params(int dim, double alpha, double p);

/// Pointwise penalized nonlinearity g_ε(x, s) and its antiderivative G_ε.
double penalized_g(double s, bool at_x_in_lambda, double h_at_x, double p);
double penalized_G(double s, bool at_x_in_lambda, double h_at_x, double p);
/// ∂_s g_ε (min-branch derivative 0 past the crossover).
double penalized_g_prime(double s, bool at_x_in_lambda, double h_at_x, double p);

/// Penalization potential H_ε with its construction metadata.
struct Penalization {
  Field h_field;     // H_ε >= 0, identically 0 on Λ
  Field w_profile;   // the supersolution shape w_μ (barriers reuse it)
  int case_id = 0;   // 1, 2 or 3; 0 = disabled (H ≡ +inf sentinel)
  double mu = 0;
  double lam = 0;    // decay rate λ in ū_ε = e^{-λ/ε} w_μ
  double delta = 0.1;
  double eps = 0;
  double measured_kappa = -1;  // set by hardy_quotient
  double nu = -1;              // set by measure_nu
  bool disabled = false;

  double sup_outside_lambda() const;
};

/// H_ε = χ_{R^N∖Λ} (e^{-λ/ε} w_μ)^{p-1} per the case constructions.
/// lam < 0 requests the default λ = 0.5·m·r (m, r as in build_barrier).
Penalization build_penalization(int case_id, const ProblemParams& params, double lam,
                                double delta);
Penalization disabled_penalization(const ProblemParams& params);

/// Worst measured Hardy quotient over randomized trial bumps (+ optional iterate);
/// stores the result into pen.measured_kappa and returns it.
double hardy_quotient(Penalization& pen, const ProblemParams& params, int trial_count,
                      std::uint64_t seed, const Field* iterate = nullptr);

/// Measures the constant ν of the subsolution inequality from the computed
/// solution: sup over R^N∖Λ of I_α∗(χ_Λ u_+^p) / (ε^N I_α), padded 20%.
double measure_nu(Penalization& pen, const ProblemParams& params, const Field& u,
                  const RieszKernel& kernel);

/// Barrier Ū_ε = 2 w_μ(x) h_ε(x-a) / cosh(m r/ε), cosh-profile inside B(a, r).
Field build_barrier(const Penalization& pen, const ProblemParams& params, const Vec& a_eps,
                    double r, double m, double big_r);

double inf_lambda_potential(const ProblemParams& params);  // inf over Λ grid points

/// I_λ(v) = ½∫(|∇v|² + λv²) - (1/2p)∫(I_α∗v_+^p) v_+^p.
double limiting_energy_value(const Field& v, double lambda, const ProblemParams& params,
                             const RieszKernel& kernel);
/// Strong-form residual of (R_λ): -Δv + λv - (I_α∗v_+^p) v_+^{p-1}.
Field limiting_residual(const Field& v, double lambda, const ProblemParams& params,
                        const RieszKernel& kernel);

/// J_ε(u) = ½∫(ε²|∇u|² + Vu²) - (p/2ε^α)∫(I_α∗G_ε(u)) G_ε(u).
double penalized_energy(const Field& u, const Penalization& pen, const ProblemParams& params,
                        const RieszKernel& kernel);
/// E_ε(u) = ½∫(ε²|∇u|² + Vu²) - (1/2pε^α)∫(I_α∗|u|^p)|u|^p.
double original_energy(const Field& u, const ProblemParams& params, const RieszKernel& kernel);

/// Strong-form residual of (Q_ε); pen == nullptr gives the unpenalized (P_ε) residual.
Field euler_lagrange_residual(const Field& u, const Penalization* pen,
                              const ProblemParams& params, const RieszKernel& kernel);

/// Superposition helpers (fields of g_ε(u), G_ε(u), g'_ε(u)).
Field apply_g(const Field& u, const Penalization& pen, const ProblemParams& params);
Field apply_G(const Field& u, const Penalization& pen, const ProblemParams& params);
Field apply_g_prime(const Field& u, const Penalization& pen, const ProblemParams& params);

}  // namespace choq
