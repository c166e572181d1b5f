#pragma once

#include <string>
#include <vector>

#include "choquard/solver.hpp"

namespace choq {

/// Parsed run configuration: INI-style sections [grid], [problem], [potential],
/// [lambda_region], [outer_region], [penalization], [solver], [output], [probe].
/// Unknown sections or keys are errors; every key has a default.
struct RunConfig {
  // [grid]
  int dim = 1;
  int n = 256;
  double half_extent = 16.0;
  // [problem]
  double alpha = 0.5;
  double p = 2.0;
  double eps = 0.1;
  std::vector<double> eps_list;  // empty: use eps alone
  // [potential]
  PotentialSpec potential;
  // regions
  RegionSpec lambda_region;
  RegionSpec outer_region;
  // [penalization]
  int pen_case = 2;     // 0 disables the penalization
  double delta = 0.1;
  double lam = -1;      // < 0: auto (0.5 m r)
  // [solver]
  SolveOptions solver;
  // [output]
  std::string out_dir = "out";
  std::string label = "run";
  // [probe] (nonexistence/transform experiments)
  Vec probe_center{0, 0, 0};
  double probe_radius = 0.5;
  double probe_rho = 1.0;        // concentration-mass ball radius (units of eps)
  double probe_big_r = 10.0;     // exterior-sup ball radius (units of eps)
  double probe_bump_rho = 1.0;   // ground-state-transform bump radius

  static RunConfig parse_string(const std::string& text);
  static RunConfig parse_file(const std::string& path);
  /// "section.key=value" command-line override.
  void apply_override(const std::string& assignment);

  /// Full effective configuration, re-parseable (resolved-config echo).
  std::string resolved_text() const;

  std::vector<double> effective_eps_list() const;
  ProblemParams problem_params() const;  // uses `eps` (callers set per-rung values)
};

}  // namespace choq
