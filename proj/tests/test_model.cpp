#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "choquard/model.hpp"

using namespace choq;

namespace {

ProblemParams base_params(int n = 256, double eps = 0.1) {
  ProblemParams p;
  p.grid = make_grid(1, n, 16.0);
  p.alpha = 0.5;
  p.p = 2.0;
  p.eps = eps;
  p.potential.kind = PotentialKind::gaussian_well;
  p.potential.floor = 1.0;
  p.potential.depth = 1.0;
  p.potential.width = 1.0;  // V = 2 - e^{-x^2}
  p.lambda_region.shape = RegionSpec::Shape::ball;
  p.lambda_region.halfwidths = Vec{1, 0, 0};
  p.outer_region.shape = RegionSpec::Shape::ball;
  p.outer_region.halfwidths = Vec{2, 0, 0};
  return p;
}

// smooth compactly supported bump of radius rad at c
Field bump_field(const GridSpec& g, double c, double rad, double amp = 1.0) {
  return sample(g, [&](const Vec& x) {
    const double t = (x[0] - c) / rad;
    return std::abs(t) < 1 ? amp * std::exp(-1.0 / (1.0 - t * t)) : 0.0;
  });
}

// direct O(n^2) evaluation of the double integral ∬ f(x) K(x-y) g(y)
double direct_bilinear(const Field& f, const Field& g, const RieszKernel& k) {
  const GridSpec& gr = f.grid;
  const double h = gr.spacing;
  const double A = k.norm_const;
  const double al = k.alpha;
  const double self = A * std::pow(h / 2, al - 1) / al;  // N=1 singular cell average
  double acc = 0;
  for (std::int64_t i = 0; i < gr.size(); ++i) {
    if (f[i] == 0) continue;
    for (std::int64_t j = 0; j < gr.size(); ++j) {
      const double r = std::abs(gr.coord(i % gr.n) - gr.coord(j % gr.n));
      const double kv =
          r == 0 ? self
                 : A * (std::pow(r + h / 2, al) - std::pow(r - h / 2, al)) / (al * h);
      acc += f[i] * kv * g[j];
    }
  }
  return acc * h * h;
}

}  // namespace

TEST_CASE("validate_params classifies the solvable regime") {
  CHECK(validate_params(3, 2, 2).limiting_solvable);
  CHECK_FALSE(validate_params(5, 1, 2).limiting_solvable);       // alpha = N-4 boundary
  CHECK_FALSE(validate_params(3, 2, 5.0 / 3.0).limiting_solvable);  // p = (N+alpha)/N boundary
  RegimeReport r = validate_params(1, 0.5, 2);
  CHECK(r.limiting_solvable);
  CHECK(r.p_lower == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(r.p_upper == HUGE_VAL);  // N < 3: no upper constraint
  CHECK_THROWS_AS(validate_params(1, 1.5, 2), std::invalid_argument);
}

TEST_CASE("hls_constants closed-form values") {
  HlsConstants c = hls_constants(3, 2.0);
  CHECK(std::abs(c.c_alpha - 4.0) < 1e-14 * 4.0);  // Gamma(1/4)/Gamma(5/4) = 4
  CHECK(std::abs(c.a_alpha - 1.0 / (4 * M_PI)) < 1e-14);
  CHECK_THROWS_AS(hls_constants(1, 1.5), std::invalid_argument);
}

TEST_CASE("penalized_g pointwise examples") {
  CHECK(penalized_g(2.0, true, 0.0, 2.0) == 2.0);
  CHECK(penalized_g(2.0, false, 0.1, 2.0) == 0.1);
  CHECK(penalized_g(-1.0, true, 0.0, 2.0) == 0.0);
  CHECK(penalized_g(-1.0, false, 5.0, 2.0) == 0.0);
  // below the cap the two branches agree
  CHECK(penalized_g(0.05, false, 0.1, 2.0) == 0.05);
}

TEST_CASE("penalized_G closed form") {
  CHECK(penalized_G(2.0, true, 0.0, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(penalized_G(3.0, false, 1.0, 2.0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(penalized_G(-2.0, true, 0.0, 2.0) == 0.0);
  CHECK(penalized_G(0.0, false, 1.0, 2.0) == 0.0);
}

TEST_CASE("nonlinearity properties (g1)-(g3)") {
  const double ps[] = {2.0, 2.5, 3.0};
  const double hs[] = {0.0, 0.1, 1.0, 7.0};
  for (double p : ps)
    for (double h : hs)
      for (double s = -1.0; s <= 4.0; s += 0.03) {
        const double sp = std::max(s, 0.0);
        for (bool in_lam : {true, false}) {
          const double g = penalized_g(s, in_lam, h, p);
          const double G = penalized_G(s, in_lam, h, p);
          CHECK(g <= std::pow(sp, p - 1) + 1e-15);  // (g1)
          CHECK(G >= 0.0);                          // (g2)
          CHECK(G <= g * s + 1e-14);                // (g2)
          if (in_lam) CHECK(p * G == doctest::Approx(g * s).epsilon(1e-13));  // (g3)
        }
      }
}

TEST_CASE("penalized_G is C1 across the cap crossover") {
  const double p = 2.5, H = 0.3;
  const double cross = std::pow(H, 1.0 / (p - 1));
  const double d = 1e-6;
  const double left = (penalized_G(cross, false, H, p) - penalized_G(cross - d, false, H, p)) / d;
  const double right = (penalized_G(cross + d, false, H, p) - penalized_G(cross, false, H, p)) / d;
  CHECK(left == doctest::Approx(right).epsilon(1e-4));
  CHECK(left == doctest::Approx(penalized_g(cross, false, H, p)).epsilon(1e-4));
  // derivative of g itself vanishes past the crossover
  CHECK(penalized_g_prime(2 * cross, false, H, p) == 0.0);
  CHECK(penalized_g_prime(0.5 * cross, false, H, p) ==
        doctest::Approx((p - 1) * std::pow(0.5 * cross, p - 2)).epsilon(1e-13));
}

TEST_CASE("potential kinds and the zero factor") {
  PotentialSpec P;
  P.kind = PotentialKind::gaussian_well;
  P.floor = 1.0;
  P.depth = 1.0;
  P.width = 1.0;
  CHECK(P.eval(Vec{0, 0, 0}, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(P.eval(Vec{10, 0, 0}, 1) == doctest::Approx(2.0).epsilon(1e-10));

  P.has_zero = true;
  P.zero_center = Vec{3, 0, 0};
  P.zero_exponent = 2.0;
  P.zero_radius = 2.0;
  CHECK(P.eval(Vec{3, 0, 0}, 1) == 0.0);
  // one grid cell off the zero: quadratic in the distance
  const double v1 = P.eval(Vec{3.1, 0, 0}, 1);
  const double v2 = P.eval(Vec{3.2, 0, 0}, 1);
  CHECK(v2 / v1 == doctest::Approx(4.0).epsilon(0.01));
  // outside the ramp radius the factor saturates at 1
  CHECK(P.eval(Vec{8, 0, 0}, 1) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("problem validation catches bad geometry and potentials") {
  ProblemParams p = base_params();
  CHECK_NOTHROW(p.validate());

  ProblemParams swapped = base_params();
  std::swap(swapped.lambda_region, swapped.outer_region);
  CHECK_THROWS_AS(swapped.validate(), std::invalid_argument);

  ProblemParams bad_alpha = base_params();
  bad_alpha.alpha = 1.5;  // >= N
  CHECK_THROWS_AS(bad_alpha.validate(), std::invalid_argument);

  ProblemParams neg = base_params();
  neg.potential.kind = PotentialKind::constant;
  neg.potential.floor = -1.0;
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}

TEST_CASE("inf over Lambda of the potential") {
  ProblemParams p = base_params();
  const double inf_v = inf_lambda_potential(p);
  CHECK(inf_v == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(inf_v >= 1.0);  // midpoint samples never sit exactly at the well bottom
}

TEST_CASE("limiting energy: zero field and direct-quadrature oracle") {
  ProblemParams p = base_params(512);
  RieszKernel k = make_riesz_kernel(p.grid, p.alpha);
  Field zero(p.grid);
  CHECK(limiting_energy_value(zero, 1.0, p, k) == 0.0);
  CHECK_THROWS_AS(limiting_energy_value(zero, -1.0, p, k), std::invalid_argument);

  Field v = sample(p.grid, [](const Vec& x) { return std::exp(-x[0] * x[0]); });
  const double fast = limiting_energy_value(v, 1.0, p, k);
  // quadratic part from closed forms, nonlocal part by direct double sum
  Field v2(p.grid);
  for (std::int64_t i = 0; i < v.size(); ++i) v2[i] = v[i] * v[i];
  const double quad = 0.5 * (std::sqrt(M_PI / 2) + std::sqrt(M_PI / 2));
  const double oracle = quad - direct_bilinear(v2, v2, k) / (2 * p.p);
  CHECK(fast == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("penalized and original energy coincide for supp u in Lambda") {
  ProblemParams p = base_params(512, 0.2);
  RieszKernel k = make_riesz_kernel(p.grid, p.alpha);
  Penalization pen = build_penalization(2, p, 0.8, 0.4);
  Field u = bump_field(p.grid, 0.0, 0.8, 0.7);
  const double je = penalized_energy(u, pen, p, k);
  const double ee = original_energy(u, p, k);
  CHECK(je == doctest::Approx(ee).epsilon(1e-12));
  CHECK(penalized_energy(Field(p.grid), pen, p, k) == 0.0);
}

TEST_CASE("penalized energy matches a direct-quadrature oracle") {
  ProblemParams p = base_params(256, 0.2);
  RieszKernel k = make_riesz_kernel(p.grid, p.alpha);
  Penalization pen = build_penalization(2, p, 0.8, 0.4);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(0.0, 0.05);
  Field u = sample(p.grid, [](const Vec& x) { return 0.1 * std::exp(-x[0] * x[0] / 4); });
  for (auto& x : u.v) x += dist(rng) * 0.01;

  Field G = apply_G(u, pen, p);
  Field V = p.potential_field();
  double vu2 = 0;
  for (std::int64_t i = 0; i < u.size(); ++i) vu2 += V[i] * u[i] * u[i];
  vu2 *= p.grid.cell_volume();
  const double quad = 0.5 * (p.eps * p.eps * grad_sq_integral(u) + vu2);
  const double oracle =
      quad - p.p / (2 * std::pow(p.eps, p.alpha)) * direct_bilinear(G, G, k);
  CHECK(penalized_energy(u, pen, p, k) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("euler-lagrange residual: zero field and energy-gradient consistency") {
  ProblemParams p = base_params(256, 0.2);
  RieszKernel k = make_riesz_kernel(p.grid, p.alpha);
  Penalization pen = build_penalization(2, p, 0.8, 0.4);
  Field zero(p.grid);
  CHECK(max_abs(euler_lagrange_residual(zero, &pen, p, k)) == 0.0);
  CHECK(max_abs(limiting_residual(zero, 1.0, p, k)) == 0.0);

  Field u = sample(p.grid, [](const Vec& x) { return 0.8 * std::exp(-x[0] * x[0]); });
  Field phi = bump_field(p.grid, 0.4, 1.1, 0.6);
  const double t = 1e-5;
  auto fd = [&](auto&& energy) {
    Field up(u.grid), um(u.grid);
    for (std::int64_t i = 0; i < u.size(); ++i) {
      up[i] = u[i] + t * phi[i];
      um[i] = u[i] - t * phi[i];
    }
    return (energy(up) - energy(um)) / (2 * t);
  };

  // I_lambda
  double dd = fd([&](const Field& w) { return limiting_energy_value(w, 1.3, p, k); });
  double rr = inner(limiting_residual(u, 1.3, p, k), phi);
  CHECK(rr == doctest::Approx(dd).epsilon(1e-6));
  // J_eps
  dd = fd([&](const Field& w) { return penalized_energy(w, pen, p, k); });
  rr = inner(euler_lagrange_residual(u, &pen, p, k), phi);
  CHECK(rr == doctest::Approx(dd).epsilon(1e-6));
  // E_eps
  dd = fd([&](const Field& w) { return original_energy(w, p, k); });
  rr = inner(euler_lagrange_residual(u, nullptr, p, k), phi);
  CHECK(rr == doctest::Approx(dd).epsilon(1e-6));
}

TEST_CASE("apply_g/apply_G agree with the pointwise definitions") {
  ProblemParams p = base_params(128, 0.2);
  Penalization pen = build_penalization(2, p, 0.8, 0.4);
  Field mask = p.lambda_mask();
  Field u = sample(p.grid, [](const Vec& x) { return std::sin(x[0]) * std::exp(-x[0] * x[0] / 9); });
  Field gu = apply_g(u, pen, p), Gu = apply_G(u, pen, p), gp = apply_g_prime(u, pen, p);
  for (std::int64_t i = 0; i < u.size(); ++i) {
    const bool in_lam = mask[i] != 0.0;
    CHECK(gu[i] == penalized_g(u[i], in_lam, pen.h_field[i], p.p));
    CHECK(Gu[i] == penalized_G(u[i], in_lam, pen.h_field[i], p.p));
    CHECK(gp[i] == penalized_g_prime(u[i], in_lam, pen.h_field[i], p.p));
  }
}

TEST_CASE("build_penalization case constructions and hypothesis errors") {
  // case 1 admissible at N=3, alpha=1, p=3
  ProblemParams q;
  q.grid = make_grid(3, 32, 8.0);
  q.alpha = 1.0;
  q.p = 3.0;
  q.eps = 0.2;
  q.potential.kind = PotentialKind::constant;
  q.potential.floor = 1.0;
  q.lambda_region.halfwidths = Vec{1, 0, 0};
  q.outer_region.halfwidths = Vec{2, 0, 0};
  Penalization pen1 = build_penalization(1, q, -1, 0.1);
  CHECK(pen1.case_id == 1);
  CHECK(pen1.mu > 0);
  CHECK(pen1.mu < 1);  // admissible interval is a subset of (0, N-2) = (0, 1)

  Field mask = q.lambda_mask();
  bool outside_positive = false;
  for (std::int64_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0.0) CHECK(pen1.h_field[i] == 0.0);
    if (mask[i] == 0.0 && pen1.h_field[i] > 0) outside_positive = true;
  }
  CHECK(outside_positive);
  CHECK(min_value(pen1.h_field) >= 0.0);

  CHECK_THROWS_WITH_AS(build_penalization(1, base_params(), -1, 0.1),
                       "case 1 requires N >= 3", std::invalid_argument);
  CHECK_THROWS_WITH_AS(build_penalization(3, base_params(), -1, 0.1),
                       "case 3 requires p > 2", std::invalid_argument);
  ProblemParams p3 = base_params();
  p3.p = 3.0;
  CHECK_THROWS_WITH_AS(build_penalization(2, p3, -1, 0.1), "case 2 requires p = 2",
                       std::invalid_argument);
  CHECK_THROWS_AS(build_penalization(2, base_params(), -1, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(build_penalization(4, base_params(), -1, 0.1), std::invalid_argument);
}

TEST_CASE("penalization smallness across an eps sweep") {
  double prev = HUGE_VAL;
  for (double eps : {0.2, 0.1, 0.05}) {
    ProblemParams p = base_params(256, eps);
    Penalization pen = build_penalization(2, p, 0.8, 0.4);
    const double sup = pen.sup_outside_lambda();
    CHECK(sup > 0.0);
    CHECK(sup < prev);
    prev = sup;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("hardy quotient: determinism, zero penalization, (H2) bound") {
  ProblemParams p = base_params(512, 0.05);
  Penalization pen = build_penalization(2, p, 0.8, 0.4);
  CHECK_THROWS_AS(hardy_quotient(pen, p, 8, 1), std::invalid_argument);

  const double k1 = hardy_quotient(pen, p, 32, 7);
  const double k2 = hardy_quotient(pen, p, 32, 7);
  CHECK(k1 == k2);
  CHECK(pen.measured_kappa == k1);
  CHECK(k1 >= 0.0);
  const double c = hls_constants(p.dim(), p.alpha).c_alpha;
  CHECK(c * p.p * k1 < 1.0);

  Penalization off = disabled_penalization(p);
  CHECK(hardy_quotient(off, p, 32, 7) == 0.0);
}

TEST_CASE("barrier construction and preconditions") {
  ProblemParams p = base_params(512, 0.1);
  Penalization pen = build_penalization(2, p, 0.8, 0.4);
  const Vec a{0, 0, 0};
  const double r = 0.4, m = 0.7, big_r = 2.0;
  Field bar = build_barrier(pen, p, a, r, m, big_r);
  // peak value 2·cosh(m(r-d)/eps)/cosh(mr/eps), checked against a naive cosh
  // evaluation at the actual (half-cell) distance of the nearest grid point
  const std::int64_t at = p.grid.nearest_index(a);
  const double d0 = std::abs(p.grid.point(at)[0]);
  const double expect =
      2.0 * std::cosh(m * (r - d0) / p.eps) / std::cosh(m * r / p.eps);
  CHECK(bar[at] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(bar[at] <= 2.0);
  CHECK(min_value(bar) > 0.0);
  // with eps comparable to the cell size the peak sits essentially at 2
  ProblemParams wide = base_params(512, 1.0);
  Penalization pen_w = build_penalization(2, wide, 0.8, 0.4);
  Field bar_w = build_barrier(pen_w, wide, a, r, m, big_r);
  CHECK(bar_w[at] == doctest::Approx(2.0).epsilon(0.03));
  // outside B(a, r) the barrier is proportional to the supersolution profile
  const double c1 = bar[p.grid.nearest_index(Vec{2.5, 0, 0})] /
                    pen.w_profile[p.grid.nearest_index(Vec{2.5, 0, 0})];
  const double c2 = bar[p.grid.nearest_index(Vec{5.0, 0, 0})] /
                    pen.w_profile[p.grid.nearest_index(Vec{5.0, 0, 0})];
  CHECK(c1 == doctest::Approx(c2).epsilon(1e-10));

  CHECK_THROWS_AS(build_barrier(pen, p, a, r, /*m too big*/ 5.0, big_r),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_barrier(pen, p, a, /*r too big*/ 0.9, m, big_r),
                  std::invalid_argument);
  Penalization off = disabled_penalization(p);
  CHECK_THROWS_AS(build_barrier(off, p, a, r, m, big_r), std::invalid_argument);
}
