// Principal connections over box charts: coefficient evaluation, curvature,
// parallel transport, holonomy, and developing maps, checked against hand
// oracles and closed-form abelian cases.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "regulie/bundles.hpp"
#include "regulie/catalog.hpp"
#include "regulie/curves.hpp"
#include "regulie/evolution.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace regulie;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

// Constant connection on [0,1]^2: omega = a1 dx1 + a2 dx2.
ConnectionChart constant_chart(const GroupPtr& g, const Vec& a1, const Vec& a2) {
  return make_chart(g, 2,
                    {[a1](const Vec&) { return a1; }, [a2](const Vec&) { return a2; }},
                    v2(0, 0), v2(1, 1));
}

// Polynomial non-flat rotation connection used across the transport tests:
//   A_1 = 0.4 x2 e1 + 0.3 e2,  A_2 = 0.5 x1 e2 + 0.25 e3.
// Hand curvature: F(d1,d2) = d1 A_2 - d2 A_1 + [A_1, A_2]
//   = (0, 0.5, 0) - (0.4, 0, 0)
//     + (0.4 x2, 0.3, 0) x (0, 0.5 x1, 0.25)   [cross product]
//   = (-0.325, 0.5 - 0.1 x2, 0.2 x1 x2).
ConnectionChart bench_chart(const GroupPtr& so3) {
  return chart_from_expressions(
      so3, {"0.4*x2*e1 + 0.3*e2", "0.5*x1*e2 + 0.25*e3"}, v2(0, 0), v2(1, 1));
}

PathInBase circle_path(double cx, double cy, double r) {
  return base_path(
      2,
      [cx, cy, r](double t) {
        return v2(cx + r * std::cos(2 * kPi * t), cy + r * std::sin(2 * kPi * t));
      },
      [r](double t) {
        return v2(-2 * kPi * r * std::sin(2 * kPi * t),
                  2 * kPi * r * std::cos(2 * kPi * t));
      });
}

PathInBase segment_path(const Vec& p0, const Vec& p1) {
  return base_path(
      static_cast<int>(p0.size()),
      [p0, p1](double t) { return Vec(p0 + t * (p1 - p0)); },
      [p0, p1](double) { return Vec(p1 - p0); });
}

// The flat benchmark: phi = delta^r f0 for f0(x) = exp(x1 X) exp(x2 Y),
// i.e. phi_1 = X, phi_2 = Ad(exp(x1 X)) Y.
struct FlatBench {
  GroupPtr so3;
  Vec xcap, ycap;
  ConnectionChart phi;
  GroupElement f0(const Vec& x) const {
    return mul(exp_g(make_algebra(so3, Vec(x[0] * xcap))),
               exp_g(make_algebra(so3, Vec(x[1] * ycap))));
  }
};

FlatBench flat_bench() {
  FlatBench b;
  b.so3 = find_group("so3");
  b.xcap = v3(0.8, 0, 0);
  b.ycap = v3(0, 0.6, 0);
  GroupPtr g = b.so3;
  Vec xc = b.xcap, yc = b.ycap;
  b.phi = make_chart(
      g, 2,
      {[xc](const Vec&) { return xc; },
       [g, xc, yc](const Vec& x) {
         return Vec(g->ad_matrix_of(g->exp_value(Vec(x[0] * xc))) * yc);
       }},
      v2(0, 0), v2(1, 1));
  return b;
}

}  // namespace

TEST_CASE("connection evaluation is the linear coefficient pairing") {
  GroupPtr so3 = find_group("so3");
  Vec x0 = v3(0.8, 0, 0);
  ConnectionChart conn = constant_chart(so3, x0, Vec(Vec::Zero(3)));

  CHECK(connection_eval(conn, v2(0.5, 0.5), v2(0, 0)).norm() == 0.0);
  CHECK((connection_eval(conn, v2(0.3, 0.9), v2(1, 0)).coeffs - x0).norm() == 0.0);

  // Linearity in the tangent slot.
  ConnectionChart bench = bench_chart(so3);
  Vec p = v2(0.3, 0.7), va = v2(0.4, -0.2), vb = v2(-0.1, 0.5);
  Vec lhs = connection_eval(bench, p, Vec(2.0 * va + 3.0 * vb)).coeffs;
  Vec rhs = 2.0 * connection_eval(bench, p, va).coeffs +
            3.0 * connection_eval(bench, p, vb).coeffs;
  CHECK((lhs - rhs).norm() <= 1e-15);

  CHECK_THROWS_AS(connection_eval(conn, v2(1.2, 0.5), v2(1, 0)), ChartDomainError);
  CHECK_THROWS_AS(connection_eval(conn, v2(0.5, 0.5), v3(1, 0, 0)), UsageError);

  // Full-bundle pairing reproduces fundamental-field generators: with no
  // base velocity the result is the vertical generator, at any fiber point.
  GroupElement g = exp_g(make_algebra(so3, v3(0.7, -0.4, 1.1)));
  AlgebraElement vert = make_algebra(so3, v3(0.3, 0.2, -0.5));
  AlgebraElement back = bundle_form_pairing(conn, v2(0.4, 0.4), v2(0, 0), g, vert);
  CHECK((back.coeffs - vert.coeffs).norm() <= 1e-14);
  AlgebraElement at_e = bundle_form_pairing(conn, v2(0.4, 0.4), v2(1, 0),
                                            identity(so3), zero_algebra(so3));
  CHECK((at_e.coeffs - x0).norm() <= 1e-14);
}

TEST_CASE("curvature: hand cases, antisymmetry, analytic vs differenced partials") {
  GroupPtr so3 = find_group("so3");
  GroupPtr r2 = find_group("rn:2");

  // Constant abelian form: closed and bracket-free.
  ConnectionChart flat = constant_chart(r2, v2(0.3, -0.1), v2(0.7, 0.2));
  CHECK(curvature(flat, v2(0.5, 0.5), 0, 1).norm() <= 1e-12);

  // omega = x1 X0 dx2: F(d1,d2) = X0.
  Vec x0 = v3(0.8, 0, 0);
  ConnectionChart shear = make_chart(
      so3, 2,
      {[](const Vec&) { return Vec(Vec::Zero(3)); },
       [x0](const Vec& x) { return Vec(x[0] * x0); }},
      v2(0, 0), v2(1, 1));
  CHECK((curvature(shear, v2(0.3, 0.4), 0, 1).coeffs - x0).norm() <= 1e-9);

  // Constant non-commuting coefficients: derivative terms vanish,
  // F = [A_1, A_2] (cross product on the rotation algebra).
  Vec a1 = v3(0.3, -0.2, 0.5), a2 = v3(-0.1, 0.4, 0.2);
  ConnectionChart cc = constant_chart(so3, a1, a2);
  CHECK((curvature(cc, v2(0.6, 0.6), 0, 1).coeffs - v3(-0.24, -0.11, 0.1)).norm() <=
        1e-12);
  // The integrability defect of the same form flips the bracket sign.
  CHECK((flatness_defect(cc, v2(0.6, 0.6), 0, 1).coeffs + v3(-0.24, -0.11, 0.1)).norm() <=
        1e-12);

  // Antisymmetry and the diagonal.
  ConnectionChart bench = bench_chart(so3);
  Vec p = v2(0.4, 0.35);
  CHECK((curvature(bench, p, 0, 1).coeffs + curvature(bench, p, 1, 0).coeffs).norm() <=
        1e-14);
  CHECK(curvature(bench, p, 0, 0).norm() <= 1e-14);

  // Hand curvature of the benchmark connection at (0.4, 0.35):
  // (-0.325, 0.5 - 0.035, 0.2*0.4*0.35) = (-0.325, 0.465, 0.028).
  Vec hand = v3(-0.325, 0.465, 0.028);
  CHECK((curvature(bench, p, 0, 1).coeffs - hand).norm() <= 1e-13);

  // The same connection without analytic partials: central differences agree.
  ConnectionChart fd = make_chart(
      so3, 2,
      {[](const Vec& x) { return v3(0.4 * x[1], 0.3, 0); },
       [](const Vec& x) { return v3(0, 0.5 * x[0], 0.25); }},
      v2(0, 0), v2(1, 1));
  CHECK((curvature(fd, p, 0, 1).coeffs - hand).norm() <= 1e-9);

  // Boundary stencils fail without analytic partials, succeed with them.
  CHECK_THROWS_AS(curvature(fd, v2(0.0, 0.5), 0, 1), ChartDomainError);
  CHECK((curvature(bench, v2(0.0, 0.5), 0, 1).coeffs - v3(-0.325, 0.45, 0)).norm() <=
        1e-13);
}

TEST_CASE("parallel transport: trivial cases and the commuting closed form") {
  GroupPtr so3 = find_group("so3");
  GroupElement g0 = exp_g(make_algebra(so3, v3(0.4, -0.7, 0.3)));

  // Zero connection: the lift is constant.
  ConnectionChart zero = constant_chart(so3, Vec(Vec::Zero(3)), Vec(Vec::Zero(3)));
  GroupPath still = parallel_transport(zero, circle_path(0.5, 0.5, 0.3), g0, 256);
  CHECK(still.ts.front() == 0.0);
  CHECK(still.ts.back() == 1.0);
  for (int i : {0, 64, 128, 256}) CHECK(distance(still.at(i), g0) <= 1e-13);

  // Point path: no motion in the base, no motion in the fiber.
  ConnectionChart bench = bench_chart(so3);
  PathInBase point = base_path(2, [](double) { return v2(0.3, 0.6); },
                               [](double) { return v2(0, 0); });
  GroupPath rest = parallel_transport(bench, point, g0, 64);
  CHECK(distance(rest.endpoint(), g0) <= 1e-13);

  // Straight segment under omega = X0 dx1: gamma(t) = exp(-t X0) g0.
  Vec x0 = v3(0.8, 0, 0);
  ConnectionChart conn = constant_chart(so3, x0, Vec(Vec::Zero(3)));
  PathInBase seg = segment_path(v2(0, 0.2), v2(1, 0.2));
  GroupPath path = parallel_transport(conn, seg, g0, 512);
  for (int i : {128, 256, 512}) {
    double t = path.ts[static_cast<std::size_t>(i)];
    GroupElement expect = mul(exp_g(make_algebra(so3, Vec(-t * x0))), g0);
    CHECK(distance(path.at(i), expect) <= 1e-12);
  }

  // Transported nodes respect the group constraint.
  for (int i : {100, 400}) CHECK(constraint(path.at(i)) <= 1e-9);

  // Leaving the box names the parameter in the error.
  PathInBase out = segment_path(v2(0.5, 0.5), v2(1.7, 0.5));
  try {
    parallel_transport(conn, out, g0, 128);
    FAIL("expected ChartDomainError");
  } catch (const ChartDomainError& e) {
    CHECK(std::string(e.what()).find("leaves the chart box at t") !=
          std::string::npos);
  }
}

TEST_CASE("transport is horizontal and right-equivariant") {
  GroupPtr so3 = find_group("so3");
  ConnectionChart bench = bench_chart(so3);
  GroupElement g0 = exp_g(make_algebra(so3, v3(0.4, -0.7, 0.3)));
  GroupElement g = exp_g(make_algebra(so3, v3(-0.2, 0.5, 0.8)));

  PathInBase circle = circle_path(0.5, 0.5, 0.3);
  CHECK(transport_horizontality_residual(bench, circle, g0, 1024) <= 1e-7);
  CHECK(transport_equivariance_residual(bench, circle, g0, g, 1024) <= 1e-9);

  // Piecewise-linear loop: segment splitting keeps the lift horizontal.
  PathInBase square =
      polyline_loop({v2(0.2, 0.2), v2(0.8, 0.2), v2(0.8, 0.8), v2(0.2, 0.8)});
  CHECK(transport_horizontality_residual(bench, square, g0, 1024) <= 1e-7);
  CHECK(transport_equivariance_residual(bench, square, g0, g, 1024) <= 1e-9);

  // Reparameterization: Pt(c, f(t), u) = Pt(c o f, t, Pt(c, f(0), u)) for
  // f(t) = t^2; probed at parameters whose squares land on grid nodes.
  PathInBase warped = base_path(
      2,
      [circle](double t) { return circle.eval(t * t); },
      [circle](double t) { return Vec(2.0 * t * circle.velocity(t * t)); });
  GroupPath direct = parallel_transport(bench, circle, g0, 1024);
  GroupPath slow = parallel_transport(bench, warped, g0, 1024);
  for (double t : {0.25, 0.5, 0.75, 1.0}) {
    int i_slow = static_cast<int>(std::lround(t * 1024));
    int i_direct = static_cast<int>(std::lround(t * t * 1024));
    CHECK(distance(slow.at(i_slow), direct.at(i_direct)) <= 1e-7);
  }
}

TEST_CASE("holonomy: exact forms, the abelian sign pin, conjugation, basepoints") {
  GroupPtr line = find_group("rn:1");
  GroupPtr so3 = find_group("so3");
  PathInBase unit_square =
      polyline_loop({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)});

  // Exact abelian form omega = d(x1^2 x2): holonomy is the unit.
  ConnectionChart exact = chart_from_expressions(
      line, {"2*x1*x2*e1", "x1^2*e1"}, v2(0, 0), v2(1, 1));
  HolonomyRecord trivial = holonomy(exact, unit_square, identity(line), 1024);
  CHECK(distance(trivial.holonomy_element, identity(line)) <= 1e-10);

  // Sign pin-down: omega = x1 X0 dx2 around the positively oriented unit
  // square. The loop integral of omega is X0 (only the x1 = 1 edge
  // contributes), so the holonomy is exp(-X0): chart value -1.
  ConnectionChart shear =
      chart_from_expressions(line, {"0", "x1*e1"}, v2(0, 0), v2(1, 1));
  HolonomyRecord pinned = holonomy(shear, unit_square, identity(line), 1024);
  CHECK(pinned.holonomy_element.value(0, 0) == doctest::Approx(-1.0).epsilon(1e-11));
  CHECK(distance(pinned.holonomy_element,
                 exp_g(make_algebra(line, v1(-1.0)))) <= 1e-11);
  CHECK(pinned.closure_gap <= 1e-12);

  // Conjugation law on rotations: moving the basepoint fiber by g
  // conjugates the holonomy element.
  ConnectionChart bench = bench_chart(so3);
  PathInBase circle = circle_path(0.5, 0.5, 0.25);
  GroupElement g0 = exp_g(make_algebra(so3, v3(0.3, 0.5, -0.4)));
  GroupElement g = exp_g(make_algebra(so3, v3(-0.6, 0.2, 0.7)));
  HolonomyRecord at_g0 = holonomy(bench, circle, g0, 1024);
  HolonomyRecord at_g0g = holonomy(bench, circle, mul(g0, g), 1024);
  CHECK(distance(at_g0g.holonomy_element,
                 mul(mul(inv(g), at_g0.holonomy_element), g)) <= 1e-9);
  CHECK(constraint(at_g0.holonomy_element) <= 1e-9);
  // The holonomy is genuinely nontrivial here.
  CHECK(distance(at_g0.holonomy_element, identity(so3)) > 1e-2);

  // Basepoint transport invariance: conjugating the loop by a connecting
  // path c and starting from the transported fiber point reproduces the
  // same holonomy element.
  PathInBase connect = segment_path(v2(0.75, 0.5), v2(0.3, 0.4));
  GroupPath carried = parallel_transport(bench, connect, g0, 1024);
  GroupElement u1 = carried.endpoint();
  PathInBase conjugated;
  conjugated.dim = 2;
  conjugated.eval = [connect, circle](double t) {
    if (t < 1.0 / 3.0) return connect.eval(1.0 - 3.0 * t);       // back to the loop base
    if (t < 2.0 / 3.0) return circle.eval(3.0 * t - 1.0);        // around the loop
    return connect.eval(3.0 * t - 2.0);                          // forward again
  };
  conjugated.velocity = [connect, circle](double t) {
    if (t < 1.0 / 3.0) return Vec(-3.0 * connect.velocity(1.0 - 3.0 * t));
    if (t < 2.0 / 3.0) return Vec(3.0 * circle.velocity(3.0 * t - 1.0));
    return Vec(3.0 * connect.velocity(3.0 * t - 2.0));
  };
  conjugated.breakpoints = {1.0 / 3.0, 2.0 / 3.0};
  HolonomyRecord moved = holonomy(bench, conjugated, u1, 1536);
  CHECK(distance(moved.holonomy_element, at_g0.holonomy_element) <= 1e-8);

  // Open paths are rejected.
  CHECK_THROWS_AS(holonomy(bench, connect, g0, 256), LoopError);
}

TEST_CASE("small loops recover the curvature with first-order convergence") {
  GroupPtr so3 = find_group("so3");
  ConnectionChart bench = bench_chart(so3);
  Vec p = v2(0.4, 0.35);
  Vec f = curvature(bench, p, 0, 1).coeffs;  // (-0.325, 0.465, 0.028)

  auto err_at = [&](double eps) {
    PathInBase loop = polyline_loop({p, Vec(p + v2(eps, 0)), Vec(p + v2(eps, eps)),
                                     Vec(p + v2(0, eps))});
    HolonomyRecord rec = holonomy(bench, loop, identity(so3), 512);
    Vec logh = log_g(rec.holonomy_element).coeffs;
    return (logh / (eps * eps) + f).norm();
  };
  double e1 = err_at(0.1), e2 = err_at(0.05), e3 = err_at(0.025);
  CHECK(e2 < e1);
  CHECK(e3 < e2);
  CHECK(std::log2(e1 / e2) >= 0.9);
  CHECK(std::log2(e2 / e3) >= 0.9);
}

TEST_CASE("flat connections have trivial holonomy on contractible loops") {
  FlatBench fb = flat_bench();
  // The connection whose transport generator is +phi, i.e. omega = -phi.
  GroupPtr g = fb.so3;
  ConnectionChart omega = make_chart(
      g, 2,
      {[fb](const Vec& x) { return Vec(-fb.phi.coeffs[0](x)); },
       [fb](const Vec& x) { return Vec(-fb.phi.coeffs[1](x)); }},
      v2(0, 0), v2(1, 1));
  CHECK(curvature_residual(omega, 5) <= 1e-8);

  GroupElement g0 = exp_g(make_algebra(g, v3(0.2, -0.4, 0.6)));
  for (int variant = 0; variant < 2; ++variant) {
    PathInBase loop = variant == 0
                          ? circle_path(0.5, 0.5, 0.3)
                          : polyline_loop({v2(0.1, 0.1), v2(0.9, 0.2), v2(0.7, 0.9)});
    HolonomyRecord rec = holonomy(omega, loop, g0, 1024);
    CHECK(distance(rec.holonomy_element, identity(g)) <= 1e-6);
  }
}

TEST_CASE("developing maps: primitive of a flat form, path independence, round trip") {
  FlatBench fb = flat_bench();
  CHECK(flatness_residual(fb.phi, 5) <= 1e-8);

  Vec x0 = v2(0.2, 0.3);
  DevelopingMap f = develop(fb.phi, x0, 5, 256);
  CHECK(distance(f(x0), identity(fb.so3)) <= 1e-13);

  // Round trip: develop recovers f0 up to right translation by f0(x0)^{-1}.
  GroupElement shift = fb.f0(x0);
  for (const Vec& x : {v2(0.8, 0.7), v2(0.1, 0.9), v2(0.55, 0.15), v2(1.0, 1.0)})
    CHECK(distance(mul(f(x), shift), fb.f0(x)) <= 1e-7);

  // Path independence: staircase vs straight segment.
  for (const Vec& x : {v2(0.9, 0.8), v2(0.3, 0.05)})
    CHECK(distance(f(x), develop_along(fb.phi, segment_path(x0, x), 512)) <= 1e-7);

  // delta^r f = phi along a random segment, via the discrete logarithmic
  // derivative of the sampled image path.
  PathInBase seg = segment_path(v2(0.25, 0.7), v2(0.85, 0.25));
  GroupPath image = sampled_path(
      fb.so3, [&](double t) { return f(seg.eval(t)).value; }, 0.0, 1.0, 256);
  SampledCurve dr = discrete_log_derivative(image, Side::Right);
  double worst = 0.0;
  for (std::size_t i = 0; i < dr.ts.size(); i += 16) {
    Vec expect =
        connection_eval(fb.phi, seg.eval(dr.ts[i]), seg.velocity(dr.ts[i])).coeffs;
    worst = std::max(worst, (dr.values[i] - expect).norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("developing maps: abelian closed form and the zero form") {
  GroupPtr line = find_group("rn:1");
  // phi = d(x1^2 x2): the primitive is x -> exp(x1^2 x2 - x0_1^2 x0_2).
  ConnectionChart exact = chart_from_expressions(
      line, {"2*x1*x2*e1", "x1^2*e1"}, v2(0, 0), v2(1, 1));
  CHECK(flatness_residual(exact, 5) <= 1e-12);
  DevelopingMap f = develop(exact, v2(0.2, 0.3), 5, 256);
  // f(0.7, 0.9) = exp(0.441 - 0.012): chart value 0.429.
  CHECK(f(v2(0.7, 0.9)).value(0, 0) == doctest::Approx(0.429).epsilon(1e-10));
  CHECK(f(v2(1.0, 0.5)).value(0, 0) == doctest::Approx(0.5 - 0.012).epsilon(1e-10));

  GroupPtr so3 = find_group("so3");
  ConnectionChart zero = constant_chart(so3, Vec(Vec::Zero(3)), Vec(Vec::Zero(3)));
  DevelopingMap fz = develop(zero, v2(0.5, 0.5), 5, 64);
  for (const Vec& x : {v2(0.1, 0.8), v2(0.9, 0.2)})
    CHECK(distance(fz(x), identity(so3)) <= 1e-14);

  // Non-flat forms are rejected with the defect and its location.
  ConnectionChart shear =
      chart_from_expressions(so3, {"0", "x1*0.8*e1"}, v2(0, 0), v2(1, 1));
  try {
    develop(shear, v2(0.5, 0.5));
    FAIL("expected NotFlatError");
  } catch (const NotFlatError& e) {
    CHECK(std::string(e.what()).find("not flat") != std::string::npos);
  }

  // Evaluation outside the box is a domain error.
  CHECK_THROWS_AS(f(v2(1.4, 0.5)), ChartDomainError);
}
