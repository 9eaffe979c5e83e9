// Integration of Lie algebra homomorphisms to group homomorphisms on
// simply connected sources, checked against the quaternion double cover
// and closed-form abelian images.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "regulie/catalog.hpp"
#include "regulie/lie_theory.hpp"

#include <cmath>
#include <utility>
#include <vector>

using namespace regulie;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

AlgebraCurve random_curve(const GroupPtr& g, std::mt19937_64& rng,
                          double max_norm = 1.0) {
  Vec a0 = random_coeffs(rng, g->alg_dim, max_norm / 3.0);
  Vec a1 = random_coeffs(rng, g->alg_dim, max_norm / 3.0);
  Vec b1 = random_coeffs(rng, g->alg_dim, max_norm / 3.0);
  return curve_from_function(g, [a0, a1, b1](double t) {
    return Vec(a0 + std::cos(2.0 * kPi * t) * a1 + std::sin(2.0 * kPi * t) * b1);
  });
}

}  // namespace

TEST_CASE("algebra homomorphisms are validated on basis brackets") {
  GroupPtr so3 = find_group("so3");
  GroupPtr su2 = find_group("su2");
  GroupPtr r3 = find_group("rn:3");
  GroupPtr r2 = find_group("rn:2");

  CHECK_NOTHROW(identity_hom(so3));
  CHECK_NOTHROW(su2_to_so3_hom());

  // A uniform scaling is not bracket-preserving on a non-abelian algebra:
  // f[x,y] scales once, [fx,fy] twice.
  CHECK_THROWS_AS(make_algebra_hom(so3, so3, Mat(0.5 * Mat::Identity(3, 3))),
                  InvalidHomError);

  // Any linear map between abelian algebras qualifies.
  Mat rect(2, 3);
  rect << 0.3, -1.2, 0.7, 0.5, 0.1, -0.4;
  CHECK_NOTHROW(make_algebra_hom(r3, r2, rect));

  // Inner automorphisms are algebra automorphisms.
  GroupElement g0 = exp_g(make_algebra(so3, v3(0.7, -0.3, 1.1)));
  CHECK_NOTHROW(make_algebra_hom(so3, so3, Ad(g0)));

  // Shape mismatches are usage errors.
  CHECK_THROWS_AS(make_algebra_hom(so3, so3, rect), UsageError);

  // On the Heisenberg algebra ([e1,e2] = e3, center e3), a functional into
  // the line is a homomorphism exactly when it kills the center.
  GroupPtr h3 = find_group("heis3");
  GroupPtr line = find_group("rn:1");
  Mat functional(1, 3);
  functional << 0.7, -0.3, 0.0;
  CHECK_NOTHROW(make_algebra_hom(h3, line, functional));
  functional(0, 2) = 0.2;
  CHECK_THROWS_AS(make_algebra_hom(h3, line, functional), InvalidHomError);
}

TEST_CASE("simple connectivity is required and trivial homs integrate trivially") {
  GroupPtr so3 = find_group("so3");
  GroupPtr su2 = find_group("su2");

  CHECK_THROWS_AS(integrate_hom(identity_hom(so3)), PreconditionError);

  // Identity differential on a simply connected group: F = id.
  GroupHom fid = integrate_hom(identity_hom(su2));
  std::mt19937_64 rng = check_stream(31, "hom-identity");
  for (int i = 0; i < 5; ++i) {
    GroupElement g = exp_g(make_algebra(su2, random_coeffs(rng, 3, 3.0)));
    CHECK(distance(fid(g), g) <= 1e-9);
  }

  // Zero differential: F is constant at the unit.
  GroupHom fzero =
      integrate_hom(make_algebra_hom(su2, so3, Mat(Mat::Zero(3, 3))));
  GroupElement g = exp_g(make_algebra(su2, v3(1.2, -0.4, 2.0)));
  CHECK(distance(fzero(g), identity(so3)) <= 1e-12);
}

TEST_CASE("the integrated su(2) differential is the quaternion double cover") {
  GroupPtr su2 = find_group("su2");
  GroupPtr so3 = find_group("so3");
  GroupHom F = integrate_hom(su2_to_so3_hom());

  // 100 random unit quaternions, spread over nearly the whole group
  // (rotation angle up to 2.9 < pi on the algebra side of the cover).
  std::mt19937_64 rng = check_stream(32, "double-cover");
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    GroupElement q = exp_g(make_algebra(su2, random_coeffs(rng, 3, 5.8)));
    worst = std::max(worst, distance(F(q), rotation_of_quaternion(q, so3)));
  }
  CHECK(worst <= 1e-7);

  // Near the antipode the principal log fails and the multiplicative
  // factorization takes over; the oracle still applies.
  Vec axis = v3(0.36, -0.48, 0.8);  // unit vector
  GroupElement near_pole =
      exp_g(make_algebra(su2, Vec((2.0 * kPi - 1e-7) * axis)));
  CHECK(distance(F(near_pole), rotation_of_quaternion(near_pole, so3)) <= 1e-7);

  // The exact antipode -1 maps to the identity rotation.
  GroupElement minus_one = make_element(su2, Mat(-Mat::Identity(4, 4)));
  CHECK(distance(F(minus_one), identity(so3)) <= 1e-7);

  // Homomorphism property on random pairs.
  std::vector<std::pair<GroupElement, GroupElement>> pairs;
  pairs.emplace_back(identity(su2), identity(su2));
  for (int i = 0; i < 20; ++i)
    pairs.emplace_back(exp_g(make_algebra(su2, random_coeffs(rng, 3, 2.5))),
                       exp_g(make_algebra(su2, random_coeffs(rng, 3, 2.5))));
  CHECK(homomorphism_residual(F, pairs) <= 1e-7);

  // Naturality with exp: F(exp(X)) = exp(f X).
  for (int i = 0; i < 10; ++i) {
    Vec x = random_coeffs(rng, 3, 2.0);
    CHECK(distance(F(exp_g(make_algebra(su2, x))),
                   exp_g(make_algebra(so3, x))) <= 1e-8);
  }

  // T_e F recovers the differential.
  Mat fd = differential_by_differences(F);
  CHECK((fd - Mat::Identity(3, 3)).norm() / std::sqrt(3.0) <= 1e-5);

  // Uniqueness shadow: the two-leg path family gives the same map.
  for (int i = 0; i < 10; ++i) {
    GroupElement q = exp_g(make_algebra(su2, random_coeffs(rng, 3, 2.5)));
    CHECK(distance(F(q), F.via_staircase(q)) <= 1e-7);
  }

  // Path independence through arbitrary generator curves: the image of
  // evol(xi) is evol of the mapped generator.
  AlgebraHom f = su2_to_so3_hom();
  for (int i = 0; i < 3; ++i) {
    AlgebraCurve xi = random_curve(su2, rng, 1.5);
    GroupElement end = evol(xi, Side::Right, 1024);
    CHECK(distance(F(end), hom_along(f, xi, 1024)) <= 1e-7);
  }
}

TEST_CASE("heisenberg functionals integrate to coordinate homomorphisms") {
  GroupPtr h3 = find_group("heis3");
  GroupPtr line = find_group("rn:1");
  Mat functional(1, 3);
  functional << 0.7, -0.3, 0.0;
  GroupHom F = integrate_hom(make_algebra_hom(h3, line, functional));

  std::mt19937_64 rng = check_stream(33, "heis-functional");
  std::vector<std::pair<GroupElement, GroupElement>> pairs;
  for (int i = 0; i < 8; ++i) {
    Vec c = random_coeffs(rng, 3, 2.0);
    GroupElement g = exp_g(make_algebra(h3, c));
    // In the unipotent chart the image is 0.7 x - 0.3 y.
    CHECK(F(g).value(0, 0) ==
          doctest::Approx(0.7 * c[0] - 0.3 * c[1]).epsilon(1e-12));
    pairs.emplace_back(g, exp_g(make_algebra(h3, random_coeffs(rng, 3, 2.0))));
  }
  CHECK(homomorphism_residual(F, pairs) <= 1e-12);
}
