// The registered verification checks behind the suite runner. Each check
// measures the residual of one library identity on seeded inputs and is
// judged against a fixed tolerance (scaled by REGULIE_TOLERANCE_SCALE).
#include "regulie/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <utility>

#include "regulie/bundles.hpp"
#include "regulie/catalog.hpp"
#include "regulie/constructions.hpp"
#include "regulie/counterexamples.hpp"
#include "regulie/curves.hpp"
#include "regulie/evolution.hpp"
#include "regulie/expr.hpp"
#include "regulie/lie_theory.hpp"

namespace regulie {
namespace {

constexpr double kPi = 3.14159265358979323846;

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

template <typename... Parts>
std::string cat(Parts&&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

/// Random trigonometric generator curve with sup-norm at most `cap`.
AlgebraCurve random_trig_curve(const GroupPtr& g, std::mt19937_64& rng,
                               double cap = 1.0) {
  Vec a0 = random_coeffs(rng, g->alg_dim, cap / 3.0);
  Vec a1 = random_coeffs(rng, g->alg_dim, cap / 3.0);
  Vec b1 = random_coeffs(rng, g->alg_dim, cap / 3.0);
  return curve_from_function(g, [a0, a1, b1](double t) {
    return Vec(a0 + std::cos(2.0 * kPi * t) * a1 + std::sin(2.0 * kPi * t) * b1);
  });
}

/// The order benchmark generator sin(t) e1 + cos(2t) e2 + t e3.
AlgebraCurve order_bench_curve(const GroupPtr& g) {
  return curve_from_function(
      g, [](double t) { return v3(std::sin(t), std::cos(2.0 * t), t); });
}

/// Central-difference right tangent of evol with one Richardson sweep.
Vec fd_right_tangent(const AlgebraCurve& x, const AlgebraCurve& y, double eps,
                     int n) {
  GroupElement base = evol(x, Side::Right, n);
  auto diff = [&](double e) {
    GroupElement plus = evol(summed(x, scaled(y, e)), Side::Right, n);
    GroupElement minus = evol(summed(x, scaled(y, -e)), Side::Right, n);
    Vec fwd = log_g(mul(plus, inv(base))).coeffs;
    Vec bwd = log_g(mul(minus, inv(base))).coeffs;
    return Vec((fwd - bwd) / (2.0 * e));
  };
  Vec d1 = diff(eps), d2 = diff(2.0 * eps);
  return Vec((4.0 * d1 - d2) / 3.0);
}

/// The polynomial rotation connection shared by the bundle checks:
///   A_1 = 0.4 x2 e1 + 0.3 e2,  A_2 = 0.5 x1 e2 + 0.25 e3  on [0,1]^2,
/// with hand curvature F(d1,d2) = (-0.325, 0.5 - 0.1 x2, 0.2 x1 x2).
ConnectionChart rotation_chart(const GroupPtr& so3) {
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

/// phi = delta^r f0 for f0(x) = exp(x1 X) exp(x2 Y) with X = 0.8 e1,
/// Y = 0.6 e2: the flat benchmark form and its primitive.
struct FlatPair {
  GroupPtr so3;
  Vec xcap, ycap;
  ConnectionChart phi;
  GroupElement f0(const Vec& x) const {
    return mul(exp_g(make_algebra(so3, Vec(x[0] * xcap))),
               exp_g(make_algebra(so3, Vec(x[1] * ycap))));
  }
};

FlatPair flat_pair() {
  FlatPair b;
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

/// Pack component curves into a pair-group generator curve.
AlgebraCurve packed_pair_curve(const GroupPtr& pair, const AlgebraCurve& u,
                               const AlgebraCurve& y) {
  return curve_from_function(pair, [pair, u, y](double t) {
    return pair_algebra(pair, make_algebra(pair_parts(pair).k, u(t)),
                        make_algebra(pair_parts(pair).h, y(t)))
        .coeffs;
  });
}

// ---- evolution suite ---------------------------------------------------------

double run_constant_generator(std::uint64_t seed, std::string* params) {
  GroupPtr so3 = find_group("so3");
  auto rng = check_stream(seed, "evolution/constant-generator");
  Vec c = random_coeffs(rng, 3, 1.0);
  EvolutionResult res =
      evolve(constant_curve(make_algebra(so3, c)), Side::Right, 256);
  double worst = 0.0;
  for (int i = 0; i < res.path.size(); i += 16) {
    GroupElement expect = exp_g(
        make_algebra(so3, Vec(res.path.ts[static_cast<std::size_t>(i)] * c)));
    worst = std::max(worst, distance(res.path.at(i), expect));
  }
  if (params) *params = cat("n=256 norm=", c.norm());
  return worst;
}

double run_cf4_order(std::uint64_t, std::string* params) {
  GroupPtr so3 = find_group("so3");
  AlgebraCurve x = order_bench_curve(so3);
  GroupElement ref = evolve(x, Side::Right, 32768).endpoint;
  std::vector<int> ns = {16, 32, 64, 128, 256};
  std::vector<double> errs;
  for (int n : ns)
    errs.push_back(distance(evolve(x, Side::Right, n).endpoint, ref));
  double worst = 0.0;
  std::ostringstream ratios;
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    double r = errs[i] / errs[i + 1];
    worst = std::max(worst, std::abs(r - 16.0));
    ratios << (i ? "," : "") << r;
  }
  if (params) *params = cat("ns=16..256 ref=32768 ratios=", ratios.str());
  return worst;
}

double run_inverse_identity(std::uint64_t seed, std::string* params) {
  auto rng = check_stream(seed, "evolution/inverse-identity");
  double worst = 0.0;
  for (const char* name : {"so3", "sl2"}) {
    GroupPtr g = find_group(name);
    for (int i = 0; i < 10; ++i)
      worst = std::max(worst,
                       evol_inverse_identity_check(random_trig_curve(g, rng), 1024));
  }
  if (params) *params = "curves=20 n=1024 cap=1";
  return worst;
}

double run_leibniz(std::uint64_t seed, std::string* params) {
  GroupPtr so3 = find_group("so3");
  auto rng = check_stream(seed, "evolution/leibniz-rule");
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    AlgebraCurve x = random_trig_curve(so3, rng);
    AlgebraCurve y = random_trig_curve(so3, rng);
    worst = std::max(worst, leibniz_residual(x, y, 10000));
  }
  if (params) *params = "pairs=10 h=1e-4";
  return worst;
}

double run_mc_decay(std::uint64_t seed, std::string* params) {
  GroupPtr so3 = find_group("so3");
  auto rng = check_stream(seed, "evolution/maurer-cartan-decay");
  AlgebraCurve x = random_trig_curve(so3, rng);
  AlgebraCurve y = random_trig_curve(so3, rng);
  std::vector<std::pair<double, double>> probes = {{0.5, 0.5}, {0.25, 0.75}};
  double coarse = evolution_mc_residual(x, y, Side::Right, probes, 1e-2);
  double fine = evolution_mc_residual(x, y, Side::Right, probes, 1e-3);
  if (params) *params = cat("h=1e-2,1e-3 coarse=", coarse, " fine=", fine);
  return std::max(fine / coarse, fine);
}

double run_tangent_vs_differences(std::uint64_t seed, std::string* params) {
  auto rng = check_stream(seed, "evolution/tangent-vs-differences");
  double worst = 0.0;
  for (const char* name : {"so3", "sl2"}) {
    GroupPtr g = find_group(name);
    for (int i = 0; i < 5; ++i) {
      AlgebraCurve x = random_trig_curve(g, rng);
      AlgebraCurve y = random_trig_curve(g, rng);
      TangentResult tr = tangent_evol(x, y);
      Vec fd = fd_right_tangent(x, y, 1e-5, 1024);
      worst = std::max(worst, (tr.right.coeffs - fd).norm() /
                                  std::max(1.0, fd.norm()));
    }
  }
  if (params) *params = "pairs=10 eps=1e-5";
  return worst;
}

double run_dexp_two_routes(std::uint64_t seed, std::string* params) {
  auto rng = check_stream(seed, "evolution/dexp-two-routes");
  double worst = 0.0;
  for (const char* name : {"so3", "sl2", "se3"}) {
    GroupPtr g = find_group(name);
    for (int i = 0; i < 10; ++i) {
      AlgebraElement x = make_algebra(g, random_coeffs(rng, g->alg_dim, 2.0));
      AlgebraElement y = make_algebra(g, random_coeffs(rng, g->alg_dim, 1.0));
      DexpResult r = dexp(x, y);
      worst = std::max(worst,
                       (r.integral_form.coeffs - r.series_form.coeffs).norm() /
                           std::max(1.0, r.series_form.coeffs.norm()));
    }
  }
  if (params) *params = "samples=30 cap=2";
  return worst;
}

double run_reparameterization(std::uint64_t seed, std::string* params) {
  GroupPtr so3 = find_group("so3");
  auto rng = check_stream(seed, "evolution/reparameterization");
  AlgebraCurve x = random_trig_curve(so3, rng);
  double res = reparameterize_check(
      x, [](double t) { return t * t; }, [](double t) { return 2.0 * t; }, 2048);
  if (params) *params = "f=t^2 n=2048";
  return res;
}

double run_constraint_drift(std::uint64_t seed, std::string* params) {
  auto rng = check_stream(seed, "evolution/constraint-drift");
  double worst = 0.0;
  for (const char* name : {"so3", "su2"}) {
    GroupPtr g = find_group(name);
    EvolutionResult res = evolve(random_trig_curve(g, rng), Side::Right, 1024);
    worst = std::max(worst, res.stats.max_constraint_drift);
  }
  if (params) *params = "groups=so3,su2 n=1024";
  return worst;
}

double run_exp_log_roundtrip(std::uint64_t seed, std::string* params) {
  auto rng = check_stream(seed, "evolution/exp-log-roundtrip");
  double worst = 0.0;
  for (const char* name : {"so3", "su2", "sl2", "se3", "heis3", "rn:4"}) {
    GroupPtr g = find_group(name);
    for (int i = 0; i < 5; ++i) {
      Vec c = random_coeffs(rng, g->alg_dim, 0.8);
      GroupElement e = exp_g(make_algebra(g, c));
      worst = std::max(worst, (log_g(e).coeffs - c).norm());
      worst = std::max(worst, constraint(e));
    }
  }
  if (params) *params = "groups=6 samples=5 cap=0.8";
  return worst;
}

double run_log_derivative_inverts(std::uint64_t seed, std::string* params) {
  GroupPtr so3 = find_group("so3");
  auto rng = check_stream(seed, "evolution/log-derivative-inverts");
  AlgebraCurve x = random_trig_curve(so3, rng);
  EvolutionResult res = evolve(x, Side::Right, 2048);
  SampledCurve d = discrete_log_derivative(res.path, Side::Right);
  double worst = 0.0;
  for (std::size_t i = 0; i < d.ts.size(); i += 64)
    worst = std::max(worst, (d.values[i] - x(d.ts[i])).norm());
  if (params) *params = "n=2048 midpoint-grid";
  return worst;
}

// ---- constructions suite -------------------------------------------------------

double run_euclidean_two_pipeline(std::uint64_t seed, std::string* params) {
  SemidirectSpec spec = euclidean3_semidirect_spec();
  GroupPtr pair = semidirect_group(spec);
  const PairParts& parts = pair_parts(pair);
  auto rng = check_stream(seed, "constructions/euclidean-two-pipeline");
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    AlgebraCurve u = random_trig_curve(parts.k, rng);
    AlgebraCurve y = random_trig_curve(parts.h, rng);
    EvolutionResult staged = evolve_semidirect(spec, u, y, 512, pair);
    EvolutionResult direct =
        evolve(packed_pair_curve(pair, u, y), Side::Right, 512);
    worst = std::max(worst, distance(staged.endpoint, direct.endpoint));
  }
  if (params) *params = "pairs=3 n=512";
  return worst;
}

double run_heisenberg_two_pipeline(std::uint64_t seed, std::string* params) {
  ExtensionSpec spec = heisenberg_extension_spec();
  GroupPtr pair = extension_group(spec);
  const PairParts& parts = pair_parts(pair);
  auto rng = check_stream(seed, "constructions/heisenberg-two-pipeline");
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    AlgebraCurve u = random_trig_curve(parts.k, rng);
    AlgebraCurve y = random_trig_curve(parts.h, rng);
    EvolutionResult staged = evolve_extension(spec, u, y, 512, pair);
    EvolutionResult direct =
        evolve(packed_pair_curve(pair, u, y), Side::Right, 512);
    worst = std::max(worst, distance(staged.endpoint, direct.endpoint));
  }
  if (params) *params = "pairs=3 n=512";
  return worst;
}

double run_tangent_lift(std::uint64_t seed, std::string* params) {
  GroupPtr so3 = find_group("so3");
  SemidirectSpec spec = tangent_group_spec(so3);
  GroupPtr tg = tangent_group(so3);
  const PairParts& parts = pair_parts(tg);
  auto rng = check_stream(seed, "constructions/tangent-lift");
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    AlgebraCurve x = random_trig_curve(so3, rng);
    AlgebraCurve y = random_trig_curve(so3, rng);
    AlgebraCurve yk = curve_from_function(parts.k, y.eval);
    EvolutionResult staged = evolve_semidirect(spec, yk, x, 1024, tg);
    auto [kpart, hpart] = split_element(staged.endpoint);
    TangentResult tr = tangent_evol(x, y, 1024);
    worst = std::max(worst, (Vec(kpart.value.col(0)) - tr.right.coeffs).norm());
    worst = std::max(worst, distance(hpart, tr.footpoint));
  }
  if (params) *params = "pairs=2 n=1024";
  return worst;
}

double run_conv_morphism(std::uint64_t seed, std::string* params) {
  GroupPtr so3 = find_group("so3");
  auto rng = check_stream(seed, "constructions/conv-evol-morphism");
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    ConvolutionElement x = conv_element(so3, random_trig_curve(so3, rng));
    ConvolutionElement y = conv_element(so3, random_trig_curve(so3, rng));
    ConvolutionElement z = conv_mul(x, y);
    for (int j = 0; j < z.evol_path().size(); j += 64) {
      GroupElement expect = mul(x.evol_path().at(j), y.evol_path().at(j));
      worst = std::max(worst, distance(z.evol_path().at(j), expect));
    }
  }
  if (params) *params = "pairs=2 grid=512";
  return worst;
}

double run_conv_associativity(std::uint64_t seed, std::string* params) {
  GroupPtr so3 = find_group("so3");
  auto rng = check_stream(seed, "constructions/conv-associativity");
  ConvolutionElement x = conv_element(so3, random_trig_curve(so3, rng));
  ConvolutionElement y = conv_element(so3, random_trig_curve(so3, rng));
  ConvolutionElement z = conv_element(so3, random_trig_curve(so3, rng));
  ConvolutionElement left = conv_mul(conv_mul(x, y), z);
  ConvolutionElement right = conv_mul(x, conv_mul(y, z));
  double worst = 0.0;
  for (double t : uniform_grid(0.0, 1.0, 32))
    worst = std::max(worst, (left(t) - right(t)).norm());
  if (params) *params = "grid=512 samples=33";
  return worst;
}

double run_conv_evolve_residual(std::uint64_t, std::string* params) {
  GroupPtr so3 = find_group("so3");
  auto field = [](double t, double s) {
    return v3(0.3 * std::sin(2.0 * kPi * t) + 0.2 * s,
              0.25 * std::cos(2.0 * kPi * t) - 0.1 * s * t, 0.2 * t);
  };
  if (params) *params = "grid=32x32 n=512";
  return conv_evolve_ode_residual(so3, field, 32, 512);
}

double run_direct_product_laws(std::uint64_t seed, std::string* params) {
  GroupPtr so3 = find_group("so3");
  GroupPtr sl2 = find_group("sl2");
  SemidirectSpec spec;
  spec.k = so3;
  spec.h = sl2;
  spec.action = [](const GroupElement&, const GroupElement& k) { return k; };
  spec.action_tangent = [](const GroupElement&) { return Mat(Mat::Identity(3, 3)); };
  spec.name = "so3-x-sl2";
  GroupPtr pair = semidirect_group(spec);
  auto rng = check_stream(seed, "constructions/direct-product-laws");
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    GroupElement ka = exp_g(make_algebra(so3, random_coeffs(rng, 3)));
    GroupElement kb = exp_g(make_algebra(so3, random_coeffs(rng, 3)));
    GroupElement ha = exp_g(make_algebra(sl2, random_coeffs(rng, 3)));
    GroupElement hb = exp_g(make_algebra(sl2, random_coeffs(rng, 3)));
    GroupElement a = pair_element(pair, ka, ha);
    GroupElement b = pair_element(pair, kb, hb);
    auto [pk, ph] = split_element(mul(a, b));
    worst = std::max(worst, distance(pk, mul(ka, kb)));
    worst = std::max(worst, distance(ph, mul(ha, hb)));
    auto [ik, ih] = split_element(inv(a));
    worst = std::max(worst, distance(ik, inv(ka)));
    worst = std::max(worst, distance(ih, inv(ha)));
  }
  if (params) *params = "samples=3";
  return worst;
}

// ---- bundles suite ---------------------------------------------------------------

double run_curvature_two_routes(std::uint64_t seed, std::string* params) {
  GroupPtr so3 = find_group("so3");
  ConnectionChart symbolic = rotation_chart(so3);
  // The same coefficients without attached partials force the difference
  // stencil route.
  ConnectionChart numeric = make_chart(
      so3, 2,
      {[](const Vec& x) { return v3(0.4 * x[1], 0.3, 0.0); },
       [](const Vec& x) { return v3(0.0, 0.5 * x[0], 0.25); }},
      v2(0, 0), v2(1, 1));
  auto rng = check_stream(seed, "bundles/curvature-two-routes");
  std::uniform_real_distribution<double> u(0.1, 0.9);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    Vec p = v2(u(rng), u(rng));
    Vec hand = v3(-0.325, 0.5 - 0.1 * p[1], 0.2 * p[0] * p[1]);
    worst = std::max(worst, (curvature(symbolic, p, 0, 1).coeffs - hand).norm());
    worst = std::max(worst, (curvature(numeric, p, 0, 1).coeffs - hand).norm());
  }
  if (params) *params = "points=5 interior";
  return worst;
}

double run_transport_horizontality(std::uint64_t, std::string* params) {
  GroupPtr so3 = find_group("so3");
  ConnectionChart conn = rotation_chart(so3);
  GroupElement g0 = exp_g(make_algebra(so3, v3(0.3, 0.5, -0.4)));
  if (params) *params = "loop=circle(0.5,0.5,0.25) n=1024";
  return transport_horizontality_residual(conn, circle_path(0.5, 0.5, 0.25), g0,
                                          1024);
}

double run_transport_equivariance(std::uint64_t seed, std::string* params) {
  GroupPtr so3 = find_group("so3");
  ConnectionChart conn = rotation_chart(so3);
  auto rng = check_stream(seed, "bundles/transport-equivariance");
  GroupElement g0 = exp_g(make_algebra(so3, random_coeffs(rng, 3)));
  GroupElement g = exp_g(make_algebra(so3, random_coeffs(rng, 3)));
  if (params) *params = "loop=circle(0.5,0.5,0.25) n=1024";
  return transport_equivariance_residual(conn, circle_path(0.5, 0.5, 0.25), g0,
                                         g, 1024);
}

double run_transport_reparameterization(std::uint64_t, std::string* params) {
  GroupPtr so3 = find_group("so3");
  ConnectionChart conn = rotation_chart(so3);
  GroupElement g0 = exp_g(make_algebra(so3, v3(0.1, -0.2, 0.4)));
  PathInBase curve = segment_path(v2(0.1, 0.2), v2(0.9, 0.8));
  PathInBase squared = base_path(
      2, [curve](double t) { return curve.eval(t * t); },
      [curve](double t) { return Vec(2.0 * t * curve.velocity(t * t)); });
  GroupElement direct = parallel_transport(conn, curve, g0, 1024).endpoint();
  GroupElement slow = parallel_transport(conn, squared, g0, 2048).endpoint();
  if (params) *params = "f=t^2 n=1024/2048";
  return distance(direct, slow);
}

double run_abelian_holonomy_sign(std::uint64_t, std::string* params) {
  GroupPtr line = find_group("rn:1");
  // omega = x1 e1 dx2 around the positively oriented unit square: the loop
  // integral is 1, so the holonomy chart value must be exp(-1) additively.
  ConnectionChart shear =
      chart_from_expressions(line, {"0", "x1*e1"}, v2(0, 0), v2(1, 1));
  PathInBase square = polyline_loop({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)});
  HolonomyRecord rec = holonomy(shear, square, identity(line), 1024);
  if (params) *params = cat("value=", rec.holonomy_element.value(0, 0));
  return std::max(std::abs(rec.holonomy_element.value(0, 0) + 1.0),
                  rec.closure_gap);
}

double run_small_loop_curvature(std::uint64_t, std::string* params) {
  GroupPtr so3 = find_group("so3");
  ConnectionChart conn = rotation_chart(so3);
  Vec p = v2(0.4, 0.35);
  Vec f = curvature(conn, p, 0, 1).coeffs;
  auto err_at = [&](double eps) {
    PathInBase loop = polyline_loop(
        {p, Vec(p + v2(eps, 0)), Vec(p + v2(eps, eps)), Vec(p + v2(0, eps))});
    HolonomyRecord rec = holonomy(conn, loop, identity(so3), 512);
    return (log_g(rec.holonomy_element).coeffs / (eps * eps) + f).norm();
  };
  double e1 = err_at(0.1), e2 = err_at(0.05), e3 = err_at(0.025);
  double order = std::min(std::log2(e1 / e2), std::log2(e2 / e3));
  if (params) *params = cat("eps=0.1,0.05,0.025 order=", order);
  return std::max(0.0, 1.0 - order);
}

double run_flat_holonomy_trivial(std::uint64_t, std::string* params) {
  FlatPair fp = flat_pair();
  GroupPtr g = fp.so3;
  ConnectionChart omega = make_chart(
      g, 2,
      {[fp](const Vec& x) { return Vec(-fp.phi.coeffs[0](x)); },
       [fp](const Vec& x) { return Vec(-fp.phi.coeffs[1](x)); }},
      v2(0, 0), v2(1, 1));
  GroupElement g0 = exp_g(make_algebra(g, v3(0.2, -0.4, 0.6)));
  HolonomyRecord rec =
      holonomy(omega, circle_path(0.5, 0.5, 0.3), g0, 1024);
  double worst = distance(rec.holonomy_element, identity(g));
  worst = std::max(worst, curvature_residual(omega, 5));
  if (params) *params = "loop=circle(0.5,0.5,0.3) n=1024";
  return worst;
}

double run_develop_roundtrip(std::uint64_t, std::string* params) {
  FlatPair fp = flat_pair();
  Vec x0 = v2(0.3, 0.4);
  DevelopingMap dev = develop(fp.phi, x0);
  double worst = 0.0;
  for (Vec x : {v2(0.1, 0.2), v2(0.7, 0.9), v2(1.0, 1.0)})
    worst = std::max(worst, distance(mul(dev(x), fp.f0(x0)), fp.f0(x)));
  if (params) *params = "x0=(0.3,0.4) points=3";
  return worst;
}

double run_develop_path_independence(std::uint64_t, std::string* params) {
  FlatPair fp = flat_pair();
  Vec x0 = v2(0.3, 0.4);
  Vec x1 = v2(0.85, 0.75);
  DevelopingMap dev = develop(fp.phi, x0);
  GroupElement direct = develop_along(fp.phi, segment_path(x0, x1), 1024);
  if (params) *params = "staircase-vs-segment";
  return distance(dev(x1), direct);
}

double run_develop_rejects_curved(std::uint64_t, std::string* params) {
  GroupPtr so3 = find_group("so3");
  // x1 X0 dx2 with X0 = e1 has d(omega) = X0 dx1 dx2, genuinely curved.
  ConnectionChart curved =
      chart_from_expressions(so3, {"0", "x1*e1"}, v2(0, 0), v2(1, 1));
  if (params) *params = "form=x1*e1*dx2";
  try {
    DevelopingMap dev = develop(curved, v2(0.5, 0.5));
    (void)dev;
  } catch (const NotFlatError&) {
    return 0.0;
  }
  return 1.0;
}

// ---- lie-theory suite --------------------------------------------------------------

double run_double_cover(std::uint64_t seed, std::string* params) {
  GroupPtr su2 = find_group("su2");
  GroupPtr so3 = find_group("so3");
  GroupHom F = integrate_hom(su2_to_so3_hom());
  auto rng = check_stream(seed, "lie-theory/double-cover");
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    GroupElement q = exp_g(make_algebra(su2, random_coeffs(rng, 3, 3.0)));
    worst = std::max(worst, distance(F(q), rotation_of_quaternion(q, so3)));
  }
  if (params) *params = "samples=100 cap=3";
  return worst;
}

double run_homomorphism_law(std::uint64_t seed, std::string* params) {
  GroupPtr su2 = find_group("su2");
  GroupHom F = integrate_hom(su2_to_so3_hom());
  auto rng = check_stream(seed, "lie-theory/homomorphism-law");
  std::vector<std::pair<GroupElement, GroupElement>> pairs;
  for (int i = 0; i < 20; ++i)
    pairs.emplace_back(exp_g(make_algebra(su2, random_coeffs(rng, 3, 2.5))),
                       exp_g(make_algebra(su2, random_coeffs(rng, 3, 2.5))));
  if (params) *params = "pairs=20 cap=2.5";
  return homomorphism_residual(F, pairs);
}

double run_differential_recovery(std::uint64_t, std::string* params) {
  AlgebraHom f = su2_to_so3_hom();
  GroupHom F = integrate_hom(f);
  Mat d = differential_by_differences(F);
  if (params) *params = "eps=1e-5";
  return (d - f.matrix).norm() / f.matrix.norm();
}

double run_staircase_agreement(std::uint64_t seed, std::string* params) {
  GroupPtr su2 = find_group("su2");
  GroupHom F = integrate_hom(su2_to_so3_hom());
  auto rng = check_stream(seed, "lie-theory/staircase-agreement");
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    GroupElement g = exp_g(make_algebra(su2, random_coeffs(rng, 3, 2.5)));
    worst = std::max(worst, distance(F(g), F.via_staircase(g)));
  }
  if (params) *params = "samples=20 cap=2.5";
  return worst;
}

double run_evolution_naturality(std::uint64_t seed, std::string* params) {
  GroupPtr su2 = find_group("su2");
  AlgebraHom f = su2_to_so3_hom();
  GroupHom F = integrate_hom(f);
  auto rng = check_stream(seed, "lie-theory/evolution-naturality");
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    AlgebraCurve x = random_trig_curve(su2, rng);
    GroupElement via_group = F(evol(x, Side::Right, 1024));
    GroupElement via_algebra = hom_along(f, x, 1024);
    worst = std::max(worst, distance(via_group, via_algebra));
  }
  if (params) *params = "curves=3 n=1024";
  return worst;
}

// ---- counterexamples suite ------------------------------------------------------------

double run_shift_closed_vs_ode(std::uint64_t seed, std::string* params) {
  auto rng = check_stream(seed, "counterexamples/no-solution-closed-vs-ode");
  std::uniform_real_distribution<double> u(0.2, 1.2);
  Vec x0(31);
  for (int i = 0; i < 31; ++i) x0[i] = u(rng);
  ShiftSolveResult res =
      weighted_shift_solve(x0, {-0.5, -0.25, 0.1, 0.3, 0.5});
  if (params) *params = "n=30 ts=5";
  return res.max_rel_disagreement;
}

double run_seminorm_blowup(std::uint64_t, std::string* params) {
  Vec e0 = Vec::Zero(1);
  e0[0] = 1.0;
  std::vector<BlowupRow> rows = seminorm_blowup_report(e0, 0.1, 0, {10, 40});
  double ratio = rows[1].seminorm / rows[0].seminorm;
  if (params) *params = cat("t=0.1 k=0 ratio=", ratio);
  // Pass when the truncation-40 seminorm exceeds the truncation-10 one by a
  // factor of at least 1e6.
  return 1e6 / ratio;
}

double run_nonuniqueness(std::uint64_t, std::string* params) {
  NonuniquenessReport rep = shift_nonuniqueness_demo(9, uniform_grid(0.2, 1.0, 8));
  if (params) *params = cat("k_max=9 separation=", rep.separation_at_half);
  return std::max(rep.max_ode_residual, rep.max_initial_value);
}

double run_transport_flow(std::uint64_t, std::string* params) {
  if (params) *params = "x0=sin t=0.7 h=1e-3";
  return transport_flow_residual([](double s) { return std::sin(s); },
                                 [](double s) { return std::cos(s); }, 0.7);
}

double run_flat_derivative(std::uint64_t, std::string* params) {
  // phi'(0.5) = 2 u^3 phi with u = 2: 16 e^{-4}.
  double expect = 16.0 * std::exp(-4.0);
  if (params) *params = "k=1 t=0.5";
  return std::abs(flat_function_derivative(1, 0.5) - expect) / expect;
}

std::vector<Check> build_registry() {
  std::vector<Check> all = {
      {"evolution/constant-generator", "evolution", "so3", 1e-9,
       run_constant_generator},
      {"evolution/cf4-order", "evolution", "so3", 6.0, run_cf4_order},
      {"evolution/inverse-identity", "evolution", "so3,sl2", 1e-8,
       run_inverse_identity},
      {"evolution/leibniz-rule", "evolution", "so3", 1e-6, run_leibniz},
      {"evolution/maurer-cartan-decay", "evolution", "so3", 0.05, run_mc_decay},
      {"evolution/tangent-vs-differences", "evolution", "so3,sl2", 1e-5,
       run_tangent_vs_differences},
      {"evolution/dexp-two-routes", "evolution", "so3,sl2,se3", 1e-10,
       run_dexp_two_routes},
      {"evolution/reparameterization", "evolution", "so3", 1e-9,
       run_reparameterization},
      {"evolution/constraint-drift", "evolution", "so3,su2", 1e-12,
       run_constraint_drift},
      {"evolution/exp-log-roundtrip", "evolution", "catalog", 1e-9,
       run_exp_log_roundtrip},
      {"evolution/log-derivative-inverts", "evolution", "so3", 1e-5,
       run_log_derivative_inverts},

      {"constructions/euclidean-two-pipeline", "constructions", "rn:3,so3",
       1e-7, run_euclidean_two_pipeline},
      {"constructions/heisenberg-two-pipeline", "constructions", "rn:1,rn:2",
       1e-7, run_heisenberg_two_pipeline},
      {"constructions/tangent-lift", "constructions", "so3", 1e-7,
       run_tangent_lift},
      {"constructions/conv-evol-morphism", "constructions", "so3", 1e-7,
       run_conv_morphism},
      {"constructions/conv-associativity", "constructions", "so3", 1e-7,
       run_conv_associativity},
      {"constructions/conv-evolve-residual", "constructions", "so3", 1e-6,
       run_conv_evolve_residual},
      {"constructions/direct-product-laws", "constructions", "so3,sl2", 1e-12,
       run_direct_product_laws},

      {"bundles/curvature-two-routes", "bundles", "so3", 1e-6,
       run_curvature_two_routes},
      {"bundles/transport-horizontality", "bundles", "so3", 1e-7,
       run_transport_horizontality},
      {"bundles/transport-equivariance", "bundles", "so3", 1e-9,
       run_transport_equivariance},
      {"bundles/transport-reparameterization", "bundles", "so3", 1e-7,
       run_transport_reparameterization},
      {"bundles/abelian-holonomy-sign", "bundles", "rn:1", 1e-8,
       run_abelian_holonomy_sign},
      {"bundles/small-loop-curvature", "bundles", "so3", 0.1,
       run_small_loop_curvature},
      {"bundles/flat-holonomy-trivial", "bundles", "so3", 1e-6,
       run_flat_holonomy_trivial},
      {"bundles/develop-roundtrip", "bundles", "so3", 1e-7,
       run_develop_roundtrip},
      {"bundles/develop-path-independence", "bundles", "so3", 1e-7,
       run_develop_path_independence},
      {"bundles/develop-rejects-curved", "bundles", "so3", 0.5,
       run_develop_rejects_curved},

      {"lie-theory/double-cover", "lie-theory", "su2,so3", 1e-7,
       run_double_cover},
      {"lie-theory/homomorphism-law", "lie-theory", "su2,so3", 1e-7,
       run_homomorphism_law},
      {"lie-theory/differential-recovery", "lie-theory", "su2,so3", 1e-5,
       run_differential_recovery},
      {"lie-theory/staircase-agreement", "lie-theory", "su2,so3", 1e-7,
       run_staircase_agreement},
      {"lie-theory/evolution-naturality", "lie-theory", "su2,so3", 1e-8,
       run_evolution_naturality},

      {"counterexamples/no-solution-closed-vs-ode", "counterexamples",
       "sequence", 1e-9, run_shift_closed_vs_ode},
      {"counterexamples/seminorm-blowup", "counterexamples", "sequence", 1.0,
       run_seminorm_blowup},
      {"counterexamples/non-uniqueness", "counterexamples", "sequence", 1e-10,
       run_nonuniqueness},
      {"counterexamples/transport-flow", "counterexamples", "sequence", 1e-6,
       run_transport_flow},
      {"counterexamples/flat-derivative", "counterexamples", "sequence", 1e-12,
       run_flat_derivative},
  };
  std::sort(all.begin(), all.end(),
            [](const Check& a, const Check& b) { return a.id < b.id; });
  return all;
}

}  // namespace

const std::vector<Check>& check_registry() {
  static const std::vector<Check> registry = build_registry();
  return registry;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "evolution", "bundles", "constructions", "lie-theory", "counterexamples"};
  return names;
}

bool is_suite_name(const std::string& name) {
  if (name == "all") return true;
  const auto& names = suite_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

double tolerance_scale() {
  const char* raw = std::getenv("REGULIE_TOLERANCE_SCALE");
  if (raw == nullptr || *raw == '\0') return 1.0;
  char* end = nullptr;
  double scale = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !std::isfinite(scale) || scale <= 0.0)
    throw UsageError(cat("REGULIE_TOLERANCE_SCALE must be a positive number, got '",
                         raw, "'"));
  return scale;
}

CheckReport run_check(const Check& check, std::uint64_t seed) {
  CheckReport report;
  report.id = check.id;
  report.group = check.group;
  report.tolerance = check.tolerance * tolerance_scale();
  auto start = std::chrono::steady_clock::now();
  try {
    report.residual = check.run(seed, &report.params);
  } catch (const std::exception& e) {
    report.residual = std::numeric_limits<double>::infinity();
    report.params = cat("error=", e.what());
  }
  auto stop = std::chrono::steady_clock::now();
  report.wall_ms =
      std::chrono::duration<double, std::milli>(stop - start).count();
  report.pass = report.residual <= report.tolerance;
  return report;
}

std::vector<CheckReport> run_suite(
    const std::string& name, std::uint64_t seed,
    const std::function<void(const CheckReport&)>& sink) {
  if (!is_suite_name(name))
    throw UsageError(cat("unknown suite '", name,
                         "'; expected all, evolution, bundles, constructions, "
                         "lie-theory, or counterexamples"));
  std::vector<CheckReport> reports;
  for (const Check& check : check_registry()) {
    if (name != "all" && check.suite != name) continue;
    reports.push_back(run_check(check, seed));
    if (sink) sink(reports.back());
  }
  return reports;
}

}  // namespace regulie
