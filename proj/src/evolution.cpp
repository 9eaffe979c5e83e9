#include "regulie/evolution.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace regulie {

namespace {

// Gauss nodes on [0,1] and the commutator-free order-4 weights.
const double kSqrt3 = std::sqrt(3.0);
const double kNode1 = 0.5 - kSqrt3 / 6.0;
const double kNode2 = 0.5 + kSqrt3 / 6.0;
const double kWa = 0.25 + kSqrt3 / 6.0;
const double kWb = 0.25 - kSqrt3 / 6.0;

Vec curve_value_checked(const AlgebraCurve& x, double t) {
  Vec v = x.eval(t);
  if (!v.allFinite()) {
    std::ostringstream os;
    os << "evolve: curve returned a non-finite value at t = " << t;
    throw NumericError(os.str());
  }
  return v;
}

}  // namespace

EvolutionResult evolve(const AlgebraCurve& x, Side side, int n,
                       StepScheme scheme) {
  if (n < 1) throw UsageError("evolve: step count must be positive");
  const GroupPtr& g = x.owner;
  const double h = 1.0 / n;

  GroupPath path;
  path.owner = g;
  path.scheme = scheme == StepScheme::CommutatorFree4 ? "cf4" : "midpoint2";
  path.ts = uniform_grid(0.0, 1.0, n);
  path.values.reserve(static_cast<std::size_t>(n) + 1);

  Mat cur = g->identity_value;
  path.values.push_back(cur);
  double drift = 0.0;

  for (int k = 0; k < n; ++k) {
    const double t = k * h;
    if (scheme == StepScheme::CommutatorFree4) {
      Vec a1 = curve_value_checked(x, t + kNode1 * h);
      Vec a2 = curve_value_checked(x, t + kNode2 * h);
      Mat inner = g->exp_value(Vec(h * (kWa * a1 + kWb * a2)));
      Mat outer = g->exp_value(Vec(h * (kWb * a1 + kWa * a2)));
      cur = (side == Side::Right) ? g->mul(outer, g->mul(inner, cur))
                                  : g->mul(g->mul(cur, inner), outer);
    } else {
      Vec a = curve_value_checked(x, t + 0.5 * h);
      Mat step = g->exp_value(Vec(h * a));
      cur = (side == Side::Right) ? g->mul(step, cur) : g->mul(cur, step);
    }
    double c = g->constraint(cur);
    drift = std::max(drift, c);
    if (!(c <= 1e-6)) {
      std::ostringstream os;
      os << "evolve: constraint drift " << c << " at t = " << (t + h)
         << " exceeds 1e-6; the group realization is inconsistent";
      throw IntegrityError(os.str());
    }
    path.values.push_back(cur);
  }

  EvolutionResult res;
  res.endpoint = GroupElement{g, cur};
  res.stats = EvolveStats{n, drift};
  res.path = std::move(path);
  return res;
}

GroupElement evol(const AlgebraCurve& x, Side side, int n) {
  return evolve(x, side, n).endpoint;
}

GroupElement evol_at(const AlgebraCurve& x, double t_target, int n) {
  auto fx = x.eval;
  AlgebraCurve scaled_curve{
      x.owner,
      [fx, t_target](double s) { return Vec(t_target * fx(t_target * s)); },
      x.smoothness};
  return evolve(scaled_curve, Side::Right, n).endpoint;
}

MatrixSpline ad_spline(const GroupPath& path, bool of_inverse) {
  std::vector<Mat> ms;
  ms.reserve(path.values.size());
  const auto& g = *path.owner;
  for (const Mat& v : path.values)
    ms.push_back(g.ad_matrix_of(of_inverse ? g.inv(v) : v));
  return MatrixSpline(path.ts, ms);
}

double evol_inverse_identity_check(const AlgebraCurve& x, int n) {
  GroupElement left = evolve(x, Side::Left, n).endpoint;
  GroupElement right = evolve(scaled(x, -1.0), Side::Right, n).endpoint;
  return distance(left, inv(right));
}

double reparameterize_check(const AlgebraCurve& x,
                            const std::function<double(double)>& f,
                            const std::function<double(double)>& fprime,
                            int n) {
  GroupElement lhs = evol_at(x, f(1.0), n);
  AlgebraCurve pulled = reparametrized(x, f, fprime);
  GroupElement rhs =
      mul(evolve(pulled, Side::Right, n).endpoint, evol_at(x, f(0.0), n));
  return distance(lhs, rhs);
}

double leibniz_residual(const AlgebraCurve& x, const AlgebraCurve& y, int n) {
  require_same_owner(x.owner, y.owner, "leibniz residual");
  const GroupPtr& g = x.owner;
  GroupPath pf = evolve(x, Side::Right, n).path;
  GroupPath pg = evolve(y, Side::Right, n).path;
  GroupPath prod;
  prod.owner = g;
  prod.ts = pf.ts;
  prod.scheme = "product";
  prod.values.reserve(pf.values.size());
  for (std::size_t i = 0; i < pf.values.size(); ++i)
    prod.values.push_back(g->mul(pf.values[i], pg.values[i]));

  SampledCurve df = discrete_log_derivative(pf, Side::Right);
  SampledCurve dg = discrete_log_derivative(pg, Side::Right);
  SampledCurve dp = discrete_log_derivative(prod, Side::Right);

  double worst = 0.0;
  for (std::size_t i = 0; i < dp.ts.size(); ++i) {
    // The stencils live at interval midpoints where f is not stored;
    // rebuild f there from the left node and the midpoint generator.
    Mat f_mid = g->mul(
        g->exp_value(Vec(0.5 * (pf.ts[i + 1] - pf.ts[i]) * df.values[i])),
        pf.values[i]);
    Vec expect = df.values[i] + g->ad_matrix_of(f_mid) * dg.values[i];
    worst = std::max(worst, (dp.values[i] - expect).norm());
  }
  return worst;
}

// ---- Maurer-Cartan ------------------------------------------------------------

double maurer_cartan_residual(const std::function<Mat(double, double)>& map,
                              const GroupPtr& g, Side side,
                              const std::vector<std::pair<double, double>>& probes,
                              double h) {
  auto log_diff = [&](const Mat& fwd, const Mat& bwd) {
    Mat inc = (side == Side::Right) ? g->mul(fwd, g->inv(bwd))
                                    : g->mul(g->inv(bwd), fwd);
    return Vec(g->log_value(inc) / h);
  };
  auto phi_t = [&](double t, double s) {
    return log_diff(map(t + 0.5 * h, s), map(t - 0.5 * h, s));
  };
  auto phi_s = [&](double t, double s) {
    return log_diff(map(t, s + 0.5 * h), map(t, s - 0.5 * h));
  };

  double worst = 0.0;
  for (const auto& [t, s] : probes) {
    Vec dt_phis = (phi_s(t + h, s) - phi_s(t - h, s)) / (2.0 * h);
    Vec ds_phit = (phi_t(t, s + h) - phi_t(t, s - h)) / (2.0 * h);
    Vec br = g->bracket(phi_t(t, s), phi_s(t, s));
    Vec r = dt_phis - ds_phit + ((side == Side::Right) ? Vec(-br) : br);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

double maurer_cartan_residual(const GroupPath& path, Side side) {
  const int n = path.size() - 1;
  if (n < 8) throw NumericError("maurer-cartan: path too short");
  const GroupPtr& g = path.owner;
  const double dt = path.ts[1] - path.ts[0];
  auto node = [&](double t) -> const Mat& {
    int i = static_cast<int>(std::lround(t / dt));
    if (i < 0 || i > n || std::abs(path.ts[static_cast<std::size_t>(i)] - t) > 1e-9)
      throw NumericError("maurer-cartan: stencil left the path grid");
    return path.values[static_cast<std::size_t>(i)];
  };
  auto map = [&](double t, double s) { return g->mul(node(t), g->inv(node(s))); };

  const double h = 2.0 * dt;  // half-steps land on the grid
  std::vector<std::pair<double, double>> probes;
  for (int k = 2; k <= 6; ++k)
    probes.emplace_back(path.ts[static_cast<std::size_t>(k * n / 8)],
                        path.ts[static_cast<std::size_t>((8 - k) * n / 8)]);
  return maurer_cartan_residual(map, g, side, probes, h);
}

double evolution_mc_residual(const AlgebraCurve& x, const AlgebraCurve& y,
                             Side side,
                             const std::vector<std::pair<double, double>>& probes,
                             double h) {
  require_same_owner(x.owner, y.owner, "maurer-cartan of evolution map");
  const GroupPtr& g = x.owner;
  const int n = static_cast<int>(std::lround(2.0 / h));
  if (std::abs(n * h - 2.0) > 1e-12)
    throw UsageError("maurer-cartan of evolution map: h must divide the grid (n = 2/h integral)");

  // One evolution path per distinct s value, nodes spaced h/2.
  std::map<long long, GroupPath> cache;
  auto path_for_s = [&](double s) -> const GroupPath& {
    long long key = std::llround(s * 1e12);
    auto it = cache.find(key);
    if (it == cache.end()) {
      AlgebraCurve xs = summed(x, scaled(y, s));
      it = cache.emplace(key, evolve(xs, side, n).path).first;
    }
    return it->second;
  };
  auto map = [&](double t, double s) -> Mat {
    const GroupPath& p = path_for_s(s);
    const double dt = p.ts[1] - p.ts[0];
    int i = static_cast<int>(std::lround(t / dt));
    if (i < 0 || i >= p.size() ||
        std::abs(p.ts[static_cast<std::size_t>(i)] - t) > 1e-9)
      throw NumericError("maurer-cartan of evolution map: t sample off the grid");
    return p.values[static_cast<std::size_t>(i)];
  };
  return maurer_cartan_residual(map, g, side, probes, h);
}

// ---- tangent of evol, dexp ------------------------------------------------------

TangentResult tangent_evol_partial(const AlgebraCurve& x, const AlgebraCurve& y,
                                   double t, int n) {
  require_same_owner(x.owner, y.owner, "tangent of evol");
  if (!(t > 0.0) || !(t <= 1.0))
    throw UsageError("tangent of evol: time must lie in (0, 1]");
  const GroupPtr& g = x.owner;
  // Evolve the time-scaled curve so the path parameter runs over [0,1]
  // with endpoint Evol(x)(t); Evol(x)(s) for s in [0,t] is read off the
  // same path at s/t.
  auto fx = x.eval;
  AlgebraCurve xs{g, [fx, t](double u) { return Vec(t * fx(t * u)); },
                  x.smoothness};
  EvolutionResult res = evolve(xs, Side::Right, n);
  MatrixSpline ad_inv = ad_spline(res.path, /*of_inverse=*/true);
  auto fy = y.eval;
  Vec delta = integrate_vec(
      [&](double s) { return Vec(ad_inv(s / t) * fy(s)); }, 0.0, t, 64);
  TangentResult out;
  out.footpoint = res.endpoint;
  out.left = make_algebra(g, delta);
  out.right = make_algebra(g, Vec(Ad(res.endpoint) * delta));
  return out;
}

TangentResult tangent_evol(const AlgebraCurve& x, const AlgebraCurve& y, int n) {
  return tangent_evol_partial(x, y, 1.0, n);
}

Vec phi1_apply(const Mat& m, const Vec& v) {
  Vec term = v;
  Vec sum = v;
  for (int i = 1; i <= 200; ++i) {
    term = Vec((m * term) / (i + 1.0));
    sum += term;
    if (!sum.allFinite())
      throw NumericError("phi1 series: diverged to non-finite values");
    if (term.norm() < 1e-16) return sum;
  }
  throw NumericError("phi1 series: no convergence within 200 terms");
}

Mat phi1_matrix(const Mat& m) {
  Mat term = Mat::Identity(m.rows(), m.cols());
  Mat sum = term;
  for (int i = 1; i <= 200; ++i) {
    term = Mat((m * term) / (i + 1.0));
    sum += term;
    if (!sum.allFinite())
      throw NumericError("phi1 series: diverged to non-finite values");
    if (term.norm() < 1e-16) return sum;
  }
  throw NumericError("phi1 series: no convergence within 200 terms");
}

DexpResult dexp(const AlgebraElement& x, const AlgebraElement& y) {
  require_same_owner(x.owner, y.owner, "dexp");
  const GroupPtr& g = x.owner;
  Vec integral = integrate_vec(
      [&](double t) {
        return Vec(g->ad_matrix_of(g->exp_value(Vec(t * x.coeffs))) * y.coeffs);
      },
      0.0, 1.0, 64);
  Vec series = phi1_apply(g->ad_of(x.coeffs), y.coeffs);
  return DexpResult{make_algebra(g, integral), make_algebra(g, series)};
}

}  // namespace regulie
