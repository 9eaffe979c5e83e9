#include "regulie/bundles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "regulie/expr.hpp"

namespace regulie {

namespace {

std::string point_string(const Vec& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) {
    if (i) os << ", ";
    os << x[i];
  }
  os << ")";
  return os.str();
}

void require_chart(const ConnectionChart& conn, const char* who) {
  if (!conn.group) throw UsageError(std::string(who) + ": chart has no group");
  if (conn.base_dim <= 0)
    throw UsageError(std::string(who) + ": chart base dimension must be positive");
  if (static_cast<int>(conn.coeffs.size()) != conn.base_dim)
    throw UsageError(std::string(who) +
                     ": chart needs one coefficient function per base axis");
  if (conn.lo.size() != conn.base_dim || conn.hi.size() != conn.base_dim)
    throw UsageError(std::string(who) + ": box corners have wrong dimension");
}

void require_inside(const ConnectionChart& conn, const Vec& x, const char* who) {
  if (!chart_contains(conn, x))
    throw ChartDomainError(std::string(who) + ": point " + point_string(x) +
                           " is outside the chart box");
}

Vec coeff_at(const ConnectionChart& conn, int j, const Vec& x) {
  Vec a = conn.coeffs[static_cast<std::size_t>(j)](x);
  if (a.size() != conn.group->alg_dim)
    throw UsageError("connection: coefficient function returned wrong dimension");
  if (!a.allFinite())
    throw NumericError("connection: coefficient is not finite at " + point_string(x));
  return a;
}

// d A_j / d x_i: analytic when supplied, otherwise a central difference
// whose stencil must stay inside the box.
Vec partial_at(const ConnectionChart& conn, int j, int i, const Vec& x,
               const char* who) {
  if (!conn.partials.empty())
    return conn.partials[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)](x);
  const double eps = 1e-6;
  Vec xp = x, xm = x;
  xp[i] += eps;
  xm[i] -= eps;
  if (!chart_contains(conn, xp) || !chart_contains(conn, xm))
    throw ChartDomainError(std::string(who) + ": derivative stencil at " +
                           point_string(x) + " leaves the chart box");
  return Vec((coeff_at(conn, j, xp) - coeff_at(conn, j, xm)) / (2.0 * eps));
}

AlgebraElement two_form_component(const ConnectionChart& conn, const Vec& x,
                                  int i, int j, double bracket_sign,
                                  const char* who) {
  require_chart(conn, who);
  require_inside(conn, x, who);
  if (i < 0 || i >= conn.base_dim || j < 0 || j >= conn.base_dim)
    throw UsageError(std::string(who) + ": axis index out of range");
  Vec dAj = partial_at(conn, j, i, x, who);
  Vec dAi = partial_at(conn, i, j, x, who);
  Vec br = conn.group->bracket(coeff_at(conn, i, x), coeff_at(conn, j, x));
  return make_algebra(conn.group, Vec(dAj - dAi + bracket_sign * br));
}

Vec path_velocity(const PathInBase& c, double t) {
  if (c.velocity) return c.velocity(t);
  const double h = 1e-6;
  return Vec((c.eval(t + h) - c.eval(t - h)) / (2.0 * h));
}

// One smooth piece of a transport: the evolution grid and its span in the
// original path parameter.
struct TransportSegment {
  double a = 0.0, b = 1.0;
  GroupPath path;  // includes the accumulated start factor
};

// Integrate gamma' = sign * omega(c') . gamma piecewise between the path's
// breakpoints, starting from start_value at t = 0.
std::vector<TransportSegment> run_transport(const ConnectionChart& conn,
                                            const PathInBase& c,
                                            double sign, const Mat& start_value,
                                            int n, const char* who) {
  require_chart(conn, who);
  if (c.dim != conn.base_dim)
    throw UsageError(std::string(who) + ": path dimension does not match the chart");
  if (n < 8) throw UsageError(std::string(who) + ": need at least 8 steps");
  const GroupPtr& g = conn.group;

  std::vector<double> cuts{0.0};
  for (double b : c.breakpoints) {
    if (b <= cuts.back() || b >= 1.0)
      throw UsageError(std::string(who) + ": breakpoints must increase inside (0,1)");
    cuts.push_back(b);
  }
  cuts.push_back(1.0);

  std::vector<TransportSegment> out;
  Mat cur = start_value;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    const double len = b - a;
    int nk = std::max(8, static_cast<int>(std::ceil(n * len)));
    // Generator in the segment's own parameter: s in [0,1] maps to
    // t = a + s len, and the time change scales the velocity by len.
    AlgebraCurve gen = curve_from_function(g, [&conn, &c, a, len, sign, who](double s) {
      const double t = a + s * len;
      Vec x = c.eval(t);
      if (!chart_contains(conn, x))
        throw ChartDomainError(std::string(who) + ": path leaves the chart box at t = " +
                               std::to_string(t) + ", point " + point_string(x));
      Vec v = path_velocity(c, t);
      Vec w = Vec::Zero(conn.group->alg_dim);
      for (int j = 0; j < conn.base_dim; ++j)
        if (v[j] != 0.0) w += coeff_at(conn, j, x) * v[j];
      return Vec(sign * len * w);
    });
    EvolutionResult res = evolve(gen, Side::Right, nk);
    TransportSegment seg;
    seg.a = a;
    seg.b = b;
    seg.path.owner = g;
    seg.path.scheme = res.path.scheme;
    seg.path.ts.reserve(static_cast<std::size_t>(nk) + 1);
    seg.path.values.reserve(static_cast<std::size_t>(nk) + 1);
    for (int i = 0; i <= nk; ++i) {
      seg.path.ts.push_back(a + res.path.ts[static_cast<std::size_t>(i)] * len);
      seg.path.values.push_back(g->mul(res.path.values[static_cast<std::size_t>(i)], cur));
    }
    cur = seg.path.values.back();
    out.push_back(std::move(seg));
  }
  return out;
}

GroupPath concatenate_segments(const std::vector<TransportSegment>& segs,
                               const std::string& scheme) {
  GroupPath p;
  p.owner = segs.front().path.owner;
  p.scheme = scheme;
  p.ts.push_back(0.0);
  p.values.push_back(segs.front().path.values.front());
  for (const TransportSegment& s : segs)
    for (std::size_t i = 1; i < s.path.ts.size(); ++i) {
      p.ts.push_back(s.path.ts[i]);
      p.values.push_back(s.path.values[i]);
    }
  p.ts.back() = 1.0;
  return p;
}

// Grid over the open interior of the box: probes_per_axis points per axis
// at cell centers, visited in row-major order.
bool next_probe(const ConnectionChart& conn, int per_axis, std::vector<int>& idx,
                Vec& x) {
  const int m = conn.base_dim;
  if (idx.empty()) {
    idx.assign(static_cast<std::size_t>(m), 0);
  } else {
    int k = 0;
    while (k < m) {
      if (++idx[static_cast<std::size_t>(k)] < per_axis) break;
      idx[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == m) return false;
  }
  x.resize(m);
  for (int a = 0; a < m; ++a)
    x[a] = conn.lo[a] +
           (idx[static_cast<std::size_t>(a)] + 0.5) / per_axis * (conn.hi[a] - conn.lo[a]);
  return true;
}

double two_form_sup(const ConnectionChart& conn, int per_axis, double bracket_sign,
                    Vec* argmax, const char* who) {
  require_chart(conn, who);
  if (per_axis < 2) throw UsageError(std::string(who) + ": need at least 2 probes per axis");
  double worst = 0.0;
  std::vector<int> idx;
  Vec x;
  while (next_probe(conn, per_axis, idx, x)) {
    for (int i = 0; i < conn.base_dim; ++i)
      for (int j = i + 1; j < conn.base_dim; ++j) {
        double r = two_form_component(conn, x, i, j, bracket_sign, who).norm();
        if (r > worst) {
          worst = r;
          if (argmax) *argmax = x;
        }
      }
  }
  return worst;
}

}  // namespace

ConnectionChart make_chart(GroupPtr group, int base_dim,
                           std::vector<std::function<Vec(const Vec&)>> coeffs,
                           Vec lo, Vec hi) {
  ConnectionChart c;
  c.group = std::move(group);
  c.base_dim = base_dim;
  c.coeffs = std::move(coeffs);
  c.lo = std::move(lo);
  c.hi = std::move(hi);
  require_chart(c, "chart");
  for (int a = 0; a < base_dim; ++a)
    if (!(c.lo[a] < c.hi[a]))
      throw UsageError("chart: box corners must satisfy lo < hi on every axis");
  Vec center = 0.5 * (c.lo + c.hi);
  for (int j = 0; j < base_dim; ++j) coeff_at(c, j, center);
  return c;
}

ConnectionChart chart_from_expressions(const GroupPtr& group,
                                       const std::vector<std::string>& coeff_exprs,
                                       const Vec& lo, const Vec& hi) {
  const int m = static_cast<int>(coeff_exprs.size());
  if (m <= 0) throw UsageError("chart: need at least one coefficient expression");
  std::vector<std::string> vars;
  for (int a = 0; a < m; ++a) vars.push_back("x" + std::to_string(a + 1));
  const int dim = group->alg_dim;
  std::vector<Expr> parsed;
  bool all_polynomial = true;
  for (const std::string& text : coeff_exprs) {
    parsed.push_back(Expr::parse(text, vars, dim));
    all_polynomial = all_polynomial && parsed.back().polynomial();
  }
  std::vector<std::function<Vec(const Vec&)>> coeffs;
  for (const Expr& e : parsed)
    coeffs.push_back([e, dim](const Vec& x) { return e.eval_coeffs(x, dim); });
  ConnectionChart c = make_chart(group, m, std::move(coeffs), lo, hi);
  if (all_polynomial) {
    c.partials.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        Expr d = parsed[static_cast<std::size_t>(j)].derivative(i);
        c.partials[static_cast<std::size_t>(j)].push_back(
            [d, dim](const Vec& x) { return d.eval_coeffs(x, dim); });
      }
  }
  return c;
}

bool chart_contains(const ConnectionChart& conn, const Vec& x) {
  if (x.size() != conn.base_dim) return false;
  for (int a = 0; a < conn.base_dim; ++a)
    if (!(x[a] >= conn.lo[a] && x[a] <= conn.hi[a])) return false;
  return true;
}

AlgebraElement connection_eval(const ConnectionChart& conn, const Vec& x,
                               const Vec& v) {
  require_chart(conn, "connection");
  require_inside(conn, x, "connection");
  if (v.size() != conn.base_dim)
    throw UsageError("connection: tangent vector has wrong dimension");
  Vec w = Vec::Zero(conn.group->alg_dim);
  for (int j = 0; j < conn.base_dim; ++j)
    if (v[j] != 0.0) w += coeff_at(conn, j, x) * v[j];
  return make_algebra(conn.group, w);
}

AlgebraElement bundle_form_pairing(const ConnectionChart& conn, const Vec& x,
                                   const Vec& v, const GroupElement& g,
                                   const AlgebraElement& vertical) {
  require_same_owner(conn.group, g.owner, "bundle form");
  require_same_owner(conn.group, vertical.owner, "bundle form");
  AlgebraElement base = connection_eval(conn, x, v);
  Vec w = Ad(inv(g)) * base.coeffs + vertical.coeffs;
  return make_algebra(conn.group, w);
}

AlgebraElement curvature(const ConnectionChart& conn, const Vec& x, int i,
                         int j) {
  return two_form_component(conn, x, i, j, +1.0, "curvature");
}

AlgebraElement flatness_defect(const ConnectionChart& conn, const Vec& x,
                               int i, int j) {
  return two_form_component(conn, x, i, j, -1.0, "flatness");
}

double flatness_residual(const ConnectionChart& conn, int probes_per_axis,
                         Vec* argmax) {
  return two_form_sup(conn, probes_per_axis, -1.0, argmax, "flatness");
}

double curvature_residual(const ConnectionChart& conn, int probes_per_axis,
                          Vec* argmax) {
  return two_form_sup(conn, probes_per_axis, +1.0, argmax, "curvature");
}

GroupPath parallel_transport(const ConnectionChart& conn, const PathInBase& c,
                             const GroupElement& g0, int n) {
  require_same_owner(conn.group, g0.owner, "parallel transport");
  std::vector<TransportSegment> segs =
      run_transport(conn, c, -1.0, g0.value, n, "parallel transport");
  return concatenate_segments(segs, "transport-" + segs.front().path.scheme);
}

double transport_horizontality_residual(const ConnectionChart& conn,
                                        const PathInBase& c,
                                        const GroupElement& g0, int n) {
  require_same_owner(conn.group, g0.owner, "horizontality");
  std::vector<TransportSegment> segs =
      run_transport(conn, c, -1.0, g0.value, n, "horizontality");
  const GroupPtr& g = conn.group;
  double worst = 0.0;
  for (const TransportSegment& seg : segs) {
    const int nk = static_cast<int>(seg.path.ts.size()) - 1;
    const int m = std::max(1, nk / 256);  // stencil width in grid steps
    // delta^r gamma(t_i) by central differences of two widths, combined to
    // fourth order, compared against -omega(c'(t_i)).
    auto log_deriv = [&](int i, int w) {
      const Mat& gp = seg.path.values[static_cast<std::size_t>(i + w)];
      const Mat& gm = seg.path.values[static_cast<std::size_t>(i - w)];
      double dt = seg.path.ts[static_cast<std::size_t>(i + w)] -
                  seg.path.ts[static_cast<std::size_t>(i - w)];
      return Vec(g->log_value(g->mul(gp, g->inv(gm))) / dt);
    };
    for (int i = 2 * m; i + 2 * m <= nk; i += std::max(1, nk / 16)) {
      Vec d = (4.0 * log_deriv(i, m) - log_deriv(i, 2 * m)) / 3.0;
      double t = seg.path.ts[static_cast<std::size_t>(i)];
      Vec omega = connection_eval(conn, c.eval(t), path_velocity(c, t)).coeffs;
      worst = std::max(worst, (d + omega).norm());
    }
  }
  return worst;
}

double transport_equivariance_residual(const ConnectionChart& conn,
                                       const PathInBase& c,
                                       const GroupElement& g0,
                                       const GroupElement& g, int n) {
  GroupPath shifted = parallel_transport(conn, c, mul(g0, g), n);
  GroupPath base = parallel_transport(conn, c, g0, n);
  double worst = 0.0;
  const int step = std::max(1, (base.size() - 1) / 32);
  for (int i = 0; i < base.size(); i += step)
    worst = std::max(worst, distance(shifted.at(i), mul(base.at(i), g)));
  return worst;
}

HolonomyRecord holonomy(const ConnectionChart& conn, const PathInBase& loop,
                        const GroupElement& g0, int n) {
  require_chart(conn, "holonomy");
  double gap = (loop.eval(0.0) - loop.eval(1.0)).norm();
  if (!(gap <= 1e-9))
    throw LoopError("holonomy: base path is not closed (endpoint gap " +
                    std::to_string(gap) + ")");
  GroupPath path = parallel_transport(conn, loop, g0, n);
  HolonomyRecord rec;
  rec.loop = loop;
  rec.closure_gap = gap;
  rec.basepoint_fiber = g0;
  rec.transport_endpoint = path.endpoint();
  rec.holonomy_element = mul(inv(g0), rec.transport_endpoint);
  return rec;
}

GroupElement develop_along(const ConnectionChart& phi, const PathInBase& p,
                           int n) {
  std::vector<TransportSegment> segs =
      run_transport(phi, p, +1.0, phi.group->identity_value, n, "develop");
  return make_element(phi.group, segs.back().path.values.back());
}

DevelopingMap::DevelopingMap(ConnectionChart form, Vec x0, int segment_n)
    : form_(std::move(form)), x0_(std::move(x0)), segment_n_(segment_n) {
  require_chart(form_, "develop");
  require_inside(form_, x0_, "develop");
  if (segment_n_ < 8) throw UsageError("develop: need at least 8 steps per segment");
}

GroupElement DevelopingMap::operator()(const Vec& x) const {
  require_inside(form_, x, "develop");
  const int m = form_.base_dim;
  // Axis-ordered staircase through the intermediate corners
  // (x_1..x_k, x0_{k+1}..x0_m), one straight segment per axis.
  std::vector<Vec> corners;
  corners.push_back(x0_);
  for (int k = 0; k < m; ++k) {
    Vec c = corners.back();
    c[k] = x[k];
    corners.push_back(c);
  }
  PathInBase stair;
  stair.dim = m;
  stair.eval = [corners, m](double t) {
    double scaled = std::clamp(t, 0.0, 1.0) * m;
    int k = std::min(static_cast<int>(scaled), m - 1);
    double frac = scaled - k;
    return Vec(corners[static_cast<std::size_t>(k)] +
               frac * (corners[static_cast<std::size_t>(k + 1)] -
                       corners[static_cast<std::size_t>(k)]));
  };
  stair.velocity = [corners, m](double t) {
    int k = std::min(static_cast<int>(std::clamp(t, 0.0, 1.0) * m), m - 1);
    return Vec(static_cast<double>(m) *
               (corners[static_cast<std::size_t>(k + 1)] -
                corners[static_cast<std::size_t>(k)]));
  };
  for (int k = 1; k < m; ++k)
    stair.breakpoints.push_back(static_cast<double>(k) / m);
  return develop_along(form_, stair, segment_n_ * m);
}

DevelopingMap develop(const ConnectionChart& phi, const Vec& x0,
                      int probes_per_axis, int segment_n) {
  Vec worst_point;
  double resid = flatness_residual(phi, probes_per_axis, &worst_point);
  if (!(resid <= 1e-6)) {
    std::ostringstream os;
    os << "develop: the form is not flat (defect " << resid << " at "
       << point_string(worst_point) << ")";
    throw NotFlatError(os.str());
  }
  return DevelopingMap(phi, x0, segment_n);
}

}  // namespace regulie
