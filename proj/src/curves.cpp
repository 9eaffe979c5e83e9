#include "regulie/curves.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace regulie {

namespace {

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr double kGlNodes[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeights[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

[[noreturn]] void throw_bad_node(double t) {
  std::ostringstream os;
  os << "quadrature: integrand returned a non-finite value at t = " << t;
  throw NumericError(os.str());
}

// Thomas algorithm for a tridiagonal system; diagonals are modified in place.
std::vector<double> solve_tridiagonal(std::vector<double> lower,
                                      std::vector<double> diag,
                                      std::vector<double> upper,
                                      std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
  return x;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels) {
  if (panels < 1) throw NumericError("quadrature: panels must be positive");
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double acc = 0.0;
    for (int k = 0; k < 8; ++k) {
      const double t = mid + 0.5 * h * kGlNodes[k];
      const double v = f(t);
      if (!std::isfinite(v)) throw_bad_node(t);
      acc += kGlWeights[k] * v;
    }
    total += 0.5 * h * acc;
  }
  return total;
}

Vec integrate_vec(const std::function<Vec(double)>& f, double a, double b,
                  int panels) {
  if (panels < 1) throw NumericError("quadrature: panels must be positive");
  const double h = (b - a) / panels;
  Vec total;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int k = 0; k < 8; ++k) {
      const double t = mid + 0.5 * h * kGlNodes[k];
      Vec v = f(t);
      if (!v.allFinite()) throw_bad_node(t);
      if (total.size() == 0) total = Vec::Zero(v.size());
      total += (0.5 * h * kGlWeights[k]) * v;
    }
  }
  return total;
}

Mat integrate_mat(const std::function<Mat(double)>& f, double a, double b,
                  int panels) {
  if (panels < 1) throw NumericError("quadrature: panels must be positive");
  const double h = (b - a) / panels;
  Mat total;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int k = 0; k < 8; ++k) {
      const double t = mid + 0.5 * h * kGlNodes[k];
      Mat v = f(t);
      if (!v.allFinite()) throw_bad_node(t);
      if (total.size() == 0) total = Mat::Zero(v.rows(), v.cols());
      total += (0.5 * h * kGlWeights[k]) * v;
    }
  }
  return total;
}

std::vector<double> uniform_grid(double a, double b, int n) {
  std::vector<double> ts(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) ts[static_cast<std::size_t>(i)] = a + (b - a) * i / n;
  return ts;
}

// ---- CubicSpline ---------------------------------------------------------------

CubicSpline::CubicSpline(std::vector<double> ts, std::vector<double> ys)
    : ts_(std::move(ts)), ys_(std::move(ys)) {
  const std::size_t n = ts_.size();
  if (n < 2 || ys_.size() != n)
    throw NumericError("spline: need at least two nodes and matching values");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(ts_[i + 1] > ts_[i]))
      throw NumericError("spline: node times must be strictly increasing");
  m_.assign(n, 0.0);
  if (n == 2) return;  // linear: zero curvature

  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = ts_[i + 1] - ts_[i];

  if (n == 3) {
    // Single parabola through three points: constant second derivative.
    double dd = ((ys_[2] - ys_[1]) / h[1] - (ys_[1] - ys_[0]) / h[0]) /
                (ts_[2] - ts_[0]);
    m_.assign(3, 2.0 * dd);
    return;
  }

  // Interior moment equations with not-a-knot corners folded in:
  // M_0 = M_1 - (h0/h1)(M_2 - M_1), symmetric at the right end.
  const std::size_t m = n - 2;  // unknowns M_1 .. M_{n-2}
  std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const std::size_t r = i - 1;
    rhs[r] = 6.0 * ((ys_[i + 1] - ys_[i]) / h[i] - (ys_[i] - ys_[i - 1]) / h[i - 1]);
    lower[r] = h[i - 1];
    diag[r] = 2.0 * (h[i - 1] + h[i]);
    upper[r] = h[i];
  }
  // Fold M_0 into row for i = 1.
  diag[0] += h[0] * (1.0 + h[0] / h[1]);
  upper[0] -= h[0] * h[0] / h[1];
  lower[0] = 0.0;
  // Fold M_{n-1} into row for i = n-2.
  diag[m - 1] += h[n - 2] * (1.0 + h[n - 2] / h[n - 3]);
  lower[m - 1] -= h[n - 2] * h[n - 2] / h[n - 3];
  upper[m - 1] = 0.0;

  std::vector<double> interior = solve_tridiagonal(lower, diag, upper, rhs);
  for (std::size_t i = 0; i < m; ++i) m_[i + 1] = interior[i];
  m_[0] = m_[1] - (h[0] / h[1]) * (m_[2] - m_[1]);
  m_[n - 1] = m_[n - 2] + (h[n - 2] / h[n - 3]) * (m_[n - 2] - m_[n - 3]);
}

int CubicSpline::locate(double t) const {
  const int n = static_cast<int>(ts_.size());
  auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
  int i = static_cast<int>(it - ts_.begin()) - 1;
  return std::min(std::max(i, 0), n - 2);
}

double CubicSpline::operator()(double t) const {
  const std::size_t i = static_cast<std::size_t>(locate(t));
  const double h = ts_[i + 1] - ts_[i];
  const double a = ts_[i + 1] - t, b = t - ts_[i];
  return m_[i] * a * a * a / (6.0 * h) + m_[i + 1] * b * b * b / (6.0 * h) +
         (ys_[i] / h - m_[i] * h / 6.0) * a + (ys_[i + 1] / h - m_[i + 1] * h / 6.0) * b;
}

double CubicSpline::derivative(double t) const {
  const std::size_t i = static_cast<std::size_t>(locate(t));
  const double h = ts_[i + 1] - ts_[i];
  const double a = ts_[i + 1] - t, b = t - ts_[i];
  return -m_[i] * a * a / (2.0 * h) + m_[i + 1] * b * b / (2.0 * h) -
         (ys_[i] / h - m_[i] * h / 6.0) + (ys_[i + 1] / h - m_[i + 1] * h / 6.0);
}

// ---- VectorSpline / MatrixSpline -------------------------------------------------

VectorSpline::VectorSpline(const std::vector<double>& ts,
                           const std::vector<Vec>& ys) {
  if (ys.empty()) throw NumericError("spline: no samples");
  const int d = static_cast<int>(ys.front().size());
  comps_.reserve(static_cast<std::size_t>(d));
  std::vector<double> comp(ts.size());
  for (int c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < ts.size(); ++i) comp[i] = ys[i][c];
    comps_.emplace_back(ts, comp);
  }
}

Vec VectorSpline::operator()(double t) const {
  Vec v(static_cast<Eigen::Index>(comps_.size()));
  for (std::size_t c = 0; c < comps_.size(); ++c) v[static_cast<Eigen::Index>(c)] = comps_[c](t);
  return v;
}

Vec VectorSpline::derivative(double t) const {
  Vec v(static_cast<Eigen::Index>(comps_.size()));
  for (std::size_t c = 0; c < comps_.size(); ++c)
    v[static_cast<Eigen::Index>(c)] = comps_[c].derivative(t);
  return v;
}

MatrixSpline::MatrixSpline(const std::vector<double>& ts,
                           const std::vector<Mat>& ys) {
  if (ys.empty()) throw NumericError("spline: no samples");
  rows_ = static_cast<int>(ys.front().rows());
  cols_ = static_cast<int>(ys.front().cols());
  comps_.reserve(static_cast<std::size_t>(rows_ * cols_));
  std::vector<double> comp(ts.size());
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) {
      for (std::size_t i = 0; i < ts.size(); ++i) comp[i] = ys[i](r, c);
      comps_.emplace_back(ts, comp);
    }
}

Mat MatrixSpline::operator()(double t) const {
  Mat m(rows_, cols_);
  std::size_t k = 0;
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) m(r, c) = comps_[k++](t);
  return m;
}

// ---- AlgebraCurve helpers --------------------------------------------------------

AlgebraCurve constant_curve(const AlgebraElement& x) {
  Vec c = x.coeffs;
  return {x.owner, [c](double) { return c; }, Smoothness::Smooth};
}

AlgebraCurve curve_from_function(GroupPtr g, std::function<Vec(double)> f) {
  return {std::move(g), std::move(f), Smoothness::Smooth};
}

AlgebraCurve curve_from_samples(GroupPtr g, const std::vector<double>& ts,
                                const std::vector<Vec>& values) {
  VectorSpline s(ts, values);
  return {std::move(g), [s](double t) { return s(t); }, Smoothness::Smooth};
}

AlgebraCurve scaled(const AlgebraCurve& x, double factor) {
  auto f = x.eval;
  return {x.owner, [f, factor](double t) { return Vec(factor * f(t)); },
          x.smoothness};
}

AlgebraCurve summed(const AlgebraCurve& x, const AlgebraCurve& y) {
  require_same_owner(x.owner, y.owner, "summed curves");
  auto fx = x.eval, fy = y.eval;
  Smoothness s = (x.smoothness == Smoothness::Smooth &&
                  y.smoothness == Smoothness::Smooth)
                     ? Smoothness::Smooth
                     : Smoothness::Piecewise;
  return {x.owner, [fx, fy](double t) { return Vec(fx(t) + fy(t)); }, s};
}

AlgebraCurve reparametrized(const AlgebraCurve& x,
                            std::function<double(double)> f,
                            std::function<double(double)> fprime) {
  auto fx = x.eval;
  return {x.owner,
          [fx, f = std::move(f), fp = std::move(fprime)](double t) {
            return Vec(fp(t) * fx(f(t)));
          },
          x.smoothness};
}

Vec curve_integral(const AlgebraCurve& x, double t0, double t1, int panels) {
  return integrate_vec([&x](double t) { return x.eval(t); }, t0, t1, panels);
}

// ---- GroupPath -------------------------------------------------------------------

GroupElement GroupPath::at(int i) const {
  if (i < 0 || i >= size()) throw NumericError("path index out of range");
  return GroupElement{owner, values[static_cast<std::size_t>(i)]};
}

GroupElement GroupPath::endpoint() const {
  if (values.empty()) throw NumericError("empty path");
  return GroupElement{owner, values.back()};
}

GroupPath sampled_path(const GroupPtr& g,
                       const std::function<Mat(double)>& value_at, double t0,
                       double t1, int n) {
  GroupPath p;
  p.owner = g;
  p.scheme = "samples";
  p.ts = uniform_grid(t0, t1, n);
  p.values.reserve(p.ts.size());
  for (double t : p.ts) p.values.push_back(value_at(t));
  return p;
}

SampledCurve discrete_log_derivative(const GroupPath& path, Side side) {
  if (path.size() < 2)
    throw NumericError("log derivative: need at least two path nodes");
  SampledCurve out;
  out.ts.reserve(path.ts.size() - 1);
  out.values.reserve(path.ts.size() - 1);
  const auto& g = *path.owner;
  for (int i = 0; i + 1 < path.size(); ++i) {
    const std::size_t u = static_cast<std::size_t>(i);
    const double h = path.ts[u + 1] - path.ts[u];
    Mat inc = (side == Side::Right)
                  ? g.mul(path.values[u + 1], g.inv(path.values[u]))
                  : g.mul(g.inv(path.values[u]), path.values[u + 1]);
    Vec coeffs;
    try {
      coeffs = g.log_value(inc);
    } catch (const BranchError&) {
      std::ostringstream os;
      os << "log derivative: increment over [" << path.ts[u] << ", "
         << path.ts[u + 1] << "] left the log's principal branch; refine the path";
      throw StepTooLargeError(os.str());
    }
    out.ts.push_back(path.ts[u] + 0.5 * h);
    out.values.push_back(Vec(coeffs / h));
  }
  return out;
}

AlgebraCurve log_derivative_curve(const GroupPath& path, Side side) {
  SampledCurve s = discrete_log_derivative(path, side);
  return curve_from_samples(path.owner, s.ts, s.values);
}

// ---- PathInBase ------------------------------------------------------------------

PathInBase base_path(int dim, std::function<Vec(double)> f) {
  PathInBase p;
  p.dim = dim;
  p.eval = std::move(f);
  auto ev = p.eval;
  p.velocity = [ev](double t) {
    const double h = 1e-6;
    return Vec((ev(t + h) - ev(t - h)) / (2.0 * h));
  };
  return p;
}

PathInBase base_path(int dim, std::function<Vec(double)> f,
                     std::function<Vec(double)> fdot) {
  PathInBase p;
  p.dim = dim;
  p.eval = std::move(f);
  p.velocity = std::move(fdot);
  return p;
}

PathInBase polyline_loop(const std::vector<Vec>& corners) {
  if (corners.size() < 2)
    throw UsageError("polyline loop: need at least two corners");
  const int m = static_cast<int>(corners.size());
  const int dim = static_cast<int>(corners.front().size());
  for (const Vec& c : corners)
    if (static_cast<int>(c.size()) != dim)
      throw UsageError("polyline loop: corners have mixed dimensions");
  auto pts = corners;
  PathInBase p;
  p.dim = dim;
  p.eval = [pts, m](double t) {
    double u = t - std::floor(t);  // loop is 1-periodic
    double scaled = u * m;
    int k = std::min(static_cast<int>(scaled), m - 1);
    double frac = scaled - k;
    const Vec& a = pts[static_cast<std::size_t>(k)];
    const Vec& b = pts[static_cast<std::size_t>((k + 1) % m)];
    return Vec(a + frac * (b - a));
  };
  p.velocity = [pts, m](double t) {
    double u = t - std::floor(t);
    int k = std::min(static_cast<int>(u * m), m - 1);
    const Vec& a = pts[static_cast<std::size_t>(k)];
    const Vec& b = pts[static_cast<std::size_t>((k + 1) % m)];
    return Vec(static_cast<double>(m) * (b - a));
  };
  for (int k = 1; k < m; ++k)
    p.breakpoints.push_back(static_cast<double>(k) / m);
  return p;
}

}  // namespace regulie
