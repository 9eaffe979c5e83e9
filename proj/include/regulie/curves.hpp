#pragma once

#include <functional>
#include <string>
#include <vector>

#include "regulie/group.hpp"

namespace regulie {

// ---- quadrature --------------------------------------------------------------

/// Composite 8-point Gauss-Legendre integral over [a, b] split into `panels`
/// equal panels. Throws NumericError (naming the node) if the integrand
/// returns a non-finite value.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels = 64);
Vec integrate_vec(const std::function<Vec(double)>& f, double a, double b,
                  int panels = 64);
Mat integrate_mat(const std::function<Mat(double)>& f, double a, double b,
                  int panels = 64);

/// n+1 equally spaced nodes from a to b inclusive.
std::vector<double> uniform_grid(double a, double b, int n);

// ---- splines -----------------------------------------------------------------

/// Cubic interpolating spline with not-a-knot end conditions; reduces to a
/// line for two nodes and a parabola for three. Evaluation outside the node
/// range extrapolates the end polynomial.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> ts, std::vector<double> ys);
  double operator()(double t) const;
  double derivative(double t) const;

 private:
  std::vector<double> ts_, ys_, m_;  // m_ = second derivatives at nodes
  int locate(double t) const;
};

/// Component-wise spline of vector samples (algebra coefficients over time).
class VectorSpline {
 public:
  VectorSpline() = default;
  VectorSpline(const std::vector<double>& ts, const std::vector<Vec>& ys);
  Vec operator()(double t) const;
  Vec derivative(double t) const;
  int dim() const { return static_cast<int>(comps_.size()); }

 private:
  std::vector<CubicSpline> comps_;
};

/// Entry-wise spline of matrix samples (adjoint matrices over time).
class MatrixSpline {
 public:
  MatrixSpline() = default;
  MatrixSpline(const std::vector<double>& ts, const std::vector<Mat>& ys);
  Mat operator()(double t) const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<CubicSpline> comps_;  // row-major
};

// ---- curves in a Lie algebra ---------------------------------------------------

enum class Smoothness { Smooth, Piecewise };

/// A time-dependent algebra element t -> X(t), stored as a coefficient
/// function in the owner's basis.
struct AlgebraCurve {
  GroupPtr owner;
  std::function<Vec(double)> eval;
  Smoothness smoothness = Smoothness::Smooth;
  Vec operator()(double t) const { return eval(t); }
};

AlgebraCurve constant_curve(const AlgebraElement& x);
AlgebraCurve curve_from_function(GroupPtr g, std::function<Vec(double)> f);
/// Not-a-knot spline through algebra samples.
AlgebraCurve curve_from_samples(GroupPtr g, const std::vector<double>& ts,
                                const std::vector<Vec>& values);
AlgebraCurve scaled(const AlgebraCurve& x, double factor);
AlgebraCurve summed(const AlgebraCurve& x, const AlgebraCurve& y);
/// The pullback t -> f'(t) X(f(t)), the integrand that makes evolution
/// operators reparameterization-covariant.
AlgebraCurve reparametrized(const AlgebraCurve& x,
                            std::function<double(double)> f,
                            std::function<double(double)> fprime);

/// Coefficient-space integral of the curve over [t0, t1].
Vec curve_integral(const AlgebraCurve& x, double t0, double t1,
                   int panels = 64);

// ---- discrete group paths -------------------------------------------------------

/// A group-valued path sampled at increasing times, in storage values.
struct GroupPath {
  GroupPtr owner;
  std::vector<double> ts;
  std::vector<Mat> values;
  std::string scheme;  // producer tag, e.g. "cf4", "samples"

  GroupElement at(int i) const;
  GroupElement endpoint() const;
  int size() const { return static_cast<int>(ts.size()); }
};

/// Sample a smooth group-valued function onto a uniform grid.
GroupPath sampled_path(const GroupPtr& g,
                       const std::function<Mat(double)>& value_at, double t0,
                       double t1, int n);

struct SampledCurve {
  std::vector<double> ts;
  std::vector<Vec> values;
};

/// Midpoint-staggered logarithmic derivative of a discrete path:
/// right side uses log(g_{i+1} g_i^{-1}) / h at t_i + h/2, left side
/// log(g_i^{-1} g_{i+1}) / h. Throws StepTooLargeError (naming the
/// interval) when an increment leaves the log's principal branch.
SampledCurve discrete_log_derivative(const GroupPath& path, Side side);

/// Spline interpolant of discrete_log_derivative.
AlgebraCurve log_derivative_curve(const GroupPath& path, Side side);

// ---- paths in a chart domain (base space R^m) -----------------------------------

/// A path in a coordinate box, with optional analytic velocity (a centered
/// difference with step 1e-6 is used when absent) and optional interior
/// break times where the velocity may jump (polygon corners).
struct PathInBase {
  int dim = 0;
  std::function<Vec(double)> eval;
  std::function<Vec(double)> velocity;
  std::vector<double> breakpoints;  // strictly inside (0, 1)
  Vec operator()(double t) const { return eval(t); }
};

PathInBase base_path(int dim, std::function<Vec(double)> f);
PathInBase base_path(int dim, std::function<Vec(double)> f,
                     std::function<Vec(double)> fdot);
/// Closed polygon through the given corners, traversed at uniform parameter
/// speed on [0, 1]; the closing edge back to the first corner is implied.
PathInBase polyline_loop(const std::vector<Vec>& corners);

}  // namespace regulie
