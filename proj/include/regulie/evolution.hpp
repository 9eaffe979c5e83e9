#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "regulie/curves.hpp"

namespace regulie {

// ---- evolution operator ----------------------------------------------------

struct EvolveStats {
  int steps = 0;
  double max_constraint_drift = 0.0;
};

/// Full trajectory of the evolution ODE g' = X(t).g (right) or g' = g.X(t)
/// (left) with g(0) = e on [0,1].
struct EvolutionResult {
  GroupPath path;
  GroupElement endpoint;
  EvolveStats stats;
};

/// Fixed-step structure-preserving steppers: every update multiplies by the
/// group exponential of an algebra element, so group constraints hold to
/// rounding. CommutatorFree4 is a two-exponential Gauss-node composition of
/// classical order 4; Midpoint2 is the exponential midpoint rule (order 2).
enum class StepScheme { CommutatorFree4, Midpoint2 };

EvolutionResult evolve(const AlgebraCurve& x, Side side, int n = 1024,
                       StepScheme scheme = StepScheme::CommutatorFree4);

/// Endpoint evol(X) = Evol(X)(1).
GroupElement evol(const AlgebraCurve& x, Side side = Side::Right, int n = 1024);

/// Evol(X)(T) through the scaled-curve definition s -> T·X(T·s); valid for
/// any T where the curve is defined, not only grid times.
GroupElement evol_at(const AlgebraCurve& x, double t_target, int n = 1024);

/// Spline of t -> Ad(g(t)) (or Ad(g(t)^{-1})) along a discrete path.
MatrixSpline ad_spline(const GroupPath& path, bool of_inverse);

// ---- identity checks ---------------------------------------------------------

/// distance(evol^l(X), evol^r(-X)^{-1}).
double evol_inverse_identity_check(const AlgebraCurve& x, int n = 1024);

/// distance(Evol(X)(f(1)), Evol(f'.(X o f))(1) . Evol(X)(f(0))).
double reparameterize_check(const AlgebraCurve& x,
                            const std::function<double(double)>& f,
                            const std::function<double(double)>& fprime,
                            int n = 2048);

/// Sup over midpoint samples of
///   d^r(f.g) - d^r f - Ad(f) d^r g
/// for the pointwise product of the evolution paths of X and Y.
double leibniz_residual(const AlgebraCurve& x, const AlgebraCurve& y,
                        int n = 1024);

// ---- Maurer-Cartan residuals ---------------------------------------------------

/// Sup-norm over the probes of the flatness defect of the logarithmic
/// derivative of a two-parameter group map m(t,s):
///   right: d_t phi_s - d_s phi_t - [phi_t, phi_s]
///   left:  d_t phi_s - d_s phi_t + [phi_t, phi_s]
/// with both inner log derivatives and outer derivatives by central
/// differences of step h.
double maurer_cartan_residual(const std::function<Mat(double, double)>& map,
                              const GroupPtr& g, Side side,
                              const std::vector<std::pair<double, double>>& probes,
                              double h);

/// Same residual for m(t,s) = p(t).p(s)^{-1} built from a discrete path;
/// stencils are aligned with the path's own grid.
double maurer_cartan_residual(const GroupPath& path, Side side);

/// Residual of the map (t,s) -> Evol(X + sY)(t), the two-parameter map
/// behind the tangent formula; evolution paths are cached per s and the
/// stencil step h must divide the grid so samples land on path nodes.
double evolution_mc_residual(const AlgebraCurve& x, const AlgebraCurve& y,
                             Side side,
                             const std::vector<std::pair<double, double>>& probes,
                             double h);

// ---- derivatives of evol and exp ------------------------------------------------

/// The derivative of evol in the curve direction y, reported in both
/// trivializations at the footpoint evol(x):
///   left  = Int_0^t Ad(Evol(x)(s)^{-1}) y(s) ds
///   right = Ad(Evol(x)(t)) . left
struct TangentResult {
  GroupElement footpoint;
  AlgebraElement left;
  AlgebraElement right;
};

TangentResult tangent_evol(const AlgebraCurve& x, const AlgebraCurve& y,
                           int n = 1024);
/// Same for the partial map Evol(.)(t) at a fixed time t in (0, 1].
TangentResult tangent_evol_partial(const AlgebraCurve& x, const AlgebraCurve& y,
                                   double t, int n = 1024);

/// Right-trivialized derivative of exp at x in direction y, via two
/// independent routes that must agree: a quadrature of Ad(exp(t x)) y and
/// the structure-constant series sum_i ad(x)^i y / (i+1)!.
struct DexpResult {
  AlgebraElement integral_form;
  AlgebraElement series_form;
};

DexpResult dexp(const AlgebraElement& x, const AlgebraElement& y);

/// phi1(M) v = sum_{i>=0} M^i v / (i+1)!, truncated when a term drops
/// below 1e-16 in norm; throws NumericError after 200 terms.
Vec phi1_apply(const Mat& m, const Vec& v);
/// phi1(M) as a matrix, same series and guards.
Mat phi1_matrix(const Mat& m);

}  // namespace regulie
