#pragma once

#include <functional>
#include <string>
#include <vector>

#include "regulie/curves.hpp"
#include "regulie/evolution.hpp"
#include "regulie/group.hpp"

namespace regulie {

/// A principal connection on the trivial bundle (box in R^m) x G, given in
/// the identity gauge by its algebra-valued coefficient functions:
///   omega = sum_j A_j(x) dx^j,  A_j(x) reported as coefficient vectors.
struct ConnectionChart {
  GroupPtr group;
  int base_dim = 0;
  /// coeffs[j](x) = coefficients of A_j at the base point x.
  std::vector<std::function<Vec(const Vec&)>> coeffs;
  Vec lo, hi;  // axis-aligned box corners, lo < hi componentwise
  /// Optional analytic partials: partials[j][i](x) = d A_j / d x_i. When
  /// empty, curvature falls back to central differences (step 1e-6).
  std::vector<std::vector<std::function<Vec(const Vec&)>>> partials;
};

/// Validating constructor: checks shapes and evaluability at the box center.
ConnectionChart make_chart(GroupPtr group, int base_dim,
                           std::vector<std::function<Vec(const Vec&)>> coeffs,
                           Vec lo, Vec hi);

/// Coefficients given as expressions in x1..xm with basis atoms e1..eN,
/// one expression per base axis. Polynomial coefficients get symbolic
/// partial derivatives attached; all others use central differences.
ConnectionChart chart_from_expressions(const GroupPtr& group,
                                       const std::vector<std::string>& coeff_exprs,
                                       const Vec& lo, const Vec& hi);

bool chart_contains(const ConnectionChart& conn, const Vec& x);

/// omega_x(v) = sum_j A_j(x) v_j. Throws ChartDomainError outside the box.
AlgebraElement connection_eval(const ConnectionChart& conn, const Vec& x,
                               const Vec& v);

/// The connection form of the full bundle at the fiber point g, paired with
/// a tangent vector whose base part is v and whose vertical part is the
/// fundamental field of X (left trivialization):
///   Ad(g^{-1}) omega_x(v) + X.
/// With v = 0 this reproduces the fundamental-field generator X exactly.
AlgebraElement bundle_form_pairing(const ConnectionChart& conn, const Vec& x,
                                   const Vec& v, const GroupElement& g,
                                   const AlgebraElement& vertical);

/// Curvature component F(d_i, d_j) = d_i A_j - d_j A_i + [A_i, A_j],
/// antisymmetric in (i, j). Central-difference stencils must stay inside
/// the box unless analytic partials are attached.
AlgebraElement curvature(const ConnectionChart& conn, const Vec& x, int i,
                         int j);

/// Integrability defect of a 1-form phi as a candidate right logarithmic
/// derivative: d_i phi_j - d_j phi_i - [phi_i, phi_j]. This vanishes
/// exactly when phi = (d f) f^{-1} for some map f into the group; note the
/// bracket sign is opposite to the curvature of a connection.
AlgebraElement flatness_defect(const ConnectionChart& conn, const Vec& x,
                               int i, int j);

/// Sup of |flatness_defect| over an interior probe grid (probes_per_axis
/// points per axis, all axis pairs). Reports the worst point via argmax.
double flatness_residual(const ConnectionChart& conn, int probes_per_axis = 5,
                         Vec* argmax = nullptr);

/// Sup of |curvature| over the same probe grid.
double curvature_residual(const ConnectionChart& conn, int probes_per_axis = 5,
                          Vec* argmax = nullptr);

// ---- parallel transport ----------------------------------------------------------

/// Horizontal lift of the base path c through g0, reported in the fiber
/// coordinate: gamma(t) = Evol(-omega(c'))(t) . g0, integrated segment by
/// segment between the path's breakpoints (n steps distributed over the
/// segments in proportion to their parameter length). Throws
/// ChartDomainError naming t if the path leaves the box.
GroupPath parallel_transport(const ConnectionChart& conn, const PathInBase& c,
                             const GroupElement& g0, int n = 1024);

/// Sup over interior probe nodes of |delta^r gamma + omega(c')|: the full
/// connection form paired with the lifted velocity, which vanishes for
/// horizontal curves. The discrete derivative uses Richardson-extrapolated
/// central differences on the transport grid, away from breakpoints.
double transport_horizontality_residual(const ConnectionChart& conn,
                                        const PathInBase& c,
                                        const GroupElement& g0, int n = 1024);

/// Sup over nodes of distance(Pt(c,t,g0.g), Pt(c,t,g0).g).
double transport_equivariance_residual(const ConnectionChart& conn,
                                       const PathInBase& c,
                                       const GroupElement& g0,
                                       const GroupElement& g, int n = 1024);

// ---- holonomy --------------------------------------------------------------------

struct HolonomyRecord {
  PathInBase loop;
  double closure_gap = 0.0;
  GroupElement basepoint_fiber;
  GroupElement transport_endpoint;   // gamma(1) = Evol(-omega(c'))(1) . g0
  GroupElement holonomy_element;     // g0^{-1} . Evol(-omega(c'))(1) . g0
};

/// Transport around a closed loop. Throws LoopError when the loop's
/// endpoint gap exceeds 1e-9.
HolonomyRecord holonomy(const ConnectionChart& conn, const PathInBase& loop,
                        const GroupElement& g0, int n = 1024);

// ---- developing maps --------------------------------------------------------------

/// Development of the group's right evolution along an arbitrary base
/// path: Evol(phi(p'))(1) with unit start. (Same integrator as transport,
/// opposite sign convention: transport feeds -omega.)
GroupElement develop_along(const ConnectionChart& phi, const PathInBase& p,
                           int n = 1024);

/// The primitive f of a flat 1-form phi: f(x0) = e and delta^r f = phi,
/// realized by development along the axis-ordered staircase from x0
/// (axis 1 first, then axis 2, ...).
class DevelopingMap {
 public:
  DevelopingMap(ConnectionChart form, Vec x0, int segment_n);
  GroupElement operator()(const Vec& x) const;
  const ConnectionChart& form() const { return form_; }
  const Vec& basepoint() const { return x0_; }

 private:
  ConnectionChart form_;
  Vec x0_;
  int segment_n_;
};

/// Validates flatness of phi on the probe grid (sup |flatness_defect|
/// <= 1e-6; otherwise NotFlatError reporting the worst point), then
/// returns the staircase primitive based at x0.
DevelopingMap develop(const ConnectionChart& phi, const Vec& x0,
                      int probes_per_axis = 5, int segment_n = 256);

}  // namespace regulie
