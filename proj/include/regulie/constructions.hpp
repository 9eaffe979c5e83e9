#pragma once

#include <functional>
#include <string>
#include <utility>

#include "regulie/core.hpp"
#include "regulie/curves.hpp"
#include "regulie/evolution.hpp"
#include "regulie/group.hpp"

namespace regulie {

// ---- product-type groups (packed-column realization) ------------------------

/// Component groups of a packed pair group (first = normal factor K,
/// second = acting factor H). Valid for any group built by
/// semidirect_group / extension_group / tangent_group.
struct PairParts {
  GroupPtr k;
  GroupPtr h;
};

/// Component groups of a pair group; throws UsageError when `pair` was not
/// built by one of the pair-group builders in this header.
const PairParts& pair_parts(const GroupPtr& pair);

/// Pack component elements (k, h) into a pair-group element.
GroupElement pair_element(const GroupPtr& pair, const GroupElement& k,
                          const GroupElement& h);
/// Split a pair-group element into its (k, h) components.
std::pair<GroupElement, GroupElement> split_element(const GroupElement& g);
/// Pack component algebra elements (u, y) into a pair-group algebra element.
AlgebraElement pair_algebra(const GroupPtr& pair, const AlgebraElement& u,
                            const AlgebraElement& y);
/// Split a pair-group algebra element into its (u, y) components.
std::pair<AlgebraElement, AlgebraElement> split_algebra(const AlgebraElement& x);

// ---- semidirect products -----------------------------------------------------

/// Data for K x| H: H acts on K by automorphisms alpha_h.
struct SemidirectSpec {
  GroupPtr k;
  GroupPtr h;
  /// alpha: (h, k) -> alpha_h(k), an automorphism of K for each h.
  std::function<GroupElement(const GroupElement&, const GroupElement&)> action;
  /// Tangent of alpha_h at the unit of K, as a dim(K) x dim(K) matrix
  /// acting on algebra coefficients.
  std::function<Mat(const GroupElement&)> action_tangent;
  /// Optional: rho(Y) = d/ds action_tangent(exp(sY)) at s = 0 (the induced
  /// algebra action). A central-difference default is used when absent.
  std::function<Mat(const AlgebraElement&)> action_algebra;
  std::string name = "semidirect";
};

/// Build K x| H with product (k1,h1)(k2,h2) = (k1 alpha_{h1}(k2), h1 h2) and
/// inverse (k,h)^{-1} = (alpha_{h^{-1}}(k)^{-1}, h^{-1}). Validates on random
/// samples that alpha_e = id and alpha_{h1 h2} = alpha_{h1} alpha_{h2}
/// (residual <= 1e-10); throws ConstructionError otherwise. A closed-form
/// exponential is realized when the action is trivial (direct product) or K
/// is a vector group; other combinations are rejected.
GroupPtr semidirect_group(const SemidirectSpec& spec);

/// Solve delta^r g = (u, y) on K x| H in stages: h = Evol_H(y),
/// z(t) = action_tangent(h(t)^{-1}) u(t), k = Evol_K(z), and assemble
/// g(t) = (alpha_{h(t)}(k(t)), h(t)). `pair` may pass a group previously
/// returned by semidirect_group(spec); it is rebuilt when absent.
EvolutionResult evolve_semidirect(const SemidirectSpec& spec,
                                  const AlgebraCurve& u, const AlgebraCurve& y,
                                  int n = 1024, GroupPtr pair = nullptr);

/// R^3 x| SO(3): the Euclidean group realized as a pair group.
SemidirectSpec euclidean3_semidirect_spec();

/// Map a euclidean3 pair element (v, R) to the 4x4 homogeneous-matrix model
/// [[R, v], [0, 1]] as an element of the given matrix group.
GroupElement homogeneous_model_of(const GroupElement& pair_elt,
                                  const GroupPtr& matrix_model);

// ---- tangent groups ----------------------------------------------------------

/// The tangent group of G: (g, +) x| G with the adjoint action,
/// mu((X,g),(Y,h)) = (X + Ad(g) Y, g h).
SemidirectSpec tangent_group_spec(const GroupPtr& g);
GroupPtr tangent_group(const GroupPtr& g);

// ---- abelian extensions ------------------------------------------------------

/// Data for K x_c H: K an abelian vector group, alpha an action of H on K by
/// linear automorphisms, and c a smooth 2-cocycle with c(e, e) = 0.
struct ExtensionSpec {
  GroupPtr k;
  GroupPtr h;
  /// alpha: (h, k) -> alpha_h(k); identity when absent (central extension).
  std::function<GroupElement(const GroupElement&, const GroupElement&)> action;
  /// Tangent of alpha_h; identity when absent.
  std::function<Mat(const GroupElement&)> action_tangent;
  /// Optional induced algebra action rho; central-difference default.
  std::function<Mat(const AlgebraElement&)> action_algebra;
  /// c: H x H -> K.
  std::function<GroupElement(const GroupElement&, const GroupElement&)> cocycle;
  /// When true, c is bilinear in the charts of H and K (both vector groups)
  /// and its derivatives are evaluated exactly; otherwise central
  /// differences with step 1e-4 .. 1e-6 are used.
  bool bilinear_cocycle = false;
  std::string name = "extension";
};

/// Build K x_c H with product (k1,h1)(k2,h2) = (k1 + alpha_{h1} k2 + c(h1,h2),
/// h1 h2) and inverse (k,h)^{-1} = (-alpha_{h^{-1}}(k) - c(h^{-1}, h), h^{-1}).
/// Validates that K is a vector group, c(e,e) = 0, the cocycle identity
/// alpha_{h1} c(h2,h3) - c(h1 h2, h3) + c(h1, h2 h3) - c(h1, h2) = 0 on random
/// triples (residual <= 1e-10), and group axioms on random samples; throws
/// ConstructionError otherwise.
GroupPtr extension_group(const ExtensionSpec& spec);

/// Solve delta^r g = (u, y) on K x_c H in stages: h = Evol_H(y),
/// z(t) = action_tangent(h(t)^{-1}) (u(t) + D1 c(e, h(t)) y(t)),
/// k = Evol_K(z) = int z, and assemble g(t) = (alpha_{h(t)}(k(t)), h(t)).
EvolutionResult evolve_extension(const ExtensionSpec& spec,
                                 const AlgebraCurve& u, const AlgebraCurve& y,
                                 int n = 1024, GroupPtr pair = nullptr);

/// R x_c R^2 with c((x1,y1),(x2,y2)) = (x1 y2 - y1 x2) / 2: the Heisenberg
/// group as a central extension.
ExtensionSpec heisenberg_extension_spec();

/// Chart isomorphism from the heisenberg extension onto the 3x3 unipotent
/// matrix model: (z, (x, y)) -> value with entries (x, y, z + x y / 2).
GroupElement heisenberg_model_of(const GroupElement& pair_elt,
                                 const GroupPtr& matrix_model);

// ---- the convolution group on curves ----------------------------------------

/// An element of the convolution group (C^inf([0,1], g), *) over a base
/// group: a curve X with the cached data needed by the product,
/// X * Y (t) = X(t) + Ad(Evol(X)(t)) Y(t). The evolution path, the adjoint
/// splines and the running integral are computed once per element on a
/// uniform grid.
class ConvolutionElement {
 public:
  ConvolutionElement(GroupPtr base, AlgebraCurve x, int grid_n = 512);

  const GroupPtr& base() const { return base_; }
  const AlgebraCurve& curve() const { return x_; }
  int grid_n() const { return n_; }
  Vec operator()(double t) const { return x_.eval(t); }

  /// Evol^r(X), sampled on the element grid.
  const GroupPath& evol_path() const { return path_; }
  /// Ad(Evol(X)(t)) via the cached spline.
  Mat ad_evol(double t) const { return ad_(t); }
  /// Ad(Evol(X)(t)^{-1}) via the cached spline.
  Mat ad_evol_inv(double t) const { return ad_inv_(t); }
  /// int_0^t X(v) dv via the cached spline.
  Vec running_integral(double t) const { return run_(t); }

 private:
  GroupPtr base_;
  AlgebraCurve x_;
  int n_;
  GroupPath path_;
  MatrixSpline ad_;
  MatrixSpline ad_inv_;
  VectorSpline run_;
};

ConvolutionElement conv_element(const GroupPtr& base, const AlgebraCurve& x,
                                int grid_n = 512);

/// (X * Y)(t) = X(t) + Ad(Evol(X)(t)) Y(t).
ConvolutionElement conv_mul(const ConvolutionElement& x,
                            const ConvolutionElement& y);
/// X^{-1}(t) = -Ad(Evol(X)(t)^{-1}) X(t).
ConvolutionElement conv_inv(const ConvolutionElement& x);
/// Lie bracket of the convolution group:
/// [X, Y](t) = [int_0^t X, Y(t)] + [X(t), int_0^t Y].
AlgebraCurve conv_bracket(const GroupPtr& base, const AlgebraCurve& x,
                          const AlgebraCurve& y, int grid_n = 512);
/// Adjoint action of the convolution group:
/// (Ad(X) Y)(t) = Ad(Evol(X)(t)) Y(t) - [Ad(Evol(X)(t)) int_0^t Y, X(t)].
AlgebraCurve conv_ad(const ConvolutionElement& x, const AlgebraCurve& y);

/// Right evolution in the convolution group of the algebra curve
/// t -> field(t, .): returns g(1, .) where
/// g(t, s) = Ad(E_s(t)) int_0^t Ad(E_s(v)^{-1}) field(v, s) dv with
/// E_s = Evol^r(Y_s) and Y_s(t) = int_0^s field(t, u) du.
ConvolutionElement conv_evolve(const GroupPtr& base,
                               const std::function<Vec(double, double)>& field,
                               int s_samples = 33, int n = 512);

/// Sup over an n_grid x n_grid grid of the residual of the defining ODE
/// d/dt g(t, s) = field(t, s) + [Y_s(t), g(t, s)], g(0, .) = 0.
double conv_evolve_ode_residual(const GroupPtr& base,
                                const std::function<Vec(double, double)>& field,
                                int n_grid = 32, int n = 512);

}  // namespace regulie
