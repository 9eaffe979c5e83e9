#pragma once

#include <utility>
#include <vector>

#include "regulie/curves.hpp"
#include "regulie/evolution.hpp"
#include "regulie/group.hpp"

namespace regulie {

/// A linear map between Lie algebras, written as a matrix in the owners'
/// fixed bases (target dimension x source dimension).
struct AlgebraHom {
  GroupPtr source;
  GroupPtr target;
  Mat matrix;
  AlgebraElement apply(const AlgebraElement& x) const;
};

/// Validates the shape and the bracket condition f[x,y] = [f x, f y] on all
/// source basis pairs (tolerance 1e-10); throws InvalidHomError otherwise.
AlgebraHom make_algebra_hom(GroupPtr source, GroupPtr target, Mat matrix);

AlgebraHom identity_hom(const GroupPtr& g);

/// The double-cover differential su(2) -> so(3): basis-to-basis identity in
/// the catalog bases (both satisfy [e1,e2] = e3 cyclically).
AlgebraHom su2_to_so3_hom();

/// Endpoint of the target evolution driven by the mapped generator:
/// evol_target(f . xi). When xi is the right logarithmic derivative of a
/// source path from e, this is the image of the path's endpoint under the
/// integrated homomorphism, for any choice of path.
GroupElement hom_along(const AlgebraHom& f, const AlgebraCurve& xi, int n = 1024);

/// The Lie group homomorphism F with T_e F = f on a simply connected
/// source, evaluated through canonical generator paths.
class GroupHom {
 public:
  explicit GroupHom(AlgebraHom f);
  const AlgebraHom& differential() const { return f_; }

  /// Radial evaluation F(g) = exp(f(log g)). Outside the log branch, g is
  /// factored as a . exp(Y) with both factors branch-safe (deterministic
  /// seeded search) and F extends multiplicatively over the factors.
  GroupElement operator()(const GroupElement& g) const;

  /// Two-leg evaluation: split log g into the leading half of its basis
  /// coordinates and the remainder, then compose the two radial images.
  /// Agreement with operator() witnesses path-choice independence.
  GroupElement via_staircase(const GroupElement& g) const;

 private:
  AlgebraHom f_;
};

/// Throws PreconditionError unless the source is flagged simply connected.
GroupHom integrate_hom(const AlgebraHom& f);

/// Max over the sample pairs of distance(F(a b), F(a) F(b)).
double homomorphism_residual(
    const GroupHom& F,
    const std::vector<std::pair<GroupElement, GroupElement>>& pairs);

/// T_e F recovered by central differences along exp(eps e_i).
Mat differential_by_differences(const GroupHom& F, double eps = 1e-5);

/// Closed-form double cover oracle: the rotation matrix of the unit
/// quaternion stored in a catalog su2 element.
GroupElement rotation_of_quaternion(const GroupElement& q, const GroupPtr& so3);

}  // namespace regulie
