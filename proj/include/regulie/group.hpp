#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "regulie/core.hpp"

namespace regulie {

class Group;
using GroupPtr = std::shared_ptr<const Group>;

/// An element of a concrete group. `value` is the group's storage form:
/// an n x n matrix for embedded matrix groups, an n-vector for (R^n,+)
/// and torus quotients, and a packed column for derived product groups.
struct GroupElement {
  GroupPtr owner;
  Mat value;
};

/// An algebra element is primarily a coefficient vector in the group's
/// fixed algebra basis; the matrix form is derived on demand.
struct AlgebraElement {
  GroupPtr owner;
  Vec coeffs;
  Mat matrix() const;
  double norm() const { return coeffs.norm(); }
};

/// How elements of a Group are stored.
enum class Realization { MatrixGroup, VectorGroup, PairGroup };

/// A concrete Lie group: storage shape, algebra basis, and the realization
/// of every structural operation. Instances are immutable after the builder
/// returns them and safe to share across threads.
class Group : public std::enable_shared_from_this<Group> {
 public:
  std::string name;
  int alg_dim = 0;
  int rows = 0, cols = 0;  // element storage shape
  Realization realization = Realization::MatrixGroup;
  bool abelian = false;
  bool simply_connected = false;
  double tolerance = 1e-9;

  std::vector<Mat> basis;  // alg_dim entries, each rows x cols (matrix form)
  Mat identity_value;

  // Structural operations on raw storage values / coefficient vectors.
  std::function<Mat(const Mat&, const Mat&)> mul_fn;
  std::function<Mat(const Mat&)> inv_fn;
  std::function<Mat(const Vec&)> exp_fn;                 // coeffs -> value
  std::function<Vec(const Mat&)> log_fn;                 // value -> coeffs
  std::function<double(const Mat&)> constraint_fn;       // residual, 0 on group
  std::function<double(const Mat&, const Mat&)> distance_fn;
  std::function<Mat(const Mat&)> ad_matrix_fn;           // value -> alg_dim x alg_dim
  std::function<Vec(const Vec&, const Vec&)> bracket_fn; // coeffs x coeffs -> coeffs
  std::function<Mat(const Vec&)> alg_to_mat_fn;          // coeffs -> matrix form
  std::function<Vec(const Mat&, double*)> mat_to_alg_fn; // matrix form -> coeffs (+resid)
  // Optional: lattice quotients map storage values to canonical representatives.
  std::function<Mat(const Mat&)> canonicalize_fn;

  std::vector<Mat> ad_basis;  // structure-constant matrices ad(e_i)

  // --- convenience wrappers on raw values ---
  Mat mul(const Mat& a, const Mat& b) const { return mul_fn(a, b); }
  Mat inv(const Mat& a) const { return inv_fn(a); }
  Mat exp_value(const Vec& c) const { return exp_fn(c); }
  Vec log_value(const Mat& a) const { return log_fn(a); }
  double constraint(const Mat& a) const { return constraint_fn(a); }
  double distance(const Mat& a, const Mat& b) const { return distance_fn(a, b); }
  Mat ad_matrix_of(const Mat& a) const { return ad_matrix_fn(a); }
  Vec bracket(const Vec& x, const Vec& y) const { return bracket_fn(x, y); }
  Mat alg_to_mat(const Vec& c) const { return alg_to_mat_fn(c); }
  Vec mat_to_alg(const Mat& m, double* resid = nullptr) const { return mat_to_alg_fn(m, resid); }

  /// ad(X) as an alg_dim x alg_dim matrix from the structure constants.
  Mat ad_of(const Vec& x) const;
};

// ---- element-level API -----------------------------------------------------

void require_same_owner(const GroupPtr& a, const GroupPtr& b, const char* op);

GroupElement make_element(GroupPtr g, Mat value);
AlgebraElement make_algebra(GroupPtr g, Vec coeffs);
GroupElement identity(const GroupPtr& g);
AlgebraElement zero_algebra(const GroupPtr& g);
AlgebraElement basis_element(const GroupPtr& g, int i);

GroupElement mul(const GroupElement& a, const GroupElement& b);
GroupElement inv(const GroupElement& a);
AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y);
/// Adjoint action of a on the algebra, as an alg_dim x alg_dim matrix.
Mat Ad(const GroupElement& a);
/// ad(X) = [X, .] as an alg_dim x alg_dim matrix.
Mat ad(const AlgebraElement& x);
GroupElement exp_g(const AlgebraElement& x);
AlgebraElement log_g(const GroupElement& a);
/// g.exp(tX) (left-invariant flow) or exp(tX).g (right-invariant flow).
GroupElement one_parameter_flow(const AlgebraElement& x, double t, Side side,
                                const GroupElement& g);
double distance(const GroupElement& a, const GroupElement& b);
double constraint(const GroupElement& a);

// ---- builders --------------------------------------------------------------

enum class ConstraintKind { Orthogonal, SpecialLinear, UnipotentPattern, None };

struct MatrixGroupConfig {
  std::string name;
  int mat_size = 0;
  std::vector<Mat> basis;
  ConstraintKind constraint = ConstraintKind::None;
  bool abelian = false;
  bool simply_connected = false;
  double tolerance = 1e-9;
  // Optional closed forms; generic scaling-and-squaring / inverse routines
  // are used when absent.
  std::function<Mat(const Vec&)> exp_override;
  std::function<Vec(const Mat&)> log_override;
  std::function<Mat(const Mat&)> inv_override;
  std::function<double(const Mat&)> constraint_override;
};

/// Build an embedded matrix group. Validates basis independence, the
/// closure of commutators in the basis span (residual <= 1e-12), and
/// constraint(identity) = 0; throws ConstructionError otherwise.
GroupPtr make_matrix_group(MatrixGroupConfig cfg);

/// (R^n,+) or the torus R^n/Z^n; `lattice` selects the quotient. Torus
/// representatives are canonicalized to [0,1)^n and compared mod Z^n.
GroupPtr make_vector_group(const std::string& name, int dim, bool lattice,
                           bool simply_connected);

// ---- generic matrix helpers shared by builders -----------------------------

/// Scaling-and-squaring exponential of a square matrix (dense, any size).
Mat generic_matrix_exp(const Mat& m);
/// Principal matrix logarithm; throws BranchError when the result is not
/// finite or fails to reproduce the input under exp.
Mat generic_matrix_log(const Mat& m);

}  // namespace regulie
