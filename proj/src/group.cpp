#include "regulie/group.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <sstream>

namespace regulie {

namespace {

Eigen::Map<const Vec> vectorize(const Mat& m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

// Shared least-squares frame for expressing matrices in an algebra basis.
struct BasisFrame {
  int rows = 0, cols = 0;
  std::vector<Mat> basis;
  Mat b;  // (rows*cols) x dim, columns are vectorized basis matrices
  Eigen::CompleteOrthogonalDecomposition<Mat> cod;

  explicit BasisFrame(const std::vector<Mat>& basis_in) : basis(basis_in) {
    rows = static_cast<int>(basis.at(0).rows());
    cols = static_cast<int>(basis.at(0).cols());
    b.resize(rows * cols, static_cast<int>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (basis[i].rows() != rows || basis[i].cols() != cols)
        throw ConstructionError("algebra basis matrices have inconsistent shapes");
      b.col(static_cast<int>(i)) = vectorize(basis[i]);
    }
    cod.compute(b);
  }

  Mat to_mat(const Vec& c) const {
    Mat m = Mat::Zero(rows, cols);
    for (std::size_t i = 0; i < basis.size(); ++i) m += c[static_cast<int>(i)] * basis[i];
    return m;
  }

  Vec to_coeffs(const Mat& m, double* resid) const {
    Vec c = cod.solve(vectorize(m));
    if (resid) *resid = (b * c - vectorize(m)).norm();
    return c;
  }
};

double frobenius(const Mat& a, const Mat& b) { return (a - b).norm(); }

Mat wrap_unit(const Mat& v) {
  Mat out = v;
  for (int i = 0; i < out.size(); ++i) out(i) -= std::floor(out(i));
  return out;
}

Mat wrap_half(const Mat& v) {
  Mat out = v;
  for (int i = 0; i < out.size(); ++i) out(i) -= std::floor(out(i) + 0.5);
  return out;
}

}  // namespace

Mat AlgebraElement::matrix() const { return owner->alg_to_mat(coeffs); }

Mat Group::ad_of(const Vec& x) const {
  Mat m = Mat::Zero(alg_dim, alg_dim);
  for (int i = 0; i < alg_dim; ++i) m += x[i] * ad_basis[i];
  return m;
}

void require_same_owner(const GroupPtr& a, const GroupPtr& b, const char* op) {
  if (!a || !b) throw OwnerMismatchError(std::string(op) + ": element without owner");
  if (a.get() != b.get() && a->name != b->name)
    throw OwnerMismatchError(std::string(op) + ": owners differ (" + a->name + " vs " +
                             b->name + ")");
}

GroupElement make_element(GroupPtr g, Mat value) {
  if (!g) throw OwnerMismatchError("make_element: null group");
  if (value.rows() != g->rows || value.cols() != g->cols)
    throw IntegrityError("make_element: wrong storage shape for group " + g->name);
  if (!value.allFinite()) throw NumericError("make_element: non-finite entries");
  // Lattice-type groups canonicalize their representatives.
  if (g->canonicalize_fn) value = g->canonicalize_fn(value);
  double c = g->constraint(value);
  if (c > g->tolerance) {
    std::ostringstream os;
    os << "make_element: constraint residual " << c << " exceeds tolerance "
       << g->tolerance << " on group " << g->name;
    throw IntegrityError(os.str());
  }
  return GroupElement{std::move(g), std::move(value)};
}

AlgebraElement make_algebra(GroupPtr g, Vec coeffs) {
  if (!g) throw OwnerMismatchError("make_algebra: null group");
  if (coeffs.size() != g->alg_dim)
    throw IntegrityError("make_algebra: wrong coefficient count for group " + g->name);
  if (!coeffs.allFinite()) throw NumericError("make_algebra: non-finite coefficients");
  return AlgebraElement{std::move(g), std::move(coeffs)};
}

GroupElement identity(const GroupPtr& g) { return GroupElement{g, g->identity_value}; }

AlgebraElement zero_algebra(const GroupPtr& g) {
  return AlgebraElement{g, Vec::Zero(g->alg_dim)};
}

AlgebraElement basis_element(const GroupPtr& g, int i) {
  Vec c = Vec::Zero(g->alg_dim);
  c[i] = 1.0;
  return AlgebraElement{g, std::move(c)};
}

GroupElement mul(const GroupElement& a, const GroupElement& b) {
  require_same_owner(a.owner, b.owner, "mul");
  return GroupElement{a.owner, a.owner->mul(a.value, b.value)};
}

GroupElement inv(const GroupElement& a) {
  return GroupElement{a.owner, a.owner->inv(a.value)};
}

AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y) {
  require_same_owner(x.owner, y.owner, "bracket");
  return AlgebraElement{x.owner, x.owner->bracket(x.coeffs, y.coeffs)};
}

Mat Ad(const GroupElement& a) { return a.owner->ad_matrix_of(a.value); }

Mat ad(const AlgebraElement& x) { return x.owner->ad_of(x.coeffs); }

GroupElement exp_g(const AlgebraElement& x) {
  return GroupElement{x.owner, x.owner->exp_value(x.coeffs)};
}

AlgebraElement log_g(const GroupElement& a) {
  return AlgebraElement{a.owner, a.owner->log_value(a.value)};
}

GroupElement one_parameter_flow(const AlgebraElement& x, double t, Side side,
                                const GroupElement& g) {
  require_same_owner(x.owner, g.owner, "one_parameter_flow");
  GroupElement step{x.owner, x.owner->exp_value(Vec(t * x.coeffs))};
  return side == Side::Right ? mul(step, g) : mul(g, step);
}

double distance(const GroupElement& a, const GroupElement& b) {
  require_same_owner(a.owner, b.owner, "distance");
  return a.owner->distance(a.value, b.value);
}

double constraint(const GroupElement& a) { return a.owner->constraint(a.value); }

// ---- generic dense-matrix exp/log ------------------------------------------

Mat generic_matrix_exp(const Mat& m) { return m.exp(); }

Mat generic_matrix_log(const Mat& m) {
  Mat l = m.log();
  if (!l.allFinite())
    throw BranchError("matrix log: non-finite result (eigenvalue on the branch cut)");
  double rec = (l.exp() - m).norm();
  if (rec > 1e-8 * std::max(1.0, m.norm()))
    throw BranchError("matrix log: exp(log(a)) fails to reproduce a (outside principal branch)");
  return l;
}

// ---- matrix-group builder ---------------------------------------------------

GroupPtr make_matrix_group(MatrixGroupConfig cfg) {
  if (cfg.mat_size <= 0) throw ConstructionError("make_matrix_group: mat_size must be positive");
  if (cfg.basis.empty()) throw ConstructionError("make_matrix_group: empty algebra basis");
  const int n = cfg.mat_size;
  const int d = static_cast<int>(cfg.basis.size());
  for (const Mat& e : cfg.basis)
    if (e.rows() != n || e.cols() != n)
      throw ConstructionError("make_matrix_group: basis matrix shape mismatch");

  auto frame = std::make_shared<const BasisFrame>(cfg.basis);
  if (frame->cod.rank() < d)
    throw ConstructionError("make_matrix_group: algebra basis is linearly dependent");

  auto g = std::make_shared<Group>();
  g->name = cfg.name;
  g->alg_dim = d;
  g->rows = g->cols = n;
  g->realization = Realization::MatrixGroup;
  g->abelian = cfg.abelian;
  g->simply_connected = cfg.simply_connected;
  g->tolerance = cfg.tolerance;
  g->basis = cfg.basis;
  g->identity_value = Mat::Identity(n, n);

  g->alg_to_mat_fn = [frame](const Vec& c) { return frame->to_mat(c); };
  g->mat_to_alg_fn = [frame](const Mat& m, double* r) { return frame->to_coeffs(m, r); };

  g->mul_fn = [](const Mat& a, const Mat& b) { return Mat(a * b); };

  if (cfg.inv_override) {
    g->inv_fn = cfg.inv_override;
  } else {
    g->inv_fn = [](const Mat& a) {
      Eigen::FullPivLU<Mat> lu(a);
      if (!lu.isInvertible()) throw NumericError("inv: singular matrix");
      return Mat(lu.inverse());
    };
  }

  if (cfg.exp_override) {
    g->exp_fn = cfg.exp_override;
  } else {
    g->exp_fn = [frame](const Vec& c) { return generic_matrix_exp(frame->to_mat(c)); };
  }

  if (cfg.log_override) {
    g->log_fn = cfg.log_override;
  } else {
    g->log_fn = [frame](const Mat& a) {
      double resid = 0.0;
      Vec c = frame->to_coeffs(generic_matrix_log(a), &resid);
      if (resid > 1e-8)
        throw BranchError("log: principal logarithm lies outside the algebra span");
      return c;
    };
  }

  if (cfg.constraint_override) {
    g->constraint_fn = cfg.constraint_override;
  } else {
    switch (cfg.constraint) {
      case ConstraintKind::Orthogonal:
        g->constraint_fn = [n](const Mat& a) {
          return (a.transpose() * a - Mat::Identity(n, n)).norm() +
                 std::abs(a.determinant() - 1.0);
        };
        break;
      case ConstraintKind::SpecialLinear:
        g->constraint_fn = [](const Mat& a) { return std::abs(a.determinant() - 1.0); };
        break;
      case ConstraintKind::UnipotentPattern:
        g->constraint_fn = [n](const Mat& a) {
          double r = 0.0;
          for (int i = 0; i < n; ++i) {
            r += std::abs(a(i, i) - 1.0);
            for (int j = 0; j < i; ++j) r += std::abs(a(i, j));
          }
          return r;
        };
        break;
      case ConstraintKind::None:
        g->constraint_fn = [](const Mat& a) {
          return a.allFinite() ? 0.0 : std::numeric_limits<double>::infinity();
        };
        break;
    }
  }

  g->distance_fn = frobenius;

  const double closure_tol = std::max(1e-9, cfg.tolerance);
  g->ad_matrix_fn = [frame, d, inv = g->inv_fn](const Mat& a) {
    Mat ainv = inv(a);
    Mat out(d, d);
    for (int j = 0; j < d; ++j) {
      double resid = 0.0;
      out.col(j) = frame->to_coeffs(a * frame->basis[static_cast<std::size_t>(j)] * ainv, &resid);
      if (resid > 1e-6)
        throw ClosureError("Ad: conjugated basis element left the algebra span");
    }
    return out;
  };

  g->bracket_fn = [frame, closure_tol](const Vec& x, const Vec& y) {
    Mat xm = frame->to_mat(x), ym = frame->to_mat(y);
    double resid = 0.0;
    Vec c = frame->to_coeffs(xm * ym - ym * xm, &resid);
    if (resid > closure_tol)
      throw ClosureError("bracket: commutator left the algebra span (wrong GroupSpec?)");
    return c;
  };

  // Validate constraint(identity) = 0 and commutator closure; freeze the
  // structure constants.
  if (g->constraint_fn(g->identity_value) > 1e-12)
    throw ConstructionError("make_matrix_group: constraint(identity) != 0");
  g->ad_basis.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    Mat ci(d, d);
    for (int j = 0; j < d; ++j) {
      Mat comm = cfg.basis[static_cast<std::size_t>(i)] * cfg.basis[static_cast<std::size_t>(j)] -
                 cfg.basis[static_cast<std::size_t>(j)] * cfg.basis[static_cast<std::size_t>(i)];
      double resid = 0.0;
      ci.col(j) = frame->to_coeffs(comm, &resid);
      if (resid > 1e-12)
        throw ConstructionError(
            "make_matrix_group: commutator of basis pair leaves the span (residual > 1e-12)");
    }
    g->ad_basis[static_cast<std::size_t>(i)] = ci;
  }

  return g;
}

// ---- vector-group builder ---------------------------------------------------

GroupPtr make_vector_group(const std::string& name, int dim, bool lattice,
                           bool simply_connected) {
  if (dim <= 0) throw ConstructionError("make_vector_group: dimension must be positive");
  auto g = std::make_shared<Group>();
  g->name = name;
  g->alg_dim = dim;
  g->rows = dim;
  g->cols = 1;
  g->realization = Realization::VectorGroup;
  g->abelian = true;
  g->simply_connected = simply_connected;
  g->identity_value = Mat::Zero(dim, 1);
  g->basis.reserve(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    Mat e = Mat::Zero(dim, 1);
    e(i, 0) = 1.0;
    g->basis.push_back(e);
  }

  if (lattice) {
    g->canonicalize_fn = [](const Mat& v) { return wrap_unit(v); };
    g->mul_fn = [](const Mat& a, const Mat& b) { return wrap_unit(a + b); };
    g->inv_fn = [](const Mat& a) { return wrap_unit(-a); };
    g->exp_fn = [dim](const Vec& c) { return wrap_unit(Mat(Eigen::Map<const Mat>(c.data(), dim, 1))); };
    // Principal branch: the representative of smallest norm, in [-1/2, 1/2)^n.
    g->log_fn = [](const Mat& a) { return Vec(vectorize(wrap_half(a))); };
    g->distance_fn = [](const Mat& a, const Mat& b) { return wrap_half(a - b).norm(); };
  } else {
    g->mul_fn = [](const Mat& a, const Mat& b) { return Mat(a + b); };
    g->inv_fn = [](const Mat& a) { return Mat(-a); };
    g->exp_fn = [dim](const Vec& c) { return Mat(Eigen::Map<const Mat>(c.data(), dim, 1)); };
    g->log_fn = [](const Mat& a) { return Vec(vectorize(a)); };
    g->distance_fn = frobenius;
  }

  g->constraint_fn = [](const Mat& a) {
    return a.allFinite() ? 0.0 : std::numeric_limits<double>::infinity();
  };
  g->ad_matrix_fn = [dim](const Mat&) { return Mat(Mat::Identity(dim, dim)); };
  g->bracket_fn = [dim](const Vec&, const Vec&) { return Vec(Vec::Zero(dim)); };
  g->alg_to_mat_fn = [dim](const Vec& c) { return Mat(Eigen::Map<const Mat>(c.data(), dim, 1)); };
  g->mat_to_alg_fn = [](const Mat& m, double* r) {
    if (r) *r = 0.0;
    return Vec(vectorize(m));
  };
  g->ad_basis.assign(static_cast<std::size_t>(dim), Mat::Zero(dim, dim));
  return g;
}

}  // namespace regulie
