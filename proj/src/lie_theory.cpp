#include "regulie/lie_theory.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "regulie/catalog.hpp"

namespace regulie {

namespace {

void require_hom(const AlgebraHom& f, const char* who) {
  if (!f.source || !f.target)
    throw UsageError(std::string(who) + ": homomorphism is missing an algebra");
  if (f.matrix.rows() != f.target->alg_dim || f.matrix.cols() != f.source->alg_dim)
    throw UsageError(std::string(who) + ": homomorphism matrix has wrong shape");
}

}  // namespace

AlgebraElement AlgebraHom::apply(const AlgebraElement& x) const {
  require_same_owner(source, x.owner, "homomorphism");
  return make_algebra(target, Vec(matrix * x.coeffs));
}

AlgebraHom make_algebra_hom(GroupPtr source, GroupPtr target, Mat matrix) {
  AlgebraHom f{std::move(source), std::move(target), std::move(matrix)};
  require_hom(f, "homomorphism");
  const int d = f.source->alg_dim;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Vec ei = Vec::Zero(d), ej = Vec::Zero(d);
      ei[i] = 1.0;
      ej[j] = 1.0;
      Vec lhs = f.matrix * f.source->bracket(ei, ej);
      Vec rhs = f.target->bracket(Vec(f.matrix * ei), Vec(f.matrix * ej));
      if ((lhs - rhs).norm() > 1e-10)
        throw InvalidHomError(
            "homomorphism: bracket condition fails on basis pair (" +
            std::to_string(i) + ", " + std::to_string(j) + "), defect " +
            std::to_string((lhs - rhs).norm()));
    }
  return f;
}

AlgebraHom identity_hom(const GroupPtr& g) {
  return make_algebra_hom(g, g, Mat(Mat::Identity(g->alg_dim, g->alg_dim)));
}

AlgebraHom su2_to_so3_hom() {
  return make_algebra_hom(find_group("su2"), find_group("so3"),
                          Mat(Mat::Identity(3, 3)));
}

GroupElement hom_along(const AlgebraHom& f, const AlgebraCurve& xi, int n) {
  require_hom(f, "homomorphism");
  require_same_owner(f.source, xi.owner, "homomorphism");
  Mat m = f.matrix;
  auto ev = xi.eval;
  AlgebraCurve mapped =
      curve_from_function(f.target, [m, ev](double t) { return Vec(m * ev(t)); });
  return evol(mapped, Side::Right, n);
}

GroupHom::GroupHom(AlgebraHom f) : f_(std::move(f)) {
  require_hom(f_, "homomorphism");
}

GroupElement GroupHom::operator()(const GroupElement& g) const {
  require_same_owner(f_.source, g.owner, "homomorphism");
  try {
    return exp_g(f_.apply(log_g(g)));
  } catch (const BranchError&) {
    // Factor g = (g exp(-Y)) exp(Y) with a deterministic search over seeded
    // directions until both factors admit principal logarithms; F extends
    // multiplicatively over the factors.
  }
  const int d = f_.source->alg_dim;
  for (int attempt = 1; attempt <= 64; ++attempt) {
    std::mt19937_64 rng = check_stream(static_cast<std::uint64_t>(attempt),
                                       "hom-branch:" + f_.source->name);
    AlgebraElement y = make_algebra(f_.source, random_coeffs(rng, d, 1.5));
    GroupElement rest = mul(g, inv(exp_g(y)));
    try {
      AlgebraElement la = log_g(rest);
      return mul(exp_g(f_.apply(la)), exp_g(f_.apply(y)));
    } catch (const BranchError&) {
      continue;
    }
  }
  throw BranchError(
      "homomorphism: found no branch-safe factorization of the argument");
}

GroupElement GroupHom::via_staircase(const GroupElement& g) const {
  require_same_owner(f_.source, g.owner, "homomorphism");
  AlgebraElement x = log_g(g);
  const int d = f_.source->alg_dim;
  const int head = (d + 1) / 2;
  Vec lead = x.coeffs;
  lead.tail(d - head).setZero();
  GroupElement m = exp_g(make_algebra(f_.source, lead));
  AlgebraElement rest = log_g(mul(g, inv(m)));
  return mul(exp_g(f_.apply(rest)), exp_g(f_.apply(make_algebra(f_.source, lead))));
}

GroupHom integrate_hom(const AlgebraHom& f) {
  require_hom(f, "homomorphism");
  if (!f.source->simply_connected)
    throw PreconditionError(
        "homomorphism integration needs a simply connected source; '" +
        f.source->name + "' is not flagged as one");
  return GroupHom(f);
}

double homomorphism_residual(
    const GroupHom& F,
    const std::vector<std::pair<GroupElement, GroupElement>>& pairs) {
  double worst = 0.0;
  for (const auto& [a, b] : pairs)
    worst = std::max(worst, distance(F(mul(a, b)), mul(F(a), F(b))));
  return worst;
}

Mat differential_by_differences(const GroupHom& F, double eps) {
  const GroupPtr& src = F.differential().source;
  const GroupPtr& tgt = F.differential().target;
  Mat out(tgt->alg_dim, src->alg_dim);
  for (int i = 0; i < src->alg_dim; ++i) {
    Vec step = Vec::Zero(src->alg_dim);
    step[i] = eps;
    Vec plus = log_g(F(exp_g(make_algebra(src, step)))).coeffs;
    Vec minus = log_g(F(exp_g(make_algebra(src, Vec(-step))))).coeffs;
    out.col(i) = (plus - minus) / (2.0 * eps);
  }
  return out;
}

GroupElement rotation_of_quaternion(const GroupElement& q, const GroupPtr& so3) {
  if (!q.owner || q.owner->name != "su2")
    throw UsageError("double cover: the argument must be a catalog su2 element");
  Eigen::Vector4d c = q.value.col(0);
  c /= c.norm();
  const double w = c[0];
  Eigen::Vector3d v = c.tail<3>();
  Mat k(3, 3);
  k << 0, -v[2], v[1], v[2], 0, -v[0], -v[1], v[0], 0;
  Mat r = Mat::Identity(3, 3) + 2.0 * w * k + 2.0 * k * k;
  return make_element(so3, r);
}

}  // namespace regulie
