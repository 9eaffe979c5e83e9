#include "regulie/constructions.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "regulie/catalog.hpp"

namespace regulie {

namespace {

// ---- packed-column layout ---------------------------------------------------

Mat pack_values(const Mat& kv, const Mat& hv) {
  Mat out(kv.size() + hv.size(), 1);
  int at = 0;
  for (int r = 0; r < kv.rows(); ++r)
    for (int c = 0; c < kv.cols(); ++c) out(at++, 0) = kv(r, c);
  for (int r = 0; r < hv.rows(); ++r)
    for (int c = 0; c < hv.cols(); ++c) out(at++, 0) = hv(r, c);
  return out;
}

struct Slicer {
  int kr = 0, kc = 0, hr = 0, hc = 0;
  Slicer() = default;
  Slicer(const GroupPtr& k, const GroupPtr& h)
      : kr(k->rows), kc(k->cols), hr(h->rows), hc(h->cols) {}

  Mat k(const Mat& packed) const {
    Mat out(kr, kc);
    int at = 0;
    for (int r = 0; r < kr; ++r)
      for (int c = 0; c < kc; ++c) out(r, c) = packed(at++, 0);
    return out;
  }
  Mat h(const Mat& packed) const {
    Mat out(hr, hc);
    int at = kr * kc;
    for (int r = 0; r < hr; ++r)
      for (int c = 0; c < hc; ++c) out(r, c) = packed(at++, 0);
    return out;
  }
};

// ---- registry of pair groups -------------------------------------------------

struct PairRecord {
  GroupPtr self;  // keeps the keyed pointer alive for the process lifetime
  PairParts parts;
};

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<const Group*, PairRecord>& registry() {
  static std::map<const Group*, PairRecord> r;
  return r;
}

void register_pair(const GroupPtr& pair, PairParts parts) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[pair.get()] = PairRecord{pair, std::move(parts)};
}

// ---- shared op adapters -------------------------------------------------------

// Value-level ops derived from a SemidirectSpec / ExtensionSpec.
struct PairOps {
  GroupPtr k, h;
  int dk = 0, dh = 0;
  std::function<Mat(const Mat&, const Mat&)> act;  // (h value, k value) -> k value
  std::function<Mat(const Mat&)> act_tan;          // h value -> dk x dk
  std::function<Mat(const Vec&)> rho;              // y coeffs -> dk x dk
  // Extension-only pieces (empty for plain semidirect products):
  std::function<Mat(const Mat&, const Mat&)> coc;  // (h1 value, h2 value) -> k value
  std::function<Vec(const Vec&, const Mat&)> d1c;  // d/ds c(exp(s y), h) at s = 0
  std::function<Vec(const Vec&, const Vec&)> gamma;  // cocycle part of the bracket
  std::function<Vec(const Vec&)> wcorr;              // cocycle part of exp
};

GroupElement random_component(std::mt19937_64& rng, const GroupPtr& g,
                              double scale) {
  return exp_g(make_algebra(g, random_coeffs(rng, g->alg_dim, scale)));
}

PairOps base_ops(const GroupPtr& k, const GroupPtr& h,
                 const std::function<GroupElement(const GroupElement&,
                                                  const GroupElement&)>& action,
                 const std::function<Mat(const GroupElement&)>& action_tangent,
                 const std::function<Mat(const AlgebraElement&)>& action_algebra) {
  PairOps ops;
  ops.k = k;
  ops.h = h;
  ops.dk = k->alg_dim;
  ops.dh = h->alg_dim;
  if (action) {
    ops.act = [k, h, action](const Mat& hv, const Mat& kv) {
      GroupElement out = action(GroupElement{h, hv}, GroupElement{k, kv});
      require_same_owner(out.owner, k, "pair group action");
      return out.value;
    };
  } else {
    ops.act = [](const Mat&, const Mat& kv) { return kv; };
  }
  if (action_tangent) {
    ops.act_tan = [h, action_tangent](const Mat& hv) {
      return action_tangent(GroupElement{h, hv});
    };
  } else {
    int dk = ops.dk;
    ops.act_tan = [dk](const Mat&) { return Mat(Mat::Identity(dk, dk)); };
  }
  if (action_algebra) {
    ops.rho = [h, action_algebra](const Vec& y) {
      return action_algebra(make_algebra(h, y));
    };
  } else {
    ops.rho = [h, act_tan = ops.act_tan](const Vec& y) {
      const double eps = 1e-6;
      Mat p = act_tan(h->exp_value(Vec(eps * y)));
      Mat m = act_tan(h->exp_value(Vec(-eps * y)));
      return Mat((p - m) / (2.0 * eps));
    };
  }
  return ops;
}

void attach_extension_pieces(PairOps& ops, const ExtensionSpec& spec) {
  const GroupPtr k = ops.k;
  const GroupPtr h = ops.h;
  ops.coc = [k, h, f = spec.cocycle](const Mat& h1v, const Mat& h2v) {
    GroupElement out = f(GroupElement{h, h1v}, GroupElement{h, h2v});
    require_same_owner(out.owner, k, "extension cocycle");
    return out.value;
  };
  if (spec.bilinear_cocycle) {
    ops.d1c = [coc = ops.coc](const Vec& y, const Mat& hv) {
      return Vec(coc(Mat(y), hv).col(0));
    };
    ops.gamma = [coc = ops.coc](const Vec& y1, const Vec& y2) {
      return Vec(coc(Mat(y1), Mat(y2)).col(0) - coc(Mat(y2), Mat(y1)).col(0));
    };
  } else {
    ops.d1c = [h, coc = ops.coc](const Vec& y, const Mat& hv) {
      const double eps = 1e-6;
      Mat p = coc(h->exp_value(Vec(eps * y)), hv);
      Mat m = coc(h->exp_value(Vec(-eps * y)), hv);
      return Vec(((p - m) / (2.0 * eps)).col(0));
    };
    // Antisymmetrized mixed second derivative of c at (e, e) by central
    // differences; accuracy ~1e-7 limits the bracket for hand-written
    // non-bilinear cocycles.
    ops.gamma = [h, coc = ops.coc](const Vec& y1, const Vec& y2) {
      const double eps = 1e-4;
      auto mixed = [&](const Vec& a, const Vec& b) {
        Mat pp = coc(h->exp_value(Vec(eps * a)), h->exp_value(Vec(eps * b)));
        Mat pm = coc(h->exp_value(Vec(eps * a)), h->exp_value(Vec(-eps * b)));
        Mat mp = coc(h->exp_value(Vec(-eps * a)), h->exp_value(Vec(eps * b)));
        Mat mm = coc(h->exp_value(Vec(-eps * a)), h->exp_value(Vec(-eps * b)));
        return Vec(((pp - pm - mp + mm) / (4.0 * eps * eps)).col(0));
      };
      return Vec(mixed(y1, y2) - mixed(y2, y1));
    };
  }
  // exp correction from the cocycle, by variation of constants:
  // W(y) = int_0^1 e^{rho(y)(1-s)} d1c(y, exp_H(s y)) ds.
  ops.wcorr = [h, rho = ops.rho, d1c = ops.d1c](const Vec& y) {
    Mat r = rho(y);
    return integrate_vec(
        [&](double s) {
          Mat e = generic_matrix_exp(Mat(r * (1.0 - s)));
          return Vec(e * d1c(y, h->exp_value(Vec(s * y))));
        },
        0.0, 1.0, 8);
  };
}

// Central-difference adjoint via conjugation, for packed pair values.
std::function<Mat(const Mat&)> fd_conjugation_adjoint(
    int dim, std::function<Mat(const Mat&, const Mat&)> mulf,
    std::function<Mat(const Mat&)> invf, std::function<Mat(const Vec&)> expf,
    std::function<Vec(const Mat&)> logf) {
  return [dim, mulf, invf, expf, logf](const Mat& gval) {
    const double eps = 1e-6;
    Mat out(dim, dim);
    Mat gi = invf(gval);
    for (int i = 0; i < dim; ++i) {
      Vec e = Vec::Zero(dim);
      e(i) = eps;
      Vec plus = logf(mulf(gval, mulf(expf(e), gi)));
      Vec minus = logf(mulf(gval, mulf(expf(Vec(-e)), gi)));
      out.col(i) = (plus - minus) / (2.0 * eps);
    }
    return out;
  };
}

void fill_pair_shell(const std::shared_ptr<Group>& g, const std::string& name,
                     const GroupPtr& k, const GroupPtr& h, bool abelian) {
  const int dk = k->alg_dim, dh = h->alg_dim;
  const Slicer sl(k, h);
  g->name = name;
  g->alg_dim = dk + dh;
  g->rows = k->rows * k->cols + h->rows * h->cols;
  g->cols = 1;
  g->realization = Realization::PairGroup;
  g->abelian = abelian;
  g->simply_connected = k->simply_connected && h->simply_connected;
  g->tolerance = std::max(k->tolerance, h->tolerance);
  g->identity_value = pack_values(k->identity_value, h->identity_value);
  g->basis.reserve(static_cast<std::size_t>(dk + dh));
  for (int i = 0; i < dk + dh; ++i) {
    Mat e = Mat::Zero(dk + dh, 1);
    e(i, 0) = 1.0;
    g->basis.push_back(e);
  }
  g->alg_to_mat_fn = [](const Vec& c) { return Mat(c); };
  g->mat_to_alg_fn = [](const Mat& m, double* resid) {
    if (resid) *resid = 0.0;
    return Vec(m.col(0));
  };
  g->constraint_fn = [k, h, sl](const Mat& v) {
    return k->constraint(sl.k(v)) + h->constraint(sl.h(v));
  };
  g->distance_fn = [k, h, sl](const Mat& a, const Mat& b) {
    return std::hypot(k->distance(sl.k(a), sl.k(b)), h->distance(sl.h(a), sl.h(b)));
  };
  if (k->canonicalize_fn || h->canonicalize_fn) {
    g->canonicalize_fn = [k, h, sl](const Mat& v) {
      Mat kv = sl.k(v);
      Mat hv = sl.h(v);
      if (k->canonicalize_fn) kv = k->canonicalize_fn(kv);
      if (h->canonicalize_fn) hv = h->canonicalize_fn(hv);
      return pack_values(kv, hv);
    };
  }
}

void fill_structure_tables(const std::shared_ptr<Group>& g) {
  const int d = g->alg_dim;
  g->ad_basis.clear();
  g->ad_basis.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    Vec ei = Vec::Zero(d);
    ei(i) = 1.0;
    Mat m(d, d);
    for (int j = 0; j < d; ++j) {
      Vec ej = Vec::Zero(d);
      ej(j) = 1.0;
      m.col(j) = g->bracket_fn(ei, ej);
    }
    g->ad_basis.push_back(m);
  }
  g->ad_matrix_fn = fd_conjugation_adjoint(d, g->mul_fn, g->inv_fn, g->exp_fn,
                                           g->log_fn);
}

void validate_pair_axioms(const std::shared_ptr<Group>& g, const std::string& who) {
  std::mt19937_64 rng = check_stream(75, "pair-axioms:" + g->name);
  double worst = 0.0;
  for (int i = 0; i < 6; ++i) {
    Vec ca = random_coeffs(rng, g->alg_dim, 0.8);
    Vec cb = random_coeffs(rng, g->alg_dim, 0.8);
    Vec cc = random_coeffs(rng, g->alg_dim, 0.8);
    Mat a = g->exp_fn(ca), b = g->exp_fn(cb), c = g->exp_fn(cc);
    worst = std::max(worst, g->distance(g->mul(a, g->inv(a)), g->identity_value));
    worst = std::max(worst, g->distance(g->mul(g->mul(a, b), c),
                                        g->mul(a, g->mul(b, c))));
    worst = std::max(worst, g->distance(g->mul(a, g->identity_value), a));
    // One-parameter property of the closed-form exponential.
    Mat two = g->mul(g->exp_fn(Vec(0.4 * ca)), g->exp_fn(Vec(0.35 * ca)));
    worst = std::max(worst, g->distance(two, g->exp_fn(Vec(0.75 * ca))));
    // Principal-branch round trip on small elements.
    Vec cs = random_coeffs(rng, g->alg_dim, 0.2);
    worst = std::max(worst, (g->log_fn(g->exp_fn(cs)) - cs).norm());
  }
  if (worst > 1e-8) {
    std::ostringstream os;
    os << who << ": group axioms fail on random samples (residual " << worst << ")";
    throw ConstructionError(os.str());
  }
}

void validate_action(const PairOps& ops, const std::string& who) {
  std::mt19937_64 rng = check_stream(73, "pair-action:" + who);
  double worst = 0.0;
  for (int i = 0; i < 8; ++i) {
    GroupElement h1 = random_component(rng, ops.h, 1.0);
    GroupElement h2 = random_component(rng, ops.h, 1.0);
    GroupElement k1 = random_component(rng, ops.k, 1.0);
    GroupElement k2 = random_component(rng, ops.k, 1.0);
    worst = std::max(worst, ops.k->distance(
                                ops.act(ops.h->identity_value, k1.value), k1.value));
    Mat lhs = ops.act(ops.h->mul(h1.value, h2.value), k1.value);
    Mat rhs = ops.act(h1.value, ops.act(h2.value, k1.value));
    worst = std::max(worst, ops.k->distance(lhs, rhs));
    Mat l2 = ops.act(h1.value, ops.k->mul(k1.value, k2.value));
    Mat r2 = ops.k->mul(ops.act(h1.value, k1.value), ops.act(h1.value, k2.value));
    worst = std::max(worst, ops.k->distance(l2, r2));
  }
  if (worst > 1e-10) {
    std::ostringstream os;
    os << who << ": the action fails the automorphism laws (residual " << worst
       << ")";
    throw ConstructionError(os.str());
  }
  // The supplied tangent must match a centered difference of the action.
  double tworst = 0.0;
  for (int i = 0; i < 4; ++i) {
    GroupElement hh = random_component(rng, ops.h, 1.0);
    Mat tmat = ops.act_tan(hh.value);
    if (tmat.rows() != ops.dk || tmat.cols() != ops.dk)
      throw ConstructionError(who + ": action_tangent has the wrong shape");
    Vec u = random_coeffs(rng, ops.dk, 1.0);
    const double eps = 1e-5;
    Vec plus = ops.k->log_value(ops.act(hh.value, ops.k->exp_value(Vec(eps * u))));
    Vec minus =
        ops.k->log_value(ops.act(hh.value, ops.k->exp_value(Vec(-eps * u))));
    Vec fd = (plus - minus) / (2.0 * eps);
    tworst = std::max(tworst, (fd - tmat * u).norm() / std::max(1.0, u.norm()));
  }
  if (tworst > 1e-6) {
    std::ostringstream os;
    os << who << ": action_tangent disagrees with the action (residual " << tworst
       << ")";
    throw ConstructionError(os.str());
  }
  // The supplied algebra action must match the derivative of the tangent.
  double rworst = 0.0;
  for (int i = 0; i < 3; ++i) {
    Vec y = random_coeffs(rng, ops.dh, 1.0);
    const double eps = 1e-6;
    Mat p = ops.act_tan(ops.h->exp_value(Vec(eps * y)));
    Mat m = ops.act_tan(ops.h->exp_value(Vec(-eps * y)));
    Mat fd = (p - m) / (2.0 * eps);
    rworst = std::max(rworst, (fd - ops.rho(y)).norm());
  }
  if (rworst > 1e-4) {
    std::ostringstream os;
    os << who << ": action_algebra disagrees with action_tangent (residual "
       << rworst << ")";
    throw ConstructionError(os.str());
  }
}

bool action_is_trivial(const PairOps& ops) {
  std::mt19937_64 rng = check_stream(76, "pair-trivial:" + ops.k->name + "|" +
                                             ops.h->name);
  for (int i = 0; i < 8; ++i) {
    GroupElement hh = random_component(rng, ops.h, 1.0);
    GroupElement kk = random_component(rng, ops.k, 1.0);
    if (ops.k->distance(ops.act(hh.value, kk.value), kk.value) > 1e-10)
      return false;
  }
  return true;
}

}  // namespace

// ---- pair helpers -------------------------------------------------------------

const PairParts& pair_parts(const GroupPtr& pair) {
  if (!pair) throw UsageError("pair_parts: null group");
  std::lock_guard<std::mutex> lock(registry_mutex());
  auto it = registry().find(pair.get());
  if (it == registry().end())
    throw UsageError("pair_parts: group '" + pair->name + "' is not a pair group");
  return it->second.parts;
}

GroupElement pair_element(const GroupPtr& pair, const GroupElement& k,
                          const GroupElement& h) {
  const PairParts& p = pair_parts(pair);
  require_same_owner(k.owner, p.k, "pair_element");
  require_same_owner(h.owner, p.h, "pair_element");
  return make_element(pair, pack_values(k.value, h.value));
}

std::pair<GroupElement, GroupElement> split_element(const GroupElement& g) {
  const PairParts& p = pair_parts(g.owner);
  Slicer sl(p.k, p.h);
  return {make_element(p.k, sl.k(g.value)), make_element(p.h, sl.h(g.value))};
}

AlgebraElement pair_algebra(const GroupPtr& pair, const AlgebraElement& u,
                            const AlgebraElement& y) {
  const PairParts& p = pair_parts(pair);
  require_same_owner(u.owner, p.k, "pair_algebra");
  require_same_owner(y.owner, p.h, "pair_algebra");
  Vec c(u.coeffs.size() + y.coeffs.size());
  c << u.coeffs, y.coeffs;
  return make_algebra(pair, c);
}

std::pair<AlgebraElement, AlgebraElement> split_algebra(const AlgebraElement& x) {
  const PairParts& p = pair_parts(x.owner);
  const int dk = p.k->alg_dim;
  const int dh = p.h->alg_dim;
  return {make_algebra(p.k, Vec(x.coeffs.head(dk))),
          make_algebra(p.h, Vec(x.coeffs.tail(dh)))};
}

// ---- semidirect products --------------------------------------------------------

GroupPtr semidirect_group(const SemidirectSpec& spec) {
  if (!spec.k || !spec.h)
    throw UsageError("semidirect_group: both component groups are required");
  if (!spec.action || !spec.action_tangent)
    throw UsageError("semidirect_group: action and action_tangent are required");
  PairOps ops =
      base_ops(spec.k, spec.h, spec.action, spec.action_tangent, spec.action_algebra);
  const std::string who = "semidirect_group(" + spec.name + ")";
  validate_action(ops, who);
  const bool trivial = action_is_trivial(ops);
  if (!trivial && spec.k->realization != Realization::VectorGroup)
    throw ConstructionError(
        who + ": a closed-form exponential needs a vector-group normal factor "
              "when the action is nontrivial");

  const GroupPtr k = spec.k, h = spec.h;
  const int dk = ops.dk, dh = ops.dh;
  const Slicer sl(k, h);
  auto g = std::make_shared<Group>();
  fill_pair_shell(g, spec.name, k, h, trivial && k->abelian && h->abelian);

  auto act = ops.act;
  g->mul_fn = [k, h, act, sl](const Mat& a, const Mat& b) {
    Mat kv = k->mul(sl.k(a), act(sl.h(a), sl.k(b)));
    Mat hv = h->mul(sl.h(a), sl.h(b));
    return pack_values(kv, hv);
  };
  g->inv_fn = [k, h, act, sl](const Mat& a) {
    Mat hi = h->inv(sl.h(a));
    Mat ki = k->inv(act(hi, sl.k(a)));
    return pack_values(ki, hi);
  };
  if (trivial) {
    g->exp_fn = [k, h, dk, dh](const Vec& c) {
      return pack_values(k->exp_value(Vec(c.head(dk))),
                         h->exp_value(Vec(c.tail(dh))));
    };
    g->log_fn = [k, h, dk, dh, sl](const Mat& v) {
      Vec out(dk + dh);
      out.head(dk) = k->log_value(sl.k(v));
      out.tail(dh) = h->log_value(sl.h(v));
      return out;
    };
    g->bracket_fn = [k, h, dk, dh](const Vec& x, const Vec& y) {
      Vec out(dk + dh);
      out.head(dk) = k->bracket(Vec(x.head(dk)), Vec(y.head(dk)));
      out.tail(dh) = h->bracket(Vec(x.tail(dh)), Vec(y.tail(dh)));
      return out;
    };
  } else {
    auto rho = ops.rho;
    g->exp_fn = [k, h, dk, dh, rho](const Vec& c) {
      Vec u = c.head(dk);
      Vec y = c.tail(dh);
      return pack_values(k->exp_value(Vec(phi1_matrix(rho(y)) * u)),
                         h->exp_value(y));
    };
    g->log_fn = [k, h, dk, dh, rho, sl](const Mat& v) {
      Vec y = h->log_value(sl.h(v));
      Vec kv = k->log_value(sl.k(v));
      Eigen::FullPivLU<Mat> lu(phi1_matrix(rho(y)));
      if (!lu.isInvertible())
        throw BranchError("pair log: the phi1 factor of the exponential is singular");
      Vec out(dk + dh);
      out.head(dk) = lu.solve(kv);
      out.tail(dh) = y;
      return out;
    };
    g->bracket_fn = [h, dk, dh, rho](const Vec& x, const Vec& y) {
      Vec u1 = x.head(dk), u2 = y.head(dk);
      Vec y1 = x.tail(dh), y2 = y.tail(dh);
      Vec out(dk + dh);
      out.head(dk) = rho(y1) * u2 - rho(y2) * u1;
      out.tail(dh) = h->bracket(y1, y2);
      return out;
    };
  }
  fill_structure_tables(g);
  validate_pair_axioms(g, who);
  register_pair(g, PairParts{k, h});
  return g;
}

EvolutionResult evolve_semidirect(const SemidirectSpec& spec, const AlgebraCurve& u,
                                  const AlgebraCurve& y, int n, GroupPtr pair) {
  if (!pair) pair = semidirect_group(spec);
  const PairParts& parts = pair_parts(pair);
  require_same_owner(u.owner, parts.k, "evolve_semidirect");
  require_same_owner(y.owner, parts.h, "evolve_semidirect");

  EvolutionResult hres = evolve(y, Side::Right, n);
  // T(alpha_{h(t)^{-1}}) on the evolution grid, splined for the Gauss nodes.
  std::vector<Mat> tmats(hres.path.values.size());
  for (std::size_t i = 0; i < tmats.size(); ++i) {
    GroupElement hinv{parts.h, parts.h->inv(hres.path.values[i])};
    tmats[i] = spec.action_tangent(hinv);
  }
  MatrixSpline tsp(hres.path.ts, tmats);
  AlgebraCurve z = curve_from_function(
      parts.k, [tsp, u](double t) { return Vec(tsp(t) * u.eval(t)); });
  EvolutionResult kres = evolve(z, Side::Right, n);

  GroupPath path{pair, hres.path.ts, {}, "staged-" + hres.path.scheme};
  path.values.reserve(hres.path.values.size());
  for (std::size_t i = 0; i < hres.path.values.size(); ++i) {
    GroupElement he{parts.h, hres.path.values[i]};
    GroupElement ke{parts.k, kres.path.values[i]};
    GroupElement moved = spec.action(he, ke);
    path.values.push_back(pack_values(moved.value, he.value));
  }
  EvolveStats stats{n, std::max(hres.stats.max_constraint_drift,
                                kres.stats.max_constraint_drift)};
  return EvolutionResult{path, path.endpoint(), stats};
}

// ---- abelian extensions ----------------------------------------------------------

GroupPtr extension_group(const ExtensionSpec& spec) {
  if (!spec.k || !spec.h)
    throw UsageError("extension_group: both component groups are required");
  if (!spec.cocycle) throw UsageError("extension_group: a cocycle is required");
  const std::string who = "extension_group(" + spec.name + ")";
  if (spec.k->realization != Realization::VectorGroup)
    throw ConstructionError(who + ": the extending factor must be a vector group");
  if (spec.bilinear_cocycle && spec.h->realization != Realization::VectorGroup)
    throw ConstructionError(
        who + ": the bilinear-cocycle flag needs a vector-group acting factor");

  PairOps ops =
      base_ops(spec.k, spec.h, spec.action, spec.action_tangent, spec.action_algebra);
  attach_extension_pieces(ops, spec);
  if (spec.action) validate_action(ops, who);

  const GroupPtr k = spec.k, h = spec.h;
  const int dk = ops.dk, dh = ops.dh;
  const Slicer sl(k, h);

  // c(e, e) = 0 and the cocycle identity on random triples.
  {
    if (ops.coc(h->identity_value, h->identity_value).norm() > 1e-12)
      throw ConstructionError(who + ": the cocycle must vanish at the unit");
    std::mt19937_64 rng = check_stream(77, "cocycle:" + spec.name);
    double worst = 0.0;
    for (int i = 0; i < 8; ++i) {
      GroupElement h1 = random_component(rng, h, 1.0);
      GroupElement h2 = random_component(rng, h, 1.0);
      GroupElement h3 = random_component(rng, h, 1.0);
      Mat lhs = k->mul(ops.act(h1.value, ops.coc(h2.value, h3.value)),
                       ops.coc(h1.value, h->mul(h2.value, h3.value)));
      Mat rhs = k->mul(ops.coc(h->mul(h1.value, h2.value), h3.value),
                       ops.coc(h1.value, h2.value));
      worst = std::max(worst, k->distance(lhs, rhs));
    }
    if (worst > 1e-10) {
      std::ostringstream os;
      os << who << ": the cocycle identity fails on random triples (residual "
         << worst << ")";
      throw ConstructionError(os.str());
    }
  }

  auto g = std::make_shared<Group>();
  fill_pair_shell(g, spec.name, k, h, false);

  auto act = ops.act;
  auto coc = ops.coc;
  g->mul_fn = [k, h, act, coc, sl](const Mat& a, const Mat& b) {
    Mat kv = k->mul(k->mul(sl.k(a), act(sl.h(a), sl.k(b))),
                    coc(sl.h(a), sl.h(b)));
    Mat hv = h->mul(sl.h(a), sl.h(b));
    return pack_values(kv, hv);
  };
  g->inv_fn = [k, h, act, coc, sl](const Mat& a) {
    Mat hi = h->inv(sl.h(a));
    Mat ki = k->inv(k->mul(act(hi, sl.k(a)), coc(hi, sl.h(a))));
    return pack_values(ki, hi);
  };
  auto rho = ops.rho;
  auto wcorr = ops.wcorr;
  g->exp_fn = [k, h, dk, dh, rho, wcorr](const Vec& c) {
    Vec u = c.head(dk);
    Vec y = c.tail(dh);
    Vec kappa = phi1_matrix(rho(y)) * u + wcorr(y);
    return pack_values(k->exp_value(kappa), h->exp_value(y));
  };
  g->log_fn = [k, h, dk, dh, rho, wcorr, sl](const Mat& v) {
    Vec y = h->log_value(sl.h(v));
    Vec kv = k->log_value(sl.k(v));
    Eigen::FullPivLU<Mat> lu(phi1_matrix(rho(y)));
    if (!lu.isInvertible())
      throw BranchError("pair log: the phi1 factor of the exponential is singular");
    Vec out(dk + dh);
    out.head(dk) = lu.solve(Vec(kv - wcorr(y)));
    out.tail(dh) = y;
    return out;
  };
  auto gam = ops.gamma;
  g->bracket_fn = [h, dk, dh, rho, gam](const Vec& x, const Vec& y) {
    Vec u1 = x.head(dk), u2 = y.head(dk);
    Vec y1 = x.tail(dh), y2 = y.tail(dh);
    Vec out(dk + dh);
    out.head(dk) = rho(y1) * u2 - rho(y2) * u1 + gam(y1, y2);
    out.tail(dh) = h->bracket(y1, y2);
    return out;
  };
  fill_structure_tables(g);
  validate_pair_axioms(g, who);
  register_pair(g, PairParts{k, h});
  return g;
}

EvolutionResult evolve_extension(const ExtensionSpec& spec, const AlgebraCurve& u,
                                 const AlgebraCurve& y, int n, GroupPtr pair) {
  if (!pair) pair = extension_group(spec);
  const PairParts& parts = pair_parts(pair);
  require_same_owner(u.owner, parts.k, "evolve_extension");
  require_same_owner(y.owner, parts.h, "evolve_extension");
  PairOps ops =
      base_ops(spec.k, spec.h, spec.action, spec.action_tangent, spec.action_algebra);
  attach_extension_pieces(ops, spec);

  EvolutionResult hres = evolve(y, Side::Right, n);
  // Splines over the evolution grid: T(alpha_{h(t)^{-1}}) and h(t) itself
  // (the latter feeds the cocycle derivative).
  std::vector<Mat> tmats(hres.path.values.size());
  for (std::size_t i = 0; i < tmats.size(); ++i)
    tmats[i] = ops.act_tan(parts.h->inv(hres.path.values[i]));
  MatrixSpline tsp(hres.path.ts, tmats);
  MatrixSpline hsp(hres.path.ts, hres.path.values);
  auto d1c = ops.d1c;
  AlgebraCurve z = curve_from_function(parts.k, [tsp, hsp, u, y, d1c](double t) {
    Vec rhs = u.eval(t) + d1c(y.eval(t), hsp(t));
    return Vec(tsp(t) * rhs);
  });
  EvolutionResult kres = evolve(z, Side::Right, n);

  GroupPath path{pair, hres.path.ts, {}, "staged-" + hres.path.scheme};
  path.values.reserve(hres.path.values.size());
  for (std::size_t i = 0; i < hres.path.values.size(); ++i) {
    Mat moved = ops.act(hres.path.values[i], kres.path.values[i]);
    path.values.push_back(pack_values(moved, hres.path.values[i]));
  }
  EvolveStats stats{n, std::max(hres.stats.max_constraint_drift,
                                kres.stats.max_constraint_drift)};
  return EvolutionResult{path, path.endpoint(), stats};
}

// ---- built-in specs ---------------------------------------------------------------

SemidirectSpec euclidean3_semidirect_spec() {
  SemidirectSpec s;
  s.k = find_group("rn:3");
  s.h = find_group("so3");
  s.name = "euclidean3";
  s.action = [](const GroupElement& h, const GroupElement& k) {
    return make_element(k.owner, Mat(h.value * k.value));
  };
  s.action_tangent = [](const GroupElement& h) { return h.value; };
  GroupPtr rot = s.h;
  s.action_algebra = [rot](const AlgebraElement& y) {
    return rot->alg_to_mat(y.coeffs);
  };
  return s;
}

GroupElement homogeneous_model_of(const GroupElement& pair_elt,
                                  const GroupPtr& matrix_model) {
  std::pair<GroupElement, GroupElement> kh = split_element(pair_elt);
  Mat m = Mat::Identity(4, 4);
  m.block(0, 0, 3, 3) = kh.second.value;
  m.block(0, 3, 3, 1) = kh.first.value;
  return make_element(matrix_model, m);
}

ExtensionSpec heisenberg_extension_spec() {
  ExtensionSpec s;
  s.k = find_group("rn:1");
  s.h = find_group("rn:2");
  s.name = "heisenberg";
  s.bilinear_cocycle = true;
  GroupPtr center = s.k;
  s.cocycle = [center](const GroupElement& a, const GroupElement& b) {
    Mat v(1, 1);
    v(0, 0) = 0.5 * (a.value(0, 0) * b.value(1, 0) - a.value(1, 0) * b.value(0, 0));
    return make_element(center, v);
  };
  return s;
}

GroupElement heisenberg_model_of(const GroupElement& pair_elt,
                                 const GroupPtr& matrix_model) {
  std::pair<GroupElement, GroupElement> kh = split_element(pair_elt);
  const double z = kh.first.value(0, 0);
  const double x = kh.second.value(0, 0);
  const double y = kh.second.value(1, 0);
  Mat m = Mat::Identity(3, 3);
  m(0, 1) = x;
  m(1, 2) = y;
  m(0, 2) = z + 0.5 * x * y;
  return make_element(matrix_model, m);
}

// ---- tangent groups ----------------------------------------------------------------

namespace {

std::mutex& tangent_mutex() {
  static std::mutex m;
  return m;
}

std::map<const Group*, std::pair<SemidirectSpec, GroupPtr>>& tangent_registry() {
  static std::map<const Group*, std::pair<SemidirectSpec, GroupPtr>> r;
  return r;
}

const std::pair<SemidirectSpec, GroupPtr>& tangent_entry(const GroupPtr& g) {
  if (!g) throw UsageError("tangent_group: null group");
  std::lock_guard<std::mutex> lock(tangent_mutex());
  auto& reg = tangent_registry();
  auto it = reg.find(g.get());
  if (it == reg.end()) {
    SemidirectSpec s;
    s.k = make_vector_group("alg(" + g->name + ")", g->alg_dim, false, true);
    s.h = g;
    s.name = "tangent(" + g->name + ")";
    s.action = [](const GroupElement& h, const GroupElement& k) {
      return make_element(k.owner, Mat(Ad(h) * k.value));
    };
    s.action_tangent = [](const GroupElement& h) { return Ad(h); };
    GroupPtr base = g;
    s.action_algebra = [base](const AlgebraElement& y) {
      return base->ad_of(y.coeffs);
    };
    GroupPtr pair = semidirect_group(s);
    it = reg.emplace(g.get(), std::make_pair(std::move(s), std::move(pair))).first;
  }
  return it->second;
}

}  // namespace

SemidirectSpec tangent_group_spec(const GroupPtr& g) { return tangent_entry(g).first; }

GroupPtr tangent_group(const GroupPtr& g) { return tangent_entry(g).second; }

// ---- the convolution group ----------------------------------------------------------

namespace {

VectorSpline running_integral_spline(const AlgebraCurve& x, int n) {
  std::vector<double> ts = uniform_grid(0.0, 1.0, n);
  std::vector<Vec> vals(ts.size());
  Vec acc = Vec::Zero(x.owner->alg_dim);
  vals[0] = acc;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    acc += integrate_vec(x.eval, ts[i], ts[i + 1], 1);
    vals[i + 1] = acc;
  }
  return VectorSpline(ts, vals);
}

}  // namespace

ConvolutionElement::ConvolutionElement(GroupPtr base, AlgebraCurve x, int grid_n)
    : base_(std::move(base)), x_(std::move(x)), n_(grid_n) {
  if (!base_ || !x_.owner)
    throw UsageError("convolution element: a base group and a curve are required");
  require_same_owner(base_, x_.owner, "convolution element");
  if (n_ < 8) throw UsageError("convolution element: grid too coarse");
  EvolutionResult r = evolve(x_, Side::Right, n_);
  path_ = std::move(r.path);
  ad_ = ad_spline(path_, false);
  ad_inv_ = ad_spline(path_, true);
  run_ = running_integral_spline(x_, n_);
}

ConvolutionElement conv_element(const GroupPtr& base, const AlgebraCurve& x,
                                int grid_n) {
  return ConvolutionElement(base, x, grid_n);
}

ConvolutionElement conv_mul(const ConvolutionElement& x,
                            const ConvolutionElement& y) {
  require_same_owner(x.base(), y.base(), "conv_mul");
  AlgebraCurve prod = curve_from_function(x.base(), [x, y](double t) {
    return Vec(x(t) + x.ad_evol(t) * y(t));
  });
  return ConvolutionElement(x.base(), prod, x.grid_n());
}

ConvolutionElement conv_inv(const ConvolutionElement& x) {
  AlgebraCurve inv = curve_from_function(x.base(), [x](double t) {
    return Vec(-(x.ad_evol_inv(t) * x(t)));
  });
  return ConvolutionElement(x.base(), inv, x.grid_n());
}

AlgebraCurve conv_bracket(const GroupPtr& base, const AlgebraCurve& x,
                          const AlgebraCurve& y, int grid_n) {
  require_same_owner(base, x.owner, "conv_bracket");
  require_same_owner(base, y.owner, "conv_bracket");
  VectorSpline rx = running_integral_spline(x, grid_n);
  VectorSpline ry = running_integral_spline(y, grid_n);
  return curve_from_function(base, [base, rx, ry, x, y](double t) {
    return Vec(base->bracket(rx(t), y.eval(t)) + base->bracket(x.eval(t), ry(t)));
  });
}

AlgebraCurve conv_ad(const ConvolutionElement& x, const AlgebraCurve& y) {
  require_same_owner(x.base(), y.owner, "conv_ad");
  VectorSpline ry = running_integral_spline(y, x.grid_n());
  GroupPtr base = x.base();
  return curve_from_function(base, [base, x, y, ry](double t) {
    Mat a = x.ad_evol(t);
    return Vec(a * y.eval(t) - base->bracket(Vec(a * ry(t)), x(t)));
  });
}

namespace {

// Everything needed for one slice s = const of the two-parameter evolution:
// Y_s(t) = int_0^s field(t, u) du, E = Evol(Y_s), and the running integral
// behind g(t, s) = Ad(E(t)) int_0^t Ad(E(v)^{-1}) field(v, s) dv.
struct ConvSlice {
  VectorSpline ys;
  MatrixSpline ad_e;
  VectorSpline run;
};

ConvSlice conv_slice(const GroupPtr& base,
                     const std::function<Vec(double, double)>& field, double s,
                     int n) {
  std::vector<double> ts = uniform_grid(0.0, 1.0, n);
  const int d = base->alg_dim;
  std::vector<Vec> ysv(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double t = ts[i];
    ysv[i] = (s == 0.0)
                 ? Vec(Vec::Zero(d))
                 : integrate_vec([&](double u) { return field(t, u); }, 0.0, s, 16);
  }
  ConvSlice out;
  out.ys = VectorSpline(ts, ysv);
  AlgebraCurve yc =
      curve_from_function(base, [sp = out.ys](double t) { return sp(t); });
  EvolutionResult er = evolve(yc, Side::Right, n);
  out.ad_e = ad_spline(er.path, false);
  MatrixSpline ad_inv = ad_spline(er.path, true);
  std::vector<Vec> rv(ts.size());
  Vec acc = Vec::Zero(d);
  rv[0] = acc;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    acc += integrate_vec([&](double v) { return Vec(ad_inv(v) * field(v, s)); },
                         ts[i], ts[i + 1], 1);
    rv[i + 1] = acc;
  }
  out.run = VectorSpline(ts, rv);
  return out;
}

}  // namespace

ConvolutionElement conv_evolve(const GroupPtr& base,
                               const std::function<Vec(double, double)>& field,
                               int s_samples, int n) {
  if (s_samples < 4) throw UsageError("conv_evolve: too few sample slices");
  std::vector<double> sg = uniform_grid(0.0, 1.0, s_samples - 1);
  std::vector<Vec> z(sg.size());
  for (std::size_t j = 0; j < sg.size(); ++j) {
    ConvSlice slice = conv_slice(base, field, sg[j], n);
    z[j] = slice.ad_e(1.0) * slice.run(1.0);
  }
  AlgebraCurve zc = curve_from_samples(base, sg, z);
  return ConvolutionElement(base, zc, n);
}

double conv_evolve_ode_residual(const GroupPtr& base,
                                const std::function<Vec(double, double)>& field,
                                int n_grid, int n) {
  if (n_grid < 2) throw UsageError("conv_evolve_ode_residual: grid too coarse");
  const double fd = 1e-4;
  double sup = 0.0;
  for (int j = 0; j < n_grid; ++j) {
    double s = (j + 0.5) / n_grid;
    ConvSlice slice = conv_slice(base, field, s, n);
    auto gfun = [&](double t) { return Vec(slice.ad_e(t) * slice.run(t)); };
    for (int i = 0; i < n_grid; ++i) {
      double t = (i + 0.5) / n_grid;
      Vec dg = (gfun(t + fd) - gfun(t - fd)) / (2.0 * fd);
      Vec rhs = field(t, s) + base->bracket(slice.ys(t), gfun(t));
      sup = std::max(sup, (dg - rhs).lpNorm<Eigen::Infinity>());
    }
  }
  return sup;
}

}  // namespace regulie
