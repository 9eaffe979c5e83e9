#include "regulie/catalog.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>

namespace regulie {

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat skew3(const Vec& w) {
  Mat m(3, 3);
  m << 0, -w[2], w[1], w[2], 0, -w[0], -w[1], w[0], 0;
  return m;
}

Vec unskew3(const Mat& m) {
  Vec w(3);
  w << m(2, 1), m(0, 2), m(1, 0);
  return w;
}

// sin(t)/t and (1-cos(t))/t^2 with series guards near 0.
double sinc(double t) {
  if (std::abs(t) < 1e-4) return 1.0 - t * t / 6.0 + t * t * t * t / 120.0;
  return std::sin(t) / t;
}
double one_minus_cos_over_sq(double t) {
  if (std::abs(t) < 1e-4) return 0.5 - t * t / 24.0 + t * t * t * t / 720.0;
  return (1.0 - std::cos(t)) / (t * t);
}
double t_minus_sin_over_cube(double t) {
  if (std::abs(t) < 1e-4) return 1.0 / 6.0 - t * t / 120.0 + t * t * t * t / 5040.0;
  return (t - std::sin(t)) / (t * t * t);
}

Mat so3_exp_matrix(const Vec& w) {
  double th = w.norm();
  Mat k = skew3(w);
  return Mat::Identity(3, 3) + sinc(th) * k + one_minus_cos_over_sq(th) * (k * k);
}

Vec so3_log_coeffs(const Mat& r) {
  double c = (r.trace() - 1.0) / 2.0;
  c = std::min(1.0, std::max(-1.0, c));
  double th = std::acos(c);
  if (kPi - th < 1e-6)
    throw BranchError("so3 log: rotation angle within 1e-6 of pi (branch cut)");
  Vec v = unskew3(Mat((r - r.transpose()) / 2.0));
  if (th < 1e-4) {
    double t2 = th * th;
    return Vec(v * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0));
  }
  return Vec(v * (th / std::sin(th)));
}

GroupPtr build_so3() {
  MatrixGroupConfig cfg;
  cfg.name = "so3";
  cfg.mat_size = 3;
  cfg.constraint = ConstraintKind::Orthogonal;
  cfg.simply_connected = false;
  Vec e1(3), e2(3), e3(3);
  e1 << 1, 0, 0;
  e2 << 0, 1, 0;
  e3 << 0, 0, 1;
  cfg.basis = {skew3(e1), skew3(e2), skew3(e3)};
  cfg.exp_override = [](const Vec& c) { return so3_exp_matrix(c); };
  cfg.log_override = [](const Mat& a) { return so3_log_coeffs(a); };
  cfg.inv_override = [](const Mat& a) { return Mat(a.transpose()); };
  return make_matrix_group(std::move(cfg));
}

// ---- SU(2) as 4x4 real left-multiplication matrices -------------------------

GroupPtr build_su2() {
  MatrixGroupConfig cfg;
  cfg.name = "su2";
  cfg.mat_size = 4;
  cfg.simply_connected = true;
  auto lq = [](double w, double x, double y, double z) {
    Eigen::Vector4d q(w, x, y, z);
    return left_quaternion_matrix(q);
  };
  // E_k = L_{i_k}/2 gives [E1,E2] = E3 (and cyclic), matching so(3).
  cfg.basis = {Mat(lq(0, 1, 0, 0) / 2.0), Mat(lq(0, 0, 1, 0) / 2.0),
               Mat(lq(0, 0, 0, 1) / 2.0)};
  cfg.exp_override = [](const Vec& c) {
    Eigen::Vector3d u = c / 2.0;
    double th = u.norm();
    Eigen::Vector4d q;
    q[0] = std::cos(th);
    q.tail<3>() = sinc(th) * u;
    return left_quaternion_matrix(q);
  };
  cfg.log_override = [](const Mat& a) {
    Eigen::Vector4d q = a.col(0);
    double n = q.norm();
    if (n < 0.5) throw NumericError("su2 log: degenerate quaternion");
    q /= n;
    double w = q[0];
    Eigen::Vector3d v = q.tail<3>();
    double vn = v.norm();
    double th = std::atan2(vn, w);
    if (kPi - th < 1e-6)
      throw BranchError("su2 log: quaternion within 1e-6 of the antipode (branch cut)");
    if (vn < 1e-12) return Vec(2.0 * v);  // w > 0 here; log ~ 0
    return Vec(2.0 * th / vn * v);
  };
  cfg.inv_override = [](const Mat& a) { return Mat(a.transpose()); };
  cfg.constraint_override = [](const Mat& a) {
    Eigen::Vector4d q = a.col(0);
    return (a - left_quaternion_matrix(q)).norm() + std::abs(q.norm() - 1.0);
  };
  return make_matrix_group(std::move(cfg));
}

// ---- SE(3) as 4x4 homogeneous matrices --------------------------------------

GroupPtr build_se3() {
  MatrixGroupConfig cfg;
  cfg.name = "se3";
  cfg.mat_size = 4;
  cfg.simply_connected = false;  // contains SO(3)
  cfg.basis.reserve(6);
  for (int k = 0; k < 3; ++k) {
    Vec e = Vec::Zero(3);
    e[k] = 1.0;
    Mat m = Mat::Zero(4, 4);
    m.topLeftCorner(3, 3) = skew3(e);
    cfg.basis.push_back(m);
  }
  for (int k = 0; k < 3; ++k) {
    Mat m = Mat::Zero(4, 4);
    m(k, 3) = 1.0;
    cfg.basis.push_back(m);
  }
  cfg.exp_override = [](const Vec& c) {
    Vec w = c.head(3), v = c.tail(3);
    double th = w.norm();
    Mat k = skew3(w);
    Mat vmat = Mat::Identity(3, 3) + one_minus_cos_over_sq(th) * k +
               t_minus_sin_over_cube(th) * (k * k);
    Mat out = Mat::Identity(4, 4);
    out.topLeftCorner(3, 3) = so3_exp_matrix(w);
    out.topRightCorner(3, 1) = vmat * v;
    return out;
  };
  cfg.log_override = [](const Mat& a) {
    Vec w = so3_log_coeffs(a.topLeftCorner(3, 3));
    double th = w.norm();
    Mat k = skew3(w);
    Mat vinv;
    if (th < 1e-4) {
      vinv = Mat::Identity(3, 3) - 0.5 * k + (1.0 / 12.0) * (k * k);
    } else {
      double coef = (1.0 / (th * th)) - (1.0 + std::cos(th)) / (2.0 * th * std::sin(th));
      vinv = Mat::Identity(3, 3) - 0.5 * k + coef * (k * k);
    }
    Vec c(6);
    c.head(3) = w;
    c.tail(3) = vinv * a.topRightCorner(3, 1);
    return c;
  };
  cfg.inv_override = [](const Mat& a) {
    Mat r = a.topLeftCorner(3, 3);
    Mat out = Mat::Identity(4, 4);
    out.topLeftCorner(3, 3) = r.transpose();
    out.topRightCorner(3, 1) = -r.transpose() * a.topRightCorner(3, 1);
    return out;
  };
  cfg.constraint_override = [](const Mat& a) {
    Mat r = a.topLeftCorner(3, 3);
    double res = (r.transpose() * r - Mat::Identity(3, 3)).norm() +
                 std::abs(r.determinant() - 1.0);
    res += std::abs(a(3, 0)) + std::abs(a(3, 1)) + std::abs(a(3, 2)) + std::abs(a(3, 3) - 1.0);
    return res;
  };
  return make_matrix_group(std::move(cfg));
}

GroupPtr build_sl2() {
  MatrixGroupConfig cfg;
  cfg.name = "sl2";
  cfg.mat_size = 2;
  cfg.constraint = ConstraintKind::SpecialLinear;
  cfg.simply_connected = false;
  Mat h(2, 2), e(2, 2), f(2, 2);
  h << 1, 0, 0, -1;
  e << 0, 1, 0, 0;
  f << 0, 0, 1, 0;
  cfg.basis = {h, e, f};
  cfg.inv_override = [](const Mat& a) {
    Mat out(2, 2);  // adjugate; valid since det = 1
    out << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
    return out;
  };
  return make_matrix_group(std::move(cfg));
}

GroupPtr build_gl2p() {
  MatrixGroupConfig cfg;
  cfg.name = "gl2p";
  cfg.mat_size = 2;
  cfg.simply_connected = false;
  Mat e11(2, 2), e12(2, 2), e21(2, 2), e22(2, 2);
  e11 << 1, 0, 0, 0;
  e12 << 0, 1, 0, 0;
  e21 << 0, 0, 1, 0;
  e22 << 0, 0, 0, 1;
  cfg.basis = {e11, e12, e21, e22};
  cfg.constraint_override = [](const Mat& a) {
    if (!a.allFinite()) return std::numeric_limits<double>::infinity();
    double det = a.determinant();
    return det > 0 ? 0.0 : 1.0 + std::abs(det);
  };
  return make_matrix_group(std::move(cfg));
}

GroupPtr build_heis3() {
  MatrixGroupConfig cfg;
  cfg.name = "heis3";
  cfg.mat_size = 3;
  cfg.constraint = ConstraintKind::UnipotentPattern;
  cfg.simply_connected = true;
  Mat ex = Mat::Zero(3, 3), ey = Mat::Zero(3, 3), ez = Mat::Zero(3, 3);
  ex(0, 1) = 1.0;  // x direction
  ey(1, 2) = 1.0;  // y direction
  ez(0, 2) = 1.0;  // central z direction; [ex, ey] = ez
  cfg.basis = {ex, ey, ez};
  cfg.exp_override = [ex, ey, ez](const Vec& c) {
    Mat n = c[0] * ex + c[1] * ey + c[2] * ez;  // nilpotent: n^3 = 0
    return Mat(Mat::Identity(3, 3) + n + 0.5 * (n * n));
  };
  cfg.log_override = [](const Mat& a) {
    Mat n = a - Mat::Identity(3, 3);
    Mat l = n - 0.5 * (n * n);
    Vec c(3);
    c << l(0, 1), l(1, 2), l(0, 2);
    return c;
  };
  cfg.inv_override = [](const Mat& a) {
    Mat n = a - Mat::Identity(3, 3);
    return Mat(Mat::Identity(3, 3) - n + n * n);
  };
  return make_matrix_group(std::move(cfg));
}

std::mutex cache_mutex;
std::map<std::string, GroupPtr> cache;

}  // namespace

Mat left_quaternion_matrix(const Eigen::Vector4d& q) {
  double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat m(4, 4);
  m << w, -x, -y, -z,
       x,  w, -z,  y,
       y,  z,  w, -x,
       z, -y,  x,  w;
  return m;
}

Eigen::Vector4d quaternion_of(const GroupElement& a) {
  if (a.owner->name != "su2") throw OwnerMismatchError("quaternion_of: expects su2 element");
  return Eigen::Vector4d(a.value.col(0));
}

Mat rotation_of_quaternion(const Eigen::Vector4d& q) {
  double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat r(3, 3);
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

std::vector<std::string> catalog_names() {
  return {"so3", "su2", "se3", "sl2", "gl2p", "heis3"};
}

GroupPtr group_from_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("group config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw UsageError(std::string("group config: JSON parse failure: ") + e.what());
  }
  MatrixGroupConfig cfg;
  try {
    cfg.name = j.at("name").get<std::string>();
    cfg.mat_size = j.at("mat_size").get<int>();
    for (const auto& row : j.at("basis")) {
      std::vector<double> entries = row.get<std::vector<double>>();
      if (static_cast<int>(entries.size()) != cfg.mat_size * cfg.mat_size)
        throw UsageError("group config: basis row has wrong length");
      Mat m(cfg.mat_size, cfg.mat_size);
      for (int r = 0; r < cfg.mat_size; ++r)
        for (int c = 0; c < cfg.mat_size; ++c)
          m(r, c) = entries[static_cast<std::size_t>(r * cfg.mat_size + c)];
      cfg.basis.push_back(m);
    }
    std::string ck = j.value("constraint", std::string("none"));
    if (ck == "orthogonal") cfg.constraint = ConstraintKind::Orthogonal;
    else if (ck == "special-linear") cfg.constraint = ConstraintKind::SpecialLinear;
    else if (ck == "unipotent-pattern") cfg.constraint = ConstraintKind::UnipotentPattern;
    else if (ck == "none") cfg.constraint = ConstraintKind::None;
    else throw UsageError("group config: unknown constraint kind '" + ck + "'");
    cfg.abelian = j.value("abelian", false);
    cfg.simply_connected = j.value("simply_connected", false);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("group config: ") + e.what());
  }
  return make_matrix_group(std::move(cfg));
}

GroupPtr find_group(const std::string& name) {
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
  }
  GroupPtr g;
  if (name == "so3") g = build_so3();
  else if (name == "su2") g = build_su2();
  else if (name == "se3") g = build_se3();
  else if (name == "sl2") g = build_sl2();
  else if (name == "gl2p") g = build_gl2p();
  else if (name == "heis3") g = build_heis3();
  else if (name.rfind("torus:", 0) == 0 || name.rfind("rn:", 0) == 0) {
    bool lattice = name[0] == 't';
    std::string dim_str = name.substr(name.find(':') + 1);
    int dim = 0;
    try {
      dim = std::stoi(dim_str);
    } catch (const std::exception&) {
      throw UsageError("group name: bad dimension in '" + name + "'");
    }
    if (dim <= 0 || dim > 64) throw UsageError("group name: dimension out of range in '" + name + "'");
    g = make_vector_group(name, dim, lattice, /*simply_connected=*/!lattice);
  } else if (name.rfind("file:", 0) == 0) {
    g = group_from_config_file(name.substr(5));
  } else {
    throw UsageError("unknown group '" + name + "'");
  }
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(name, g);
  return g;
}

}  // namespace regulie
