#include "regulie/counterexamples.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "regulie/curves.hpp"

namespace regulie {

namespace {

// Signed log-space value: value = sign * exp(log_mag).
struct LogTerm {
  double log_mag = -std::numeric_limits<double>::infinity();
  int sign = 0;
};

LogTerm log_term(int n, int i, double t, double xi) {
  LogTerm out;
  if (xi == 0.0 || (t == 0.0 && n != i)) return out;
  double lt = (n == i) ? 0.0 : (n - i) * std::log(std::abs(t));
  out.log_mag = 2.0 * (std::lgamma(n + 1.0) - std::lgamma(i + 1.0)) + lt -
                std::lgamma(n - i + 1.0) + std::log(std::abs(xi));
  out.sign = (xi > 0 ? 1 : -1);
  if (t < 0.0 && ((n - i) % 2) != 0) out.sign = -out.sign;
  return out;
}

Vec closed_form_at(const Vec& x0, int truncation, double t) {
  Vec out(truncation + 1);
  for (int n = 0; n <= truncation; ++n) {
    long double acc = 0.0L;
    for (int i = 0; i <= n && i < x0.size(); ++i) {
      LogTerm lt = log_term(n, i, t, x0[i]);
      if (lt.sign != 0) acc += lt.sign * std::exp(static_cast<long double>(lt.log_mag));
    }
    out[n] = static_cast<double>(acc);
  }
  return out;
}

Vec rk4_at(const Vec& x0, int truncation, double t, int steps) {
  Vec x = Vec::Zero(truncation + 1);
  x.head(std::min<int>(x0.size(), truncation + 1)) =
      x0.head(std::min<int>(x0.size(), truncation + 1));
  auto rhs = [truncation](const Vec& v) {
    Vec d(truncation + 1);
    d[0] = 0.0;
    for (int n = 1; n <= truncation; ++n)
      d[n] = static_cast<double>(n) * static_cast<double>(n) * v[n - 1];
    return d;
  };
  const double h = t / steps;
  for (int s = 0; s < steps; ++s) {
    Vec k1 = rhs(x);
    Vec k2 = rhs(Vec(x + 0.5 * h * k1));
    Vec k3 = rhs(Vec(x + 0.5 * h * k2));
    Vec k4 = rhs(Vec(x + h * k3));
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

// P_0..P_k coefficient rows (ascending powers of u = 1/t) of the flat
// function's derivative recurrence; all entries are integers.
std::vector<Vec> flat_polynomials(int k_max) {
  std::vector<Vec> polys;
  Vec p0(1);
  p0 << 1.0;
  polys.push_back(p0);
  for (int k = 0; k < k_max; ++k) {
    const Vec& p = polys.back();
    const int deg = static_cast<int>(p.size()) - 1;
    Vec next = Vec::Zero(deg + 4);  // -u^2 p' + 2 u^3 p
    for (int j = 1; j <= deg; ++j) next[j + 1] -= j * p[j];
    for (int j = 0; j <= deg; ++j) next[j + 3] += 2.0 * p[j];
    polys.push_back(next);
  }
  return polys;
}

double eval_flat(const Vec& poly, double t) {
  if (!(t > 0.0)) return 0.0;
  const double u = 1.0 / t;
  long double acc = 0.0L;
  for (int j = static_cast<int>(poly.size()) - 1; j >= 0; --j)
    acc = acc * u + static_cast<long double>(poly[j]);
  return static_cast<double>(acc * std::exp(-static_cast<long double>(u) * u));
}

}  // namespace

double sequence_seminorm(const Vec& x, int k) {
  if (k < 0) throw UsageError("seminorm: the weight exponent must be >= 0");
  double sup = 0.0;
  for (int n = 0; n < x.size(); ++n)
    sup = std::max(sup, std::pow(1.0 + n, k) * std::abs(x[n]));
  return sup;
}

ShiftSolveResult weighted_shift_solve(const Vec& x0,
                                      const std::vector<double>& t_grid,
                                      int rk4_steps) {
  if (x0.size() < 1) throw UsageError("weighted shift: empty initial data");
  const int truncation = static_cast<int>(x0.size()) - 1;
  if (truncation > 60)
    throw UsageError("weighted shift: truncation above 60 is refused");
  if (!x0.allFinite()) throw NumericError("weighted shift: non-finite initial data");
  if (rk4_steps < 100) throw UsageError("weighted shift: too few integrator steps");

  ShiftSolveResult res;
  res.t_grid = t_grid;
  for (double t : t_grid) {
    res.closed_form.push_back(closed_form_at(x0, truncation, t));
    res.rk4.push_back(t == 0.0 ? res.closed_form.back()
                               : rk4_at(x0, truncation, t, rk4_steps));
    const Vec& cf = res.closed_form.back();
    const Vec& rk = res.rk4.back();
    for (int n = 0; n <= truncation; ++n) {
      double scale = std::max(std::abs(cf[n]), std::abs(rk[n]));
      if (scale > 0.0)
        res.max_rel_disagreement =
            std::max(res.max_rel_disagreement, std::abs(cf[n] - rk[n]) / scale);
    }
  }
  return res;
}

std::vector<BlowupRow> seminorm_blowup_report(const Vec& x0, double t, int k,
                                              const std::vector<int>& truncations) {
  std::vector<BlowupRow> rows;
  for (int truncation : truncations) {
    if (truncation > 60)
      throw UsageError("weighted shift: truncation above 60 is refused");
    Vec x = closed_form_at(x0, truncation, t);
    rows.push_back({truncation, sequence_seminorm(x, k)});
  }
  return rows;
}

double flat_function_derivative(int k, double t) {
  if (k < 0) throw UsageError("flat function: derivative order must be >= 0");
  if (k > 31)
    throw UsageError("flat function: derivative orders above 31 are refused");
  static const std::vector<Vec> polys = flat_polynomials(31);
  return eval_flat(polys[static_cast<std::size_t>(k)], t);
}

NonuniquenessReport shift_nonuniqueness_demo(int k_max,
                                             const std::vector<double>& t_grid) {
  if (k_max < 1) throw UsageError("shift demo: need k_max >= 1");
  if (k_max > 30)
    throw UsageError("shift demo: derivative orders above 30 are refused");
  NonuniquenessReport rep;
  rep.k_max = k_max;
  rep.t_grid = t_grid;
  for (double t : t_grid) {
    Vec col(k_max + 1);
    for (int k = 0; k <= k_max; ++k) col[k] = flat_function_derivative(k, t);
    rep.flat_solution.push_back(col);
  }
  for (int k = 0; k <= k_max; ++k)
    rep.max_initial_value =
        std::max(rep.max_initial_value, std::abs(flat_function_derivative(k, 0.0)));
  rep.separation_at_half = std::abs(flat_function_derivative(0, 0.5));

  // Integral-form residual of x'_k = x_{k+1} on each grid interval:
  // |x_k(b) - x_k(a) - int_a^b x_{k+1}| / ((b - a) sup |x_{k+1}|).
  std::vector<double> sorted = t_grid;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double a = sorted[i], b = sorted[i + 1];
    if (!(b > a)) continue;
    for (int k = 0; k < k_max; ++k) {
      double gain = integrate(
          [k](double s) { return flat_function_derivative(k + 1, s); }, a, b, 16);
      double jump = flat_function_derivative(k, b) - flat_function_derivative(k, a);
      double scale = 0.0;
      for (double s : uniform_grid(a, b, 8))
        scale = std::max(scale, std::abs(flat_function_derivative(k + 1, s)));
      if (scale > 0.0)
        rep.max_ode_residual = std::max(
            rep.max_ode_residual, std::abs(jump - gain) / ((b - a) * scale));
    }
  }
  return rep;
}

double transport_flow_residual(const std::function<double(double)>& x0,
                               const std::function<double(double)>& x0_derivative,
                               double t, double h, int grid_n) {
  if (!(h > 0.0)) throw UsageError("transport flow: step must be positive");
  double worst = 0.0;
  for (double s : uniform_grid(0.0, 1.0, grid_n)) {
    double quotient = (x0(s + t + h) - x0(s + t - h)) / (2.0 * h);
    worst = std::max(worst, std::abs(quotient - x0_derivative(s + t)));
  }
  return worst;
}

}  // namespace regulie
