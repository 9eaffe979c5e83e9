#pragma once

#include <functional>
#include <vector>

#include "regulie/core.hpp"

namespace regulie {

// Pathologies of linear ODEs on (truncations of) the space of rapidly
// decreasing sequences: existence failure under a weighted shift,
// non-uniqueness under the plain shift, and the well-posed transport flow.

/// p_k(x) = sup_n (1+n)^k |x_n| over the stored coordinates.
double sequence_seminorm(const Vec& x, int k);

/// Solutions of x'_n = n^2 x_{n-1} (x'_0 = 0) truncated at level N:
/// the closed form
///   x_n(t) = sum_{i<=n} (n!/i!)^2 x_i(0) t^{n-i} / (n-i)!
/// evaluated in signed log space, next to a dense classical Runge-Kutta
/// solve of the truncated system. The system is strictly lower triangular,
/// so x_n never depends on coordinates above n.
struct ShiftSolveResult {
  std::vector<double> t_grid;
  std::vector<Vec> closed_form;  // one vector of N+1 coordinates per t
  std::vector<Vec> rk4;
  double max_rel_disagreement = 0.0;  // componentwise, against the closed form
};
/// x0 holds coordinates 0..N. Truncation above 60 is refused (factorial
/// scale); components are exact in log space for the supported range.
ShiftSolveResult weighted_shift_solve(const Vec& x0,
                                      const std::vector<double>& t_grid,
                                      int rk4_steps = 8000);

/// p_k of the closed-form solution at time t as the truncation level
/// grows; initial data x0 is padded with zeros beyond its length.
struct BlowupRow {
  int truncation = 0;
  double seminorm = 0.0;
};
std::vector<BlowupRow> seminorm_blowup_report(const Vec& x0, double t, int k,
                                              const std::vector<int>& truncations);

/// k-th derivative of the flat function phi(t) = exp(-1/t^2) (t > 0, else 0),
/// through the integer polynomial recurrence
///   phi^(k)(t) = P_k(1/t) phi(t),  P_{k+1}(u) = -u^2 P_k'(u) + 2 u^3 P_k(u).
/// Refused for k > 31 (coefficient growth).
double flat_function_derivative(int k, double t);

/// Two solutions of x'_k = x_{k+1} with identical zero initial data: the
/// zero solution and x_k(t) = phi^(k)(t). The ODE residual is measured in
/// integral form per grid interval (chain differences against quadrature
/// of the next coordinate), relative to the coordinate scale; numeric
/// differentiation is useless on flat functions, the recurrence is not.
struct NonuniquenessReport {
  int k_max = 0;
  std::vector<double> t_grid;
  std::vector<Vec> flat_solution;   // coordinates 0..k_max per grid point
  double max_initial_value = 0.0;   // sup_k |x_k(0)|
  double separation_at_half = 0.0;  // |phi(0.5)| = e^{-4}
  double max_ode_residual = 0.0;
};
NonuniquenessReport shift_nonuniqueness_demo(int k_max,
                                             const std::vector<double>& t_grid);

/// Translation solves the transport equation x' = d_s x: compares the
/// central difference quotient in t of x(t)(s) = x0(s+t) against the given
/// s-derivative on a grid of s values in [0, 1]; the defect is O(h^2).
double transport_flow_residual(const std::function<double(double)>& x0,
                               const std::function<double(double)>& x0_derivative,
                               double t, double h = 1e-3, int grid_n = 32);

}  // namespace regulie
