#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace regulie {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class Side { Right, Left };

// Error taxonomy. Every failure mode surfaced by the library derives from
// Error so callers can catch coarsely or precisely.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mixing elements of different groups.
struct OwnerMismatchError : Error { using Error::Error; };
// log requested outside the principal-branch domain.
struct BranchError : Error { using Error::Error; };
// A commutator or conjugation result left the span of the algebra basis.
struct ClosureError : Error { using Error::Error; };
// Non-finite values, series divergence, or singular linear solves.
struct NumericError : Error { using Error::Error; };
// A stepper produced elements violating the group constraint.
struct IntegrityError : Error { using Error::Error; };
// Invalid ingredients for a derived-group construction.
struct ConstructionError : Error { using Error::Error; };
// A documented precondition was violated (e.g. simply-connected flag).
struct PreconditionError : Error { using Error::Error; };
// develop() received a 1-form whose flatness residual is too large.
struct NotFlatError : Error { using Error::Error; };
// holonomy() received a base path that is not closed.
struct LoopError : Error { using Error::Error; };
// A base point or finite-difference stencil left a chart domain.
struct ChartDomainError : Error { using Error::Error; };
// Consecutive path nodes too far apart for the discrete log derivative.
struct StepTooLargeError : Error { using Error::Error; };
// AlgebraHom whose matrix does not preserve brackets.
struct InvalidHomError : Error { using Error::Error; };
// Malformed CLI input / expressions.
struct UsageError : Error { using Error::Error; };
// Unreadable or unwritable output paths.
struct IoError : Error { using Error::Error; };

// Deterministic substream: every randomized check derives its generator
// from (seed, check id) so failures are reproducible in isolation.
inline std::mt19937_64 check_stream(std::uint64_t seed, const std::string& check_id) {
  std::seed_seq seq{seed, static_cast<std::uint64_t>(std::hash<std::string>{}(check_id))};
  return std::mt19937_64(seq);
}

inline Vec random_coeffs(std::mt19937_64& rng, int dim, double max_norm = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = u(rng);
  double n = v.norm();
  if (n > max_norm && n > 0) v *= max_norm / n;
  return v;
}

}  // namespace regulie
