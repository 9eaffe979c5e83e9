#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace regulie {

/// A registered verification check: a named residual computation with a
/// fixed tolerance, grouped into a suite. Checks are pure given the seed;
/// every randomized input is drawn from check_stream(seed, id).
struct Check {
  std::string id;     // "<suite>/<name>"
  std::string suite;  // evolution | bundles | constructions | lie-theory | counterexamples
  std::string group;  // principal catalog group(s) exercised
  double tolerance = 0.0;
  /// Returns the measured residual; when params is non-null it receives a
  /// short "key=value" summary of the inputs actually used.
  std::function<double(std::uint64_t seed, std::string* params)> run;
};

/// The outcome of one executed check. The stored tolerance already includes
/// the REGULIE_TOLERANCE_SCALE factor, and pass <=> residual <= tolerance.
struct CheckReport {
  std::string id;
  std::string group;
  std::string params;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double wall_ms = 0.0;
};

/// All registered checks, sorted by id.
const std::vector<Check>& check_registry();

/// The five suite names (without the "all" alias).
const std::vector<std::string>& suite_names();

/// True for the five suite names and for "all".
bool is_suite_name(const std::string& name);

/// REGULIE_TOLERANCE_SCALE as a positive double; 1.0 when unset.
/// Throws UsageError when the variable is set but not a positive number.
double tolerance_scale();

CheckReport run_check(const Check& check, std::uint64_t seed);

/// Runs every check of the named suite ("all" for the full registry) in id
/// order, invoking `sink` per report as it is produced. Throws UsageError
/// on an unknown suite name.
std::vector<CheckReport> run_suite(
    const std::string& name, std::uint64_t seed,
    const std::function<void(const CheckReport&)>& sink = {});

}  // namespace regulie
