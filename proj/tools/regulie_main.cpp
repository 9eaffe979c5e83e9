// regulie: command-line front end. Subcommands run computations (evolve,
// transport, holonomy, develop, integrate-hom, construct, counterexample)
// or verification suites; machine-readable results are JSON lines on
// stdout, optional tables go to --emit files as CSV or JSON.
//
// Exit codes: 0 all checks passed, 1 a check failed or a computation was
// rejected, 2 usage error.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "regulie/bundles.hpp"
#include "regulie/catalog.hpp"
#include "regulie/checks.hpp"
#include "regulie/constructions.hpp"
#include "regulie/counterexamples.hpp"
#include "regulie/curves.hpp"
#include "regulie/evolution.hpp"
#include "regulie/expr.hpp"
#include "regulie/io.hpp"
#include "regulie/lie_theory.hpp"

namespace {

using namespace regulie;

struct Reporter {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  bool all_passed = true;

  /// Prints one CheckReport line; tolerance is scaled by
  /// REGULIE_TOLERANCE_SCALE like the suite checks.
  void operator()(const std::string& id, const std::string& group,
                  const std::string& params, double residual, double tol) {
    CheckReport r;
    r.id = id;
    r.group = group;
    r.params = params;
    r.residual = residual;
    r.tolerance = tol * tolerance_scale();
    r.pass = r.residual <= r.tolerance;
    r.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    all_passed = all_passed && r.pass;
    std::cout << check_report_json(r) << "\n" << std::flush;
  }

  int exit_code() const { return all_passed ? 0 : 1; }
};

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const std::string& piece : split_top_level(text, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(piece, &used);
      while (used < piece.size() && std::isspace(static_cast<unsigned char>(piece[used])))
        ++used;
      if (used != piece.size()) throw std::invalid_argument(piece);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(std::string("cannot parse ") + what + " entry '" + piece +
                       "' as a number");
    }
  }
  return out;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

std::string infer_format(const std::string& format, const std::string& path) {
  if (!format.empty()) return format;
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return "json";
  return "csv";
}

std::string matrix_row_major(const Mat& m) {
  std::ostringstream os;
  os << "[";
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      os << ((r == 0 && c == 0) ? "" : ",") << format_double(m(r, c));
  os << "]";
  return os.str();
}

/// Builds the chart shared by transport / holonomy / develop from the
/// semicolon-separated coefficient expressions and the box bounds.
ConnectionChart chart_from_flags(const GroupPtr& group, const std::string& form,
                                 const std::string& lo_text,
                                 const std::string& hi_text) {
  std::vector<std::string> coeff_exprs = split_top_level(form, ';');
  if (coeff_exprs.empty()) throw UsageError("--form needs at least one coefficient");
  int dim = static_cast<int>(coeff_exprs.size());
  Vec lo = lo_text.empty() ? Vec(Vec::Zero(dim)) : to_vec(parse_numbers(lo_text, "--lo"));
  Vec hi = hi_text.empty() ? Vec(Vec::Ones(dim)) : to_vec(parse_numbers(hi_text, "--hi"));
  if (lo.size() != dim || hi.size() != dim)
    throw UsageError("--lo/--hi must have one entry per --form coefficient");
  return chart_from_expressions(group, coeff_exprs, lo, hi);
}

/// A base path from either --path (parametric expressions in t) or
/// --polygon ("x,y; x,y; ..." corner list).
PathInBase path_from_flags(const std::string& path_text,
                           const std::string& polygon_text, int dim) {
  if (path_text.empty() == polygon_text.empty())
    throw UsageError("give exactly one of --path or --polygon");
  if (!path_text.empty()) {
    PathInBase p = path_from_expressions(path_text);
    if (p.dim != dim)
      throw UsageError("--path component count does not match the form's base dimension");
    return p;
  }
  std::vector<Vec> corners;
  for (const std::string& piece : split_top_level(polygon_text, ';')) {
    Vec c = to_vec(parse_numbers(piece, "--polygon"));
    if (c.size() != dim)
      throw UsageError("--polygon corner '" + piece +
                       "' does not match the form's base dimension");
    corners.push_back(c);
  }
  if (corners.size() < 3) throw UsageError("--polygon needs at least three corners");
  return polyline_loop(corners);
}

GroupElement start_element(const GroupPtr& g, const std::string& coeff_text) {
  if (coeff_text.empty()) return identity(g);
  Vec c = to_vec(parse_numbers(coeff_text, "--start"));
  if (c.size() != g->alg_dim)
    throw UsageError("--start needs " + std::to_string(g->alg_dim) +
                     " algebra coefficients");
  return exp_g(make_algebra(g, c));
}

// ---- subcommand handlers ----------------------------------------------------

struct EvolveArgs {
  std::string group = "so3", curve, side = "right", emit, format;
  int steps = 1024;
};

int run_evolve(const EvolveArgs& a) {
  Reporter report;
  GroupPtr g = find_group(a.group);
  AlgebraCurve x = curve_from_expression(g, a.curve);
  Side side = a.side == "left" ? Side::Left : Side::Right;
  EvolutionResult res = evolve(x, side, a.steps);
  if (!a.emit.empty())
    emit_table(path_table(res.path), infer_format(a.format, a.emit), a.emit);
  std::cout << "{\"record\":\"evolve\",\"group\":\"" << g->name
            << "\",\"endpoint\":" << matrix_row_major(res.endpoint.value)
            << "}\n";
  report("evolve/constraint-drift", g->name,
         "side=" + a.side + " steps=" + std::to_string(a.steps) + " curve=" + a.curve,
         res.stats.max_constraint_drift, 1e-9);
  return report.exit_code();
}

struct ChartArgs {
  std::string group = "so3", form, lo, hi, path, polygon, start, emit, format;
  int steps = 1024;
};

int run_transport(const ChartArgs& a) {
  Reporter report;
  GroupPtr g = find_group(a.group);
  ConnectionChart conn = chart_from_flags(g, a.form, a.lo, a.hi);
  PathInBase c = path_from_flags(a.path, a.polygon, conn.base_dim);
  GroupElement g0 = start_element(g, a.start);
  GroupPath lift = parallel_transport(conn, c, g0, a.steps);
  if (!a.emit.empty())
    emit_table(path_table(lift), infer_format(a.format, a.emit), a.emit);
  std::cout << "{\"record\":\"transport\",\"group\":\"" << g->name
            << "\",\"endpoint\":" << matrix_row_major(lift.endpoint().value)
            << "}\n";
  report("transport/horizontality", g->name,
         "steps=" + std::to_string(a.steps),
         transport_horizontality_residual(conn, c, g0, a.steps), 1e-6);
  return report.exit_code();
}

int run_holonomy(const ChartArgs& a) {
  Reporter report;
  GroupPtr g = find_group(a.group);
  ConnectionChart conn = chart_from_flags(g, a.form, a.lo, a.hi);
  PathInBase loop = path_from_flags(a.path, a.polygon, conn.base_dim);
  GroupElement g0 = start_element(g, a.start);
  HolonomyRecord rec = holonomy(conn, loop, g0, a.steps);
  GroupPath lift = parallel_transport(conn, loop, g0, a.steps);
  if (!a.emit.empty())
    emit_table(path_table(lift), infer_format(a.format, a.emit), a.emit);
  std::cout << "{\"record\":\"holonomy\",\"group\":\"" << g->name
            << "\",\"closure_gap\":" << format_double(rec.closure_gap)
            << ",\"holonomy\":" << matrix_row_major(rec.holonomy_element.value)
            << ",\"transport_endpoint\":"
            << matrix_row_major(rec.transport_endpoint.value) << "}\n";
  report("holonomy/loop-closure", g->name, "steps=" + std::to_string(a.steps),
         rec.closure_gap, 1e-9);
  return report.exit_code();
}

struct DevelopArgs {
  std::string group = "so3", form, lo, hi, x0, emit, format;
  std::vector<std::string> at;
  int segment_steps = 256;
};

int run_develop(const DevelopArgs& a) {
  Reporter report;
  GroupPtr g = find_group(a.group);
  ConnectionChart phi = chart_from_flags(g, a.form, a.lo, a.hi);
  Vec x0 = a.x0.empty() ? Vec(phi.lo) : to_vec(parse_numbers(a.x0, "--x0"));
  double flat = flatness_residual(phi, 5);
  DevelopingMap dev = develop(phi, x0, 5, a.segment_steps);
  Table table;
  for (int i = 0; i < phi.base_dim; ++i)
    table.columns.push_back("x" + std::to_string(i + 1));
  for (int r = 0; r < g->rows; ++r)
    for (int c = 0; c < g->cols; ++c)
      table.columns.push_back(g->cols == 1
                                  ? "v" + std::to_string(r + 1)
                                  : "m" + std::to_string(r + 1) + "_" +
                                        std::to_string(c + 1));
  for (const std::string& point : a.at) {
    Vec x = to_vec(parse_numbers(point, "--at"));
    GroupElement value = dev(x);
    std::cout << "{\"record\":\"develop\",\"x\":" << matrix_row_major(x)
              << ",\"value\":" << matrix_row_major(value.value) << "}\n";
    std::vector<double> row;
    for (int i = 0; i < x.size(); ++i) row.push_back(x[i]);
    for (int r = 0; r < value.value.rows(); ++r)
      for (int c = 0; c < value.value.cols(); ++c) row.push_back(value.value(r, c));
    table.rows.push_back(row);
  }
  if (!a.emit.empty())
    emit_table(table, infer_format(a.format, a.emit), a.emit);
  report("develop/flatness", g->name,
         "x0=" + a.x0 + " points=" + std::to_string(a.at.size()), flat, 1e-6);
  return report.exit_code();
}

struct HomArgs {
  std::string source = "su2", target = "so3", matrix_path;
  int samples = 100;
  std::uint64_t seed = 1;
};

int run_integrate_hom(const HomArgs& a) {
  Reporter report;
  GroupPtr src = find_group(a.source);
  GroupPtr dst = find_group(a.target);
  Mat m;
  if (a.matrix_path.empty()) {
    if (src->alg_dim != dst->alg_dim)
      throw UsageError("--matrix is required when the algebra dimensions differ");
    m = Mat::Identity(dst->alg_dim, src->alg_dim);
  } else {
    std::istringstream in(read_text_file(a.matrix_path));
    std::vector<double> entries;
    double v = 0;
    while (in >> v) entries.push_back(v);
    if (static_cast<int>(entries.size()) != src->alg_dim * dst->alg_dim)
      throw UsageError("matrix file must hold " +
                       std::to_string(dst->alg_dim) + "x" +
                       std::to_string(src->alg_dim) + " numbers");
    m = Mat(dst->alg_dim, src->alg_dim);
    for (int r = 0; r < dst->alg_dim; ++r)
      for (int c = 0; c < src->alg_dim; ++c)
        m(r, c) = entries[static_cast<std::size_t>(r * src->alg_dim + c)];
  }
  AlgebraHom f = make_algebra_hom(src, dst, m);
  GroupHom F = integrate_hom(f);
  auto rng = check_stream(a.seed, "cli/integrate-hom");
  std::vector<std::pair<GroupElement, GroupElement>> pairs;
  for (int i = 0; i < a.samples; ++i)
    pairs.emplace_back(exp_g(make_algebra(src, random_coeffs(rng, src->alg_dim, 2.5))),
                       exp_g(make_algebra(src, random_coeffs(rng, src->alg_dim, 2.5))));
  std::string params = "source=" + src->name + " target=" + dst->name +
                       " samples=" + std::to_string(a.samples);
  report("integrate-hom/homomorphism-law", src->name + "->" + dst->name, params,
         homomorphism_residual(F, pairs), 1e-7);
  Mat d = differential_by_differences(F);
  report("integrate-hom/differential-recovery", src->name + "->" + dst->name,
         params, (d - m).norm() / std::max(1.0, m.norm()), 1e-5);
  return report.exit_code();
}

struct ConstructArgs {
  std::string group = "so3", u, y;
  int steps = 512;
};

AlgebraCurve packed_curve(const GroupPtr& pair, const AlgebraCurve& u,
                          const AlgebraCurve& y) {
  return curve_from_function(pair, [pair, u, y](double t) {
    return pair_algebra(pair, make_algebra(pair_parts(pair).k, u(t)),
                        make_algebra(pair_parts(pair).h, y(t)))
        .coeffs;
  });
}

int run_construct_semidirect(const ConstructArgs& a) {
  Reporter report;
  SemidirectSpec spec = euclidean3_semidirect_spec();
  GroupPtr pair = semidirect_group(spec);
  const PairParts& parts = pair_parts(pair);
  AlgebraCurve u = curve_from_expression(parts.k, a.u);
  AlgebraCurve y = curve_from_expression(parts.h, a.y);
  EvolutionResult staged = evolve_semidirect(spec, u, y, a.steps, pair);
  EvolutionResult direct = evolve(packed_curve(pair, u, y), Side::Right, a.steps);
  report("construct/semidirect-two-pipeline", pair->name,
         "steps=" + std::to_string(a.steps),
         distance(staged.endpoint, direct.endpoint), 1e-7);
  return report.exit_code();
}

int run_construct_extension(const ConstructArgs& a) {
  Reporter report;
  ExtensionSpec spec = heisenberg_extension_spec();
  GroupPtr pair = extension_group(spec);
  const PairParts& parts = pair_parts(pair);
  AlgebraCurve u = curve_from_expression(parts.k, a.u);
  AlgebraCurve y = curve_from_expression(parts.h, a.y);
  EvolutionResult staged = evolve_extension(spec, u, y, a.steps, pair);
  EvolutionResult direct = evolve(packed_curve(pair, u, y), Side::Right, a.steps);
  report("construct/extension-two-pipeline", pair->name,
         "steps=" + std::to_string(a.steps),
         distance(staged.endpoint, direct.endpoint), 1e-7);
  return report.exit_code();
}

int run_construct_tangent(const ConstructArgs& a) {
  Reporter report;
  GroupPtr g = find_group(a.group);
  SemidirectSpec spec = tangent_group_spec(g);
  GroupPtr tg = tangent_group(g);
  const PairParts& parts = pair_parts(tg);
  AlgebraCurve x = curve_from_expression(g, a.u);
  AlgebraCurve y = curve_from_expression(g, a.y);
  AlgebraCurve yk = curve_from_function(parts.k, y.eval);
  EvolutionResult staged = evolve_semidirect(spec, yk, x, a.steps, tg);
  auto [kpart, hpart] = split_element(staged.endpoint);
  TangentResult tr = tangent_evol(x, y, a.steps);
  double residual = (Vec(kpart.value.col(0)) - tr.right.coeffs).norm();
  residual = std::max(residual, distance(hpart, tr.footpoint));
  report("construct/tangent-lift", tg->name, "steps=" + std::to_string(a.steps),
         residual, 1e-7);
  return report.exit_code();
}

int run_construct_conv(const ConstructArgs& a) {
  Reporter report;
  GroupPtr g = find_group(a.group);
  ConvolutionElement x = conv_element(g, curve_from_expression(g, a.u), a.steps);
  ConvolutionElement y = conv_element(g, curve_from_expression(g, a.y), a.steps);
  ConvolutionElement z = conv_mul(x, y);
  double worst = 0.0;
  for (int j = 0; j < z.evol_path().size(); j += 16) {
    GroupElement expect = mul(x.evol_path().at(j), y.evol_path().at(j));
    worst = std::max(worst, distance(z.evol_path().at(j), expect));
  }
  report("construct/conv-evol-morphism", g->name,
         "grid=" + std::to_string(a.steps), worst, 1e-7);
  return report.exit_code();
}

struct CounterexampleArgs {
  std::string which, emit, format;
  int truncation = -1;
  double t = -1;
};

int run_counterexample(const CounterexampleArgs& a) {
  Reporter report;
  if (a.which == "no-solution") {
    int truncation = a.truncation < 0 ? 30 : a.truncation;
    double t = a.t < 0 ? 0.5 : a.t;
    Vec x0 = Vec::Zero(truncation + 1);
    x0[0] = 1.0;
    std::vector<double> grid = uniform_grid(0.0, t, 8);
    ShiftSolveResult res = weighted_shift_solve(x0, grid);
    if (!a.emit.empty()) {
      Table table;
      table.columns.push_back("t");
      for (int n = 0; n <= truncation; ++n)
        table.columns.push_back("x" + std::to_string(n));
      for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> row;
        row.push_back(grid[i]);
        for (int n = 0; n <= truncation; ++n) row.push_back(res.closed_form[i][n]);
        table.rows.push_back(row);
      }
      emit_table(table, infer_format(a.format, a.emit), a.emit);
    }
    std::string params =
        "truncation=" + std::to_string(truncation) + " t=" + format_double(t);
    report("counterexample/no-solution-closed-vs-ode", "sequence", params,
           res.max_rel_disagreement, 1e-9);
    // The divergence demonstration needs a wide gap between truncation
    // levels to be conclusive, independent of the table truncation above.
    int high_level = std::max(truncation, 40);
    std::vector<BlowupRow> rows =
        seminorm_blowup_report(x0, t, 0, {10, high_level});
    double ratio = rows[1].seminorm / rows[0].seminorm;
    report("counterexample/seminorm-divergence", "sequence",
           params + " levels=10," + std::to_string(high_level) +
               " ratio=" + format_double(ratio),
           1e6 / ratio, 1.0);
  } else if (a.which == "non-unique") {
    int k_max = a.truncation < 0 ? 9 : a.truncation;
    NonuniquenessReport rep =
        shift_nonuniqueness_demo(k_max, uniform_grid(0.1, 1.0, 9));
    if (!a.emit.empty()) {
      Table table;
      table.columns.push_back("t");
      for (int k = 0; k <= k_max; ++k)
        table.columns.push_back("x" + std::to_string(k));
      for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
        std::vector<double> row;
        row.push_back(rep.t_grid[i]);
        for (int k = 0; k <= k_max; ++k) row.push_back(rep.flat_solution[i][k]);
        table.rows.push_back(row);
      }
      emit_table(table, infer_format(a.format, a.emit), a.emit);
    }
    report("counterexample/non-unique-ode-residual", "sequence",
           "k_max=" + std::to_string(k_max) +
               " separation=" + format_double(rep.separation_at_half),
           std::max(rep.max_ode_residual, rep.max_initial_value), 1e-10);
  } else if (a.which == "transport") {
    double t = a.t < 0 ? 0.7 : a.t;
    auto x0 = [](double s) { return std::sin(s); };
    auto dx0 = [](double s) { return std::cos(s); };
    if (!a.emit.empty()) {
      Table table;
      table.columns = {"s", "x0_shifted", "x0_derivative"};
      for (double s : uniform_grid(0.0, 1.0, 32))
        table.rows.push_back({s, x0(s + t), dx0(s + t)});
      emit_table(table, infer_format(a.format, a.emit), a.emit);
    }
    report("counterexample/transport-flow", "sequence",
           "x0=sin t=" + format_double(t), transport_flow_residual(x0, dx0, t),
           1e-6);
  } else {
    throw UsageError("unknown counterexample '" + a.which +
                     "'; expected no-solution, non-unique, or transport");
  }
  return report.exit_code();
}

struct SuiteArgs {
  std::string name;
  std::uint64_t seed = 1;
};

int run_suite_cmd(const SuiteArgs& a) {
  auto start = std::chrono::steady_clock::now();
  std::vector<CheckReport> reports =
      run_suite(a.name, a.seed, [](const CheckReport& r) {
        std::cout << check_report_json(r) << "\n" << std::flush;
      });
  int failures = 0;
  for (const CheckReport& r : reports) failures += r.pass ? 0 : 1;
  double wall = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  std::cout << "{\"suite\":\"" << a.name << "\",\"seed\":" << a.seed
            << ",\"checks\":" << reports.size() << ",\"failures\":" << failures
            << ",\"wall_ms\":" << format_double(wall) << "}\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regulie: evolution operators, connections, and holonomy on "
               "concrete Lie groups"};
  app.require_subcommand(1);

  EvolveArgs ev;
  CLI::App* evolve_cmd =
      app.add_subcommand("evolve", "Solve g' = X(t).g (or g.X(t)) on [0,1]");
  evolve_cmd->add_option("--group", ev.group, "catalog group name")
      ->capture_default_str();
  evolve_cmd->add_option("--curve", ev.curve,
                         "generator, e.g. \"sin(t)*e1 + 0.5*e3\"")
      ->required();
  evolve_cmd->add_option("--side", ev.side, "right or left")
      ->check(CLI::IsMember({"right", "left"}))
      ->capture_default_str();
  evolve_cmd->add_option("--steps", ev.steps, "grid steps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  evolve_cmd->add_option("--emit", ev.emit, "write the path table to this file");
  evolve_cmd->add_option("--format", ev.format, "csv or json (default: by extension)")
      ->check(CLI::IsMember({"csv", "json"}));

  ChartArgs tr;
  CLI::App* transport_cmd = app.add_subcommand(
      "transport", "Parallel-transport a fiber point along a base path");
  ChartArgs hol;
  CLI::App* holonomy_cmd =
      app.add_subcommand("holonomy", "Transport around a closed loop");
  for (auto [cmd, args] : {std::pair{transport_cmd, &tr}, {holonomy_cmd, &hol}}) {
    cmd->add_option("--group", args->group, "catalog group name")
        ->capture_default_str();
    cmd->add_option("--form", args->form,
                    "connection coefficients per axis, ';'-separated, in x1..xm")
        ->required();
    cmd->add_option("--lo", args->lo, "box lower corner (default zeros)");
    cmd->add_option("--hi", args->hi, "box upper corner (default ones)");
    cmd->add_option("--path", args->path, "parametric base path components in t");
    cmd->add_option("--polygon", args->polygon,
                    "closed polygon corners \"x,y; x,y; ...\"");
    cmd->add_option("--start", args->start, "algebra coefficients of the start fiber");
    cmd->add_option("--steps", args->steps, "transport grid steps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--emit", args->emit, "write the lifted path table to this file");
    cmd->add_option("--format", args->format, "csv or json (default: by extension)")
        ->check(CLI::IsMember({"csv", "json"}));
  }

  DevelopArgs dv;
  CLI::App* develop_cmd = app.add_subcommand(
      "develop", "Integrate a flat 1-form to its group-valued primitive");
  develop_cmd->add_option("--group", dv.group, "catalog group name")
      ->capture_default_str();
  develop_cmd->add_option("--form", dv.form,
                          "form coefficients per axis, ';'-separated, in x1..xm")
      ->required();
  develop_cmd->add_option("--lo", dv.lo, "box lower corner (default zeros)");
  develop_cmd->add_option("--hi", dv.hi, "box upper corner (default ones)");
  develop_cmd->add_option("--x0", dv.x0, "basepoint (default the box lower corner)");
  develop_cmd->add_option("--at", dv.at, "evaluation points, repeatable")
      ->required();
  develop_cmd->add_option("--segment-steps", dv.segment_steps,
                          "integration steps per staircase leg")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  develop_cmd->add_option("--emit", dv.emit, "write the value table to this file");
  develop_cmd->add_option("--format", dv.format, "csv or json (default: by extension)")
      ->check(CLI::IsMember({"csv", "json"}));

  HomArgs hom;
  CLI::App* hom_cmd = app.add_subcommand(
      "integrate-hom", "Integrate a Lie algebra homomorphism to the groups");
  hom_cmd->add_option("--source", hom.source, "simply connected source group")
      ->capture_default_str();
  hom_cmd->add_option("--target", hom.target, "target group")
      ->capture_default_str();
  hom_cmd->add_option("--matrix", hom.matrix_path,
                      "file of target_dim x source_dim entries (default identity)");
  hom_cmd->add_option("--samples", hom.samples, "random pairs for the residual")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  hom_cmd->add_option("--seed", hom.seed, "sampling seed")->capture_default_str();

  CLI::App* construct_cmd =
      app.add_subcommand("construct", "Two-pipeline checks on derived groups");
  construct_cmd->require_subcommand(1);
  ConstructArgs cs, cx, ct, cc;
  CLI::App* semidirect_cmd = construct_cmd->add_subcommand(
      "semidirect", "Euclidean group R^3 x| SO(3), staged vs packed evolution");
  CLI::App* extension_cmd = construct_cmd->add_subcommand(
      "extension", "Heisenberg central extension, staged vs packed evolution");
  CLI::App* tangent_cmd = construct_cmd->add_subcommand(
      "tangent-group", "Tangent group TG, staged evolution vs tangent formula");
  CLI::App* conv_cmd = construct_cmd->add_subcommand(
      "conv", "Convolution group: evol intertwines * with the product");
  for (auto [cmd, args] :
       {std::pair{semidirect_cmd, &cs}, {extension_cmd, &cx}}) {
    cmd->add_option("--u", args->u, "normal-factor generator in t")->required();
    cmd->add_option("--y", args->y, "acting-factor generator in t")->required();
    cmd->add_option("--steps", args->steps, "grid steps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
  for (auto [cmd, args] : {std::pair{tangent_cmd, &ct}, {conv_cmd, &cc}}) {
    cmd->add_option("--group", args->group, "base catalog group")
        ->capture_default_str();
    cmd->add_option("--x", args->u, "first generator in t")->required();
    cmd->add_option("--y", args->y, "second generator in t")->required();
    cmd->add_option("--steps", args->steps, "grid steps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  CounterexampleArgs ce;
  CLI::App* counter_cmd = app.add_subcommand(
      "counterexample", "Weighted/plain shift pathologies and the transport flow");
  counter_cmd
      ->add_option("which", ce.which, "no-solution | non-unique | transport")
      ->required();
  counter_cmd->add_option("--truncation", ce.truncation,
                          "truncation level (no-solution) or top index (non-unique)");
  counter_cmd->add_option("--t", ce.t, "evaluation time");
  counter_cmd->add_option("--emit", ce.emit, "write the value table to this file");
  counter_cmd->add_option("--format", ce.format, "csv or json (default: by extension)")
      ->check(CLI::IsMember({"csv", "json"}));

  SuiteArgs su;
  CLI::App* suite_cmd = app.add_subcommand(
      "suite", "Run a verification suite and stream JSON check reports");
  suite_cmd
      ->add_option("name", su.name,
                   "all | evolution | bundles | constructions | lie-theory | "
                   "counterexamples")
      ->required();
  suite_cmd->add_option("--seed", su.seed, "seed for randomized checks")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
    if (*evolve_cmd) return run_evolve(ev);
    if (*transport_cmd) return run_transport(tr);
    if (*holonomy_cmd) return run_holonomy(hol);
    if (*develop_cmd) return run_develop(dv);
    if (*hom_cmd) return run_integrate_hom(hom);
    if (*semidirect_cmd) return run_construct_semidirect(cs);
    if (*extension_cmd) return run_construct_extension(cx);
    if (*tangent_cmd) return run_construct_tangent(ct);
    if (*conv_cmd) return run_construct_conv(cc);
    if (*counter_cmd) return run_counterexample(ce);
    if (*suite_cmd) return run_suite_cmd(su);
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const CLI::Error& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const regulie::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const regulie::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
