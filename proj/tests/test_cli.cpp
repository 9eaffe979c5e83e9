// End-to-end tests of the regulie binary (spawned as a subprocess): exit
// codes, the JSON report stream, determinism, table emission and parse-back.
// Also unit tests of the table/report serializers these commands share.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "regulie/catalog.hpp"
#include "regulie/checks.hpp"
#include "regulie/evolution.hpp"
#include "regulie/io.hpp"

using namespace regulie;
using nlohmann::json;

namespace {

std::string cli_path() {
  if (const char* env = std::getenv("REGULIE_CLI_PATH")) return env;
#ifdef REGULIE_CLI_PATH
  return REGULIE_CLI_PATH;
#else
  return "./regulie";
#endif
}

std::filesystem::path temp_file(const std::string& suffix) {
  static int counter = 0;
  return std::filesystem::temp_directory_path() /
         ("regulie-cli-" + std::to_string(::getpid()) + "-" +
          std::to_string(counter++) + suffix);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CliResult {
  int code = -1;
  std::string out, err;
};

CliResult run_cli(const std::string& args) {
  auto outp = temp_file(".out");
  auto errp = temp_file(".err");
  std::string cmd = "\"" + cli_path() + "\" " + args + " > " + outp.string() +
                    " 2> " + errp.string();
  int raw = std::system(cmd.c_str());
  CliResult r;
  r.code = (raw == -1) ? -1 : WEXITSTATUS(raw);
  r.out = slurp(outp);
  r.err = slurp(errp);
  std::filesystem::remove(outp);
  std::filesystem::remove(errp);
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  for (const std::string& line : lines_of(text)) {
    std::vector<std::string> cells;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

/// Report stream with wall-time fields removed, for determinism comparison.
std::string stable_stream(const std::string& text) {
  std::ostringstream os;
  for (const std::string& line : lines_of(text)) {
    json j = json::parse(line);
    j.erase("wall_ms");
    os << j.dump() << "\n";
  }
  return os.str();
}

}  // namespace

TEST_CASE("serializers: 17-digit floats survive a parse round trip") {
  for (double x : {0.1, -1.0 / 3.0, 1.2345678901234567e-300, 6.02214076e23,
                   -0.0, 16.019032}) {
    CHECK(std::stod(format_double(x)) == x);
  }

  Table empty{{"t", "x1"}, {}};
  CHECK(table_csv(empty) == "t,x1\n");
  CHECK(table_json(empty) == "[]");
  CHECK(json::parse(table_json(empty)).empty());

  Table one{{"a", "b"}, {{0.5, -2.0}}};
  json parsed = json::parse(table_json(one));
  CHECK(parsed.size() == 1);
  CHECK(parsed[0]["a"].get<double>() == 0.5);
  CHECK(parsed[0]["b"].get<double>() == -2.0);

  CHECK_THROWS_AS(emit_table(one, "xml", temp_file(".xml").string()), UsageError);
  CHECK_THROWS_AS(write_text_file("/nonexistent-dir/f.csv", "x"), IoError);
  CHECK_THROWS_AS(read_text_file("/nonexistent-dir/f.csv"), IoError);
}

TEST_CASE("serializers: an evolution path becomes a t + entries table") {
  auto so3 = find_group("so3");
  EvolutionResult res = evolve(
      curve_from_function(so3, [](double) { return Vec(Vec::Ones(3) * 0.2); }),
      Side::Right, 8);
  Table t = path_table(res.path);
  REQUIRE(t.columns.size() == 10);  // t plus the 3x3 entries
  CHECK(t.columns[0] == "t");
  CHECK(t.columns[1] == "m1_1");
  CHECK(t.columns.back() == "m3_3");
  REQUIRE(t.rows.size() == 9);
  CHECK(t.rows[0][0] == 0.0);
  CHECK(t.rows[0][1] == 1.0);  // identity at t = 0
  CHECK(t.rows.back()[0] == 1.0);
}

TEST_CASE("suite stream: reports parse, pass is the tolerance comparison, exit 0") {
  CliResult r = run_cli("suite counterexamples --seed 1");
  CHECK(r.code == 0);
  std::vector<std::string> lines = lines_of(r.out);
  REQUIRE(lines.size() >= 2);

  json summary = json::parse(lines.back());
  CHECK(summary["suite"] == "counterexamples");
  CHECK(summary["failures"].get<int>() == 0);
  CHECK(summary["checks"].get<int>() == static_cast<int>(lines.size()) - 1);

  std::string previous_id;
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    json j = json::parse(lines[i]);
    for (const char* key :
         {"check", "group", "params", "residual", "tolerance", "pass", "wall_ms"})
      REQUIRE(j.contains(key));
    CHECK(j["pass"].get<bool>() ==
          (j["residual"].get<double>() <= j["tolerance"].get<double>()));
    std::string id = j["check"].get<std::string>();
    CHECK(previous_id < id);  // streamed in check-id order
    previous_id = id;
  }
}

TEST_CASE("suite stream: identical seeds are byte-identical modulo wall time") {
  CliResult a = run_cli("suite counterexamples --seed 7");
  CliResult b = run_cli("suite counterexamples --seed 7");
  CHECK(a.code == 0);
  CHECK(stable_stream(a.out) == stable_stream(b.out));
}

TEST_CASE("suite: unknown names and missing arguments exit with the usage code") {
  CHECK(run_cli("suite nonsense").code == 2);
  CHECK(run_cli("suite").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("evolve --group so3").code == 2);  // --curve is required
  CHECK(run_cli("evolve --curve \"t*e1\" --side sideways").code == 2);
  CHECK(run_cli("counterexample bogus").code == 2);
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("tolerance scale env var rescales every reported tolerance") {
  // The transport-flow residual (~1.6e-7) passes at scale 1 and cannot pass
  // once the 1e-6 tolerance is scaled down to 1e-36.
  ::setenv("REGULIE_TOLERANCE_SCALE", "1e-30", 1);
  CliResult strict = run_cli("counterexample transport");
  ::unsetenv("REGULIE_TOLERANCE_SCALE");
  CHECK(strict.code == 1);
  json report = json::parse(lines_of(strict.out).back());
  CHECK(report["pass"].get<bool>() == false);
  CHECK(report["tolerance"].get<double>() == doctest::Approx(1e-36).epsilon(1e-6));

  CliResult relaxed = run_cli("counterexample transport");
  CHECK(relaxed.code == 0);

  ::setenv("REGULIE_TOLERANCE_SCALE", "banana", 1);
  CliResult broken = run_cli("counterexample transport");
  ::unsetenv("REGULIE_TOLERANCE_SCALE");
  CHECK(broken.code == 2);
}

TEST_CASE("evolve: emitted CSV parses back to the reported endpoint") {
  auto csv = temp_file(".csv");
  CliResult r = run_cli(
      "evolve --group so3 --curve \"sin(t)*e1 + cos(2*t)*e2 + t*e3\" "
      "--steps 64 --emit " + csv.string());
  REQUIRE(r.code == 0);

  json record = json::parse(lines_of(r.out)[0]);
  CHECK(record["record"] == "evolve");
  std::vector<double> endpoint = record["endpoint"].get<std::vector<double>>();
  REQUIRE(endpoint.size() == 9);

  auto rows = parse_csv(slurp(csv));
  std::filesystem::remove(csv);
  REQUIRE(rows.size() == 66);  // header + 65 nodes
  CHECK(rows[0][0] == "t");
  CHECK(rows[0].size() == 10);
  // First node is the identity at t = 0.
  CHECK(std::stod(rows[1][0]) == 0.0);
  CHECK(std::stod(rows[1][1]) == 1.0);
  CHECK(std::stod(rows[1][2]) == 0.0);
  // Last node reproduces the endpoint record exactly (same 17-digit floats).
  CHECK(std::stod(rows.back()[0]) == 1.0);
  for (int i = 0; i < 9; ++i)
    CHECK(std::stod(rows.back()[static_cast<std::size_t>(i + 1)]) == endpoint[static_cast<std::size_t>(i)]);
}

TEST_CASE("evolve: JSON emission round-trips through a generic parser") {
  auto out = temp_file(".json");
  CliResult r = run_cli("evolve --group su2 --curve \"0.3*e1 + t*e2\" --steps 32 --emit " +
                        out.string());
  REQUIRE(r.code == 0);
  json arr = json::parse(slurp(out));
  std::filesystem::remove(out);
  REQUIRE(arr.is_array());
  REQUIRE(arr.size() == 33);
  CHECK(arr[0]["t"].get<double>() == 0.0);
  CHECK(arr.back()["t"].get<double>() == 1.0);
  CHECK(arr[0]["m1_1"].get<double>() == 1.0);
  for (const auto& row : arr) CHECK(row.size() == 17);  // t + 4x4 entries
}

TEST_CASE("holonomy: the abelian unit square reproduces the closed form") {
  CliResult r = run_cli(
      "holonomy --group rn:1 --form \"0; x1*e1\" "
      "--polygon \"0,0; 1,0; 1,1; 0,1\" --steps 1024");
  REQUIRE(r.code == 0);
  json record = json::parse(lines_of(r.out)[0]);
  CHECK(record["record"] == "holonomy");
  CHECK(record["closure_gap"].get<double>() <= 1e-12);
  std::vector<double> hol = record["holonomy"].get<std::vector<double>>();
  REQUIRE(hol.size() == 1);
  CHECK(hol[0] == doctest::Approx(-1.0).epsilon(1e-9));

  // An open path is a loop error, not a usage error: exit 1.
  CliResult open = run_cli(
      "holonomy --group rn:1 --form \"0; x1*e1\" --path \"t, t*t\"");
  CHECK(open.code == 1);
}

TEST_CASE("develop: curved input is rejected with a nonzero exit") {
  CliResult r = run_cli(
      "develop --group so3 --form \"0; x1*e1\" --at \"0.5,0.5\"");
  CHECK(r.code == 1);
  CHECK(r.err.find("not flat") != std::string::npos);

  CliResult flat = run_cli(
      "develop --group so3 --form \"0.8*e1; 0\" --at \"1,1\"");
  REQUIRE(flat.code == 0);
  json record = json::parse(lines_of(flat.out)[0]);
  std::vector<double> value = record["value"].get<std::vector<double>>();
  REQUIRE(value.size() == 9);
  // f(1,1) = exp(0.8 e1): rotation by 0.8 about the first axis.
  CHECK(value[4] == doctest::Approx(std::cos(0.8)).epsilon(1e-9));
  CHECK(value[7] == doctest::Approx(std::sin(0.8)).epsilon(1e-9));
}

TEST_CASE("integrate-hom: matrix files are validated before integration") {
  CliResult ok = run_cli("integrate-hom --source su2 --target so3 --samples 25");
  CHECK(ok.code == 0);
  std::vector<std::string> lines = lines_of(ok.out);
  REQUIRE(lines.size() == 2);
  for (const std::string& line : lines)
    CHECK(json::parse(line)["pass"].get<bool>());

  // A scaled identity is not a bracket homomorphism on so(3).
  auto bad = temp_file(".txt");
  write_text_file(bad.string(), "0.5 0 0\n0 0.5 0\n0 0 0.5\n");
  CliResult rejected = run_cli("integrate-hom --source su2 --target so3 --matrix " +
                               bad.string());
  std::filesystem::remove(bad);
  CHECK(rejected.code == 1);
  CHECK(rejected.err.find("bracket") != std::string::npos);

  CliResult missing = run_cli("integrate-hom --source su2 --target so3 --matrix /nonexistent-dir/m.txt");
  CHECK(missing.code == 1);

  // Wrong entry count is a usage problem.
  auto skew = temp_file(".txt");
  write_text_file(skew.string(), "1 0 0 0\n");
  CliResult wrong = run_cli("integrate-hom --source su2 --target so3 --matrix " +
                            skew.string());
  std::filesystem::remove(skew);
  CHECK(wrong.code == 2);
}

TEST_CASE("construct: all four derived-group pipelines agree on smooth data") {
  CHECK(run_cli("construct semidirect --u \"sin(t)*e1 + 0.3*e3\" --y \"cos(t)*e2\" --steps 256").code == 0);
  CHECK(run_cli("construct extension --u \"0.4*e1\" --y \"sin(t)*e1 + t*e2\" --steps 256").code == 0);
  CHECK(run_cli("construct tangent-group --group so3 --x \"sin(t)*e1+0.5*e2\" --y \"t*e3\" --steps 256").code == 0);
  CHECK(run_cli("construct conv --group so3 --x \"sin(t)*e1\" --y \"cos(t)*e2\" --steps 128").code == 0);
  CHECK(run_cli("construct").code == 2);  // a subcommand is required
}

TEST_CASE("counterexample: emitted no-solution table carries the factorial growth") {
  auto csv = temp_file(".csv");
  CliResult r = run_cli("counterexample no-solution --truncation 10 --t 0.3 --emit " +
                        csv.string());
  REQUIRE(r.code == 0);
  // Both report lines (ODE agreement and seminorm divergence) must pass.
  for (const std::string& line : lines_of(r.out))
    if (json::parse(line).contains("pass")) CHECK(json::parse(line)["pass"].get<bool>());

  auto rows = parse_csv(slurp(csv));
  std::filesystem::remove(csv);
  REQUIRE(rows.size() == 10);  // header + 9 grid times
  REQUIRE(rows[0].size() == 12);  // t, x0..x10
  CHECK(rows[0][1] == "x0");
  // Last row is t = 0.3: x_n = n! 0.3^n for the delta start.
  double x10 = std::stod(rows.back()[11]);
  CHECK(x10 == doctest::Approx(3628800.0 * std::pow(0.3, 10)).epsilon(1e-10));
  CHECK(std::stod(rows.back()[1]) == 1.0);
}
