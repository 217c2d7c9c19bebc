#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "mdual/errors.hpp"
#include "mdual/fixtures.hpp"
#include "mdual/io.hpp"
#include "support.hpp"

namespace mdual {
namespace {

namespace fs = std::filesystem;
using test::fixture_file;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mdual_io_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string parse_error_message(const std::string& text) {
  try {
    problem_file_from_json(parse_json(text, "input.json"), "x");
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

TEST(Json, MalformedReportsLineAndColumn) {
  const std::string msg = parse_error_message("{\n  \"schema\": \"measure-duality/v1\",\n  \"grid\": ]\n}");
  EXPECT_NE(msg.find("input.json:3:"), std::string::npos) << msg;
  EXPECT_EQ(msg.rfind("ParseError", 0), 0u) << msg;
}

TEST(Json, StrictSchema) {
  Json j = make_fixture("area_tau0_4");
  j["extra"] = 1;
  EXPECT_THROW(problem_file_from_json(j, "x"), ParseError);
  j = make_fixture("area_tau0_4");
  j["schema"] = "measure-duality/v0";
  EXPECT_THROW(problem_file_from_json(j, "x"), ParseError);
  j = make_fixture("area_tau0_4");
  j.erase("schema");
  EXPECT_THROW(problem_file_from_json(j, "x"), ParseError);
  j = make_fixture("area_tau0_4");
  j["grid"]["periodic"] = "yes";
  EXPECT_THROW(problem_file_from_json(j, "x"), ParseError);
  j = make_fixture("area_tau0_4");
  j["integrand"] = "cosh";
  EXPECT_THROW(problem_file_from_json(j, "x"), ParseError);
  j = make_fixture("area_tau0_4");
  j["tau"] = {1.0, 0.0, 0.0, -1.0};
  EXPECT_THROW(problem_file_from_json(j, "x"), ParseError);
}

TEST(Json, IntegrandAndOperatorForms) {
  const Grid g = Grid::line(4);
  EXPECT_EQ(integrand_from_json("huber(0.5)", g, 1).name(), "huber(0.5)");
  const Json tab = {{"kind", "tabulated"}, {"points", {{0.0, -1.0, 1.0}, {0.0, 0.0, 0.0}, {0.0, 1.0, 1.0}}}};
  EXPECT_EQ(integrand_from_json(tab, g, 1)(test::vec({0.0}), test::vec({0.5})), 0.5);
  const Json custom = {{"name", "custom"}, {"rows", 1}, {"cols", 4}, {"triplets", {{0, 0, 1.0}, {0, 3, -1.0}}}};
  const ConstraintOperator a = operator_from_json(custom, g, 1);
  EXPECT_EQ(a.rows(), 1);
  EXPECT_EQ(a.apply(test::vec({2, 0, 0, 1}))[0], 1.0);
  const Json zero = {{"name", "gradient_1d"}, {"boundary", "zero"}};
  EXPECT_EQ(operator_from_json(zero, g, 1).boundary(), Boundary::zero);
  EXPECT_THROW(operator_from_json(Json{{"name", "gradient_1d"}, {"stencil", 2}}, g, 1), ParseError);
}

TEST(Json, MeasureRoundTripPairsIdentically) {
  const ProblemFile f = fixture_file("relax_atom_256");
  const DiscreteMeasure& mu = *f.measure;
  const std::string text = dump_json(measure_to_json(mu, true));
  const DiscreteMeasure back = measure_from_json(parse_json(text, "m"), mu.grid(), 1);
  for (const Vector& phi : default_panel(mu.grid(), 1)) {
    EXPECT_EQ(weak_star_pair(mu, phi), weak_star_pair(back, phi));
  }
}

TEST(Json, NumbersAndInfinities) {
  EXPECT_EQ(number_to_json(ExtendedReal::minus_infinity()), "-inf");
  EXPECT_EQ(number_to_json(ExtendedReal::plus_infinity()), "+inf");
  EXPECT_EQ(number_to_json(0.25), 0.25);
}

TEST(Fixtures, CheckedInFilesMatchGenerator) {
  const fs::path dir = MDUAL_FIXTURE_DIR;
  std::size_t count = 0;
  for (const auto& [id, json] : standard_fixtures()) {
    const fs::path path = dir / (id + ".json");
    ASSERT_TRUE(fs::exists(path)) << path;
    EXPECT_EQ(read_file(path), dump_json(json)) << id;
    EXPECT_EQ(load_problem_file(path.string()).problem.id(), id);
    ++count;
  }
  EXPECT_EQ(count, fixture_ids().size());
}

TEST(Table, OneReportIsTwoLines) {
  cli::TableRow row;
  row.fixture = "f";
  row.relaxed_energy = 1.0 / 3.0;
  row.gap = 0.0;
  const std::string csv = cli::emit_table({row});
  EXPECT_EQ(csv,
            "fixture,relaxed_energy,dual_value,gap,ac_residual,singular_residual,verdict\n"
            "f,0.333333333333,n-a,0,n-a,n-a,n-a\n");
  row.verdict = "";
  EXPECT_EQ(cli::emit_table({row}).find(",\n"), std::string::npos);
  EXPECT_EQ(cli::format_number(-INFINITY), "-inf");
  EXPECT_EQ(cli::format_number(-0.0), "0");
}

TEST(Cli, ParseListAndConfig) {
  EXPECT_EQ(cli::parse_list("0.1,0.05,0.025,0.0125").size(), 4u);
  EXPECT_THROW(cli::parse_list("0.1,x"), ParseError);
  const cli::RunConfig c = cli::config_from_json(
      Json{{"command", "check-optimality"}, {"seed", 4}, {"schedule", "0.2,0.1,0.05,0.01"}});
  EXPECT_EQ(c.command, cli::Command::check_optimality);
  EXPECT_EQ(c.seed, 4u);
  EXPECT_THROW(cli::config_from_json(Json{{"comand", "solve"}}), ParseError);
  EXPECT_THROW(cli::command_from_string("optimize"), ParseError);
}

int run_cli(cli::RunConfig cfg, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream o;
  std::ostringstream e;
  const int code = cli::run(cfg, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

std::string fixture_path(const std::string& id) {
  return (fs::path(MDUAL_FIXTURE_DIR) / (id + ".json")).string();
}

TEST(Cli, SolveFixtureExitsZero) {
  cli::RunConfig cfg;
  cfg.command = cli::Command::solve;
  cfg.input = fixture_path("area_1d_16");
  std::string out;
  ASSERT_EQ(run_cli(cfg, &out), 0);
  const Json j = parse_json(out, "stdout");
  EXPECT_LE(j["reports"][0]["gap"].get<double>(), 1e-3);
  EXPECT_EQ(j["reports"][0]["fixture"], "area_1d_16");
}

TEST(Cli, PerturbedPairFailsOptimality) {
  cli::RunConfig cfg;
  cfg.command = cli::Command::check_optimality;
  cfg.input = fixture_path("mass_atom_128_perturbed");
  EXPECT_EQ(run_cli(cfg), 2);
  cfg.input = fixture_path("mass_atom_128");
  EXPECT_EQ(run_cli(cfg), 0);
}

TEST(Cli, MalformedJsonExitsOne) {
  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << "{\"schema\": \"measure-duality/v1\",\n \"grid\": {,}}";
  cli::RunConfig cfg;
  cfg.input = bad.string();
  std::string err;
  EXPECT_EQ(run_cli(cfg, nullptr, &err), 1);
  EXPECT_NE(err.find("ParseError"), std::string::npos);
  EXPECT_NE(err.find("bad.json:2:"), std::string::npos) << err;
}

TEST(Cli, ModuleErrorsSurfaceByName) {
  cli::RunConfig cfg;
  cfg.command = cli::Command::recession;
  cfg.input = fixture_path("area_tau0_4");
  cfg.at = {1.0, 2.0};
  std::string err;
  EXPECT_EQ(run_cli(cfg, nullptr, &err), 1);
  EXPECT_NE(err.find("DimensionMismatch"), std::string::npos) << err;
  cfg.command = cli::Command::relax;
  EXPECT_EQ(run_cli(cfg, nullptr, &err), 1);
}

TEST(Cli, CommandsOnAtomFixture) {
  cli::RunConfig cfg;
  cfg.input = fixture_path("mass_atom_128");
  cfg.output = scratch("atom.csv").string();
  for (auto c : {cli::Command::relax, cli::Command::gap, cli::Command::pairing}) {
    cfg.command = c;
    EXPECT_EQ(run_cli(cfg), 0) << cli::to_string(c);
    EXPECT_FALSE(fs::exists(cfg.output + ".tmp"));
    const std::string csv = read_file(cfg.output);
    EXPECT_NE(csv.find("mass_atom_128,"), std::string::npos);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
  }
  cfg.command = cli::Command::conjugate;
  cfg.at = {0.5};
  EXPECT_EQ(run_cli(cfg), 0);
  cfg.command = cli::Command::recession;
  cfg.at = {-2.0};
  EXPECT_EQ(run_cli(cfg), 0);
}

TEST(Cli, SweepRowsShrinkWithRadius) {
  cli::RunConfig cfg;
  cfg.command = cli::Command::solve;
  cfg.input = fixture_path("area_tau0_4");
  cfg.output = scratch("sweep.csv").string();
  cfg.sweep = {0.1, 0.01, 0.001};
  ASSERT_EQ(run_cli(cfg), 0);
  std::istringstream csv(read_file(cfg.output));
  std::string line;
  std::getline(csv, line);
  EXPECT_NE(line.find("energy_shift"), std::string::npos);
  std::vector<double> shifts;
  while (std::getline(csv, line)) shifts.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  ASSERT_EQ(shifts.size(), 3u);
  EXPECT_GE(shifts[0], shifts[1]);
  EXPECT_GE(shifts[1], shifts[2]);
}

TEST(Cli, OracleSkipsLargeFixturesAndIsDeterministic) {
  const fs::path dir = scratch("oracle_dir");
  fs::create_directories(dir);
  for (const char* id : {"nogap_area_N2", "area_1d_16"}) {
    std::ofstream(dir / (std::string(id) + ".json")) << dump_json(make_fixture(id));
  }
  cli::RunConfig cfg;
  cfg.command = cli::Command::oracle;
  cfg.fixture_dir = dir.string();
  cfg.output = scratch("oracle.csv").string();
  ASSERT_EQ(run_cli(cfg), 0);
  const std::string first = read_file(cfg.output);
  ASSERT_EQ(run_cli(cfg), 0);
  EXPECT_EQ(first, read_file(cfg.output));
  // Rows are ordered by fixture id; the 16-cell dual is too large to scan.
  EXPECT_EQ(first.find("area_1d_16,n-a"), first.find('\n') + 1) << first;
  EXPECT_NE(first.find("nogap_area_N2,"), std::string::npos);
}

}  // namespace
}  // namespace mdual
