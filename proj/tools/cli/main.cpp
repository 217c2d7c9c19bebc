#include <CLI11.hpp>

#include <iostream>

#include "cli.hpp"
#include "mdual/errors.hpp"

int main(int argc, char** argv) {
  using namespace mdual;
  CLI::App app{"Primal/dual solver and optimality checker for linear-growth problems"};
  app.set_help_flag("-h,--help", "Print this help message and exit");

  std::string command;
  std::string positional_input;
  std::string input;
  std::string config_path;
  std::string schedule;
  std::string at;
  std::string sweep;
  cli::RunConfig cfg;
  double tol_gap = 0.0;
  double tol_ac = 0.0;

  app.add_option("command", command,
                 "solve | conjugate | recession | relax | gap | pairing | check-optimality | oracle");
  app.add_option("file", positional_input, "Problem file or directory");
  app.add_option("--input", input, "Problem file or directory");
  app.add_option("--output", cfg.output, "Report path; a .csv suffix writes the table");
  app.add_option("--fixtures", cfg.fixture_dir, "Fixture root for oracle (else MD_FIXTURE_DIR)");
  auto* tg = app.add_option("--tol-gap", tol_gap, "Duality gap tolerance");
  auto* ta = app.add_option("--tol-ac", tol_ac, "Absolutely continuous residual tolerance");
  app.add_option("--seed", cfg.seed, "Seed for randomized starts");
  app.add_option("--schedule", schedule, "Mollification radii, e.g. 0.1,0.05,0.025,0.0125");
  app.add_option("--at", at, "Point z* (conjugate) or direction z (recession), comma separated");
  app.add_option("--sweep", sweep, "solve: mollification radii to compare against");
  app.add_option("--config", config_path, "JSON run configuration (strict keys)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: ParseError: " << e.what() << "\n";
    return 1;
  }

  try {
    if (!config_path.empty()) {
      const cli::RunConfig file_cfg = cli::config_from_json(load_json_file(config_path));
      const std::string output = cfg.output;
      const std::uint64_t seed = cfg.seed;
      cfg = file_cfg;
      if (!output.empty()) cfg.output = output;
      if (seed != 0) cfg.seed = seed;
    }
    if (!command.empty()) cfg.command = cli::command_from_string(command);
    if (command.empty() && config_path.empty()) throw ParseError("no command given");
    if (!positional_input.empty() && !input.empty() && positional_input != input) {
      throw ParseError("conflicting input paths '" + positional_input + "' and '" + input + "'");
    }
    if (!input.empty()) cfg.input = input;
    if (!positional_input.empty()) cfg.input = positional_input;
    if (*tg) cfg.tol_gap = tol_gap;
    if (*ta) cfg.tol_ac = tol_ac;
    if (!schedule.empty()) cfg.schedule = cli::parse_list(schedule);
    if (!at.empty()) cfg.at = cli::parse_list(at);
    if (!sweep.empty()) cfg.sweep = cli::parse_list(sweep);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return cli::run(cfg, std::cout, std::cerr);
}
