// Command-line front end: kimura_lab <command> --config run.json [--seed S] [--workers K] [--out DIR]

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <kimura/config.hpp>
#include <kimura/errors.hpp>
#include <kimura/runner.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo laboratory for generalized Kimura diffusions"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out_dir;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"validate", "check the model assumptions"},
      {"simulate", "simulate paths and write paths.csv (and weights.csv for singular models)"},
      {"diagnose", "run the experiments listed in the config"},
      {"compare", "compare reweighted standard paths with direct singular paths"},
      {"holder", "estimate WF Hoelder seminorms of the coefficients"},
      {"report", "print the summary of an existing report.json"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration")->required(name != "report");
    sub->add_option("--seed", seed, "override sim.master_seed");
    sub->add_option("--workers", workers, "worker threads (0 = all cores)");
    sub->add_option("--out", out_dir, "override output_dir");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  const std::string command_name = app.get_subcommands().front()->get_name();
  try {
    const kimura::Command command = kimura::command_from_string(command_name);
    kimura::RunOutcome outcome;
    if (command == kimura::Command::kReport && config_path.empty()) {
      if (out_dir.empty()) {
        std::cerr << "error: report needs --out or --config\n";
        return 3;
      }
      outcome = kimura::read_report(out_dir);
    } else {
      kimura::RunConfig config = kimura::load_config(config_path);
      if (seed) {
        config.sim.master_seed = *seed;
      }
      if (workers) {
        config.sim.workers = *workers;
      }
      if (!out_dir.empty()) {
        config.output_dir = out_dir;
      }
      outcome = kimura::run(config, command);
    }
    std::cout << kimura::summary_table(outcome.reports);
    for (const auto& file : outcome.written) {
      std::cout << "wrote " << file << '\n';
    }
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
