#include <iostream>
#include <locale>
#include <string>

#include "CLI11.hpp"
#include "quasiopt_cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace quasiopt::cli;
  std::cout.imbue(std::locale::classic());

  CLI::App app{"Optimal control of underactuated mechanical systems in quasivelocities", "quasiopt"};
  std::string command;
  std::string config_path;
  std::string output;
  std::string format;
  std::uint64_t seed = 0;
  app.add_option("command", command, "derive | simulate | solve | check")
      ->required()
      ->check(CLI::IsMember({"derive", "simulate", "solve", "check"}));
  app.add_option("--config", config_path, "run configuration file")->required();
  auto* out_opt = app.add_option("--output", output, "trajectory output path (default: stdout)");
  auto* fmt_opt = app.add_option("--format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return kExitConfigError;
  }
  const Command cmd = *parse_command(command);
  if (cfg.command && *cfg.command != cmd) {
    const auto it = cfg.positions.find("run.command");
    const Position pos = it == cfg.positions.end() ? Position{} : it->second;
    std::cerr << config_path << ": " << ConfigError(pos, "config names command '" + to_string(*cfg.command) +
                                                             "' but '" + command + "' was requested")
                                            .what()
              << "\n";
    return kExitConfigError;
  }
  cfg.command = cmd;
  if (*out_opt) cfg.output.path = output;
  if (*fmt_opt) cfg.output.format = format == "jsonl" ? OutputFormat::jsonl : OutputFormat::csv;
  if (*seed_opt) cfg.seed = seed;
  return run(cfg, std::cout, std::cerr);
}
