#include <iostream>

#include <CLI11.hpp>

#include "singint/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Singular integral asymptotics over the quadric x.y = 0"};
  std::string config;
  singint::CliOverrides o;
  std::uint64_t seed = 0;
  std::int64_t budget = 0;
  std::string out;
  std::string command;
  app.add_option("--config", config, "Config file (INI sections [run], [F], [Gamma], ...)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Random seed");
  auto* budget_opt = app.add_option("--budget", budget, "Monte Carlo budget per estimate");
  auto* out_opt = app.add_option("--out", out, "Output directory");
  auto* cmd_opt = app.add_option("--command", command, "Command, overrides the config")
                      ->check(CLI::IsMember({"verify-asymptotic", "surface-integral",
                                             "geometry-check", "measure-check", "variants",
                                             "stationary-phase"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (*seed_opt) o.seed = seed;
  if (*budget_opt) o.budget = budget;
  if (*out_opt) o.out = out;
  if (*cmd_opt) o.command = command;
  return singint::run(config, o, std::cerr);
}
