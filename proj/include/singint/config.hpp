#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "singint/fields.hpp"

namespace singint {

inline constexpr const char* kCommands[] = {"verify-asymptotic", "surface-integral",
                                            "geometry-check",    "measure-check",
                                            "variants",          "stationary-phase"};

struct FieldSpec {
  std::string name;
  Params params;
};

struct RunConfig {
  std::string command = "verify-asymptotic";
  int d = 2;
  FieldSpec F{"gaussian", {}};
  FieldSpec Gamma{"const", {{"c", 1.0}}};
  std::vector<double> nu_sweep;  // empty: default sweep for d
  std::int64_t budget = 2000000;
  std::uint64_t seed = 1;
  double theta0 = 0.1;
  std::filesystem::path output_dir = "out";
  bool plot = false;

  // [variants]
  std::string variant = "sphere";  // d1 | sphere | linear_divisor | kinetic
  double k_mod = 2.0;

  // [stationary_phase]
  int sp_n = 1;
  std::vector<double> lambdas{20.0, 40.0, 80.0, 160.0};
  double sp_box = 4.25;
  double sp_shift = 0.1;
  double resolvent_radius = 1.0;

  // [measure]
  double m_norm = 4.0;

  /// Normalized key = value snapshot, recorded in the run log.
  std::vector<std::pair<std::string, std::string>> snapshot;
};

/// Parses the INI-style config. Throws ConfigInvalid with the offending key in the message.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> budget;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> command;
};

void apply_overrides(RunConfig& cfg, const CliOverrides& o);

/// Runs the configured command and writes <out>/<command>.csv, appends to <out>/runs.jsonl and
/// writes <out>/<command>.plot.txt when plotting is on. Returns 0 on pass, 2 when a check fails,
/// 1 on error (message on `err`).
int run(const RunConfig& cfg, std::ostream& err);
int run(const std::filesystem::path& config_file, const CliOverrides& overrides, std::ostream& err);

}  // namespace singint
