#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "oscilla/field.hpp"
#include "oscilla/report.hpp"

namespace oscilla {

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_solver = 3 };

/// Subcommands: eval-h, eval-k, beta, psi, gamma, denoise, pack-bench, report, run.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Keys accepted by a subcommand with their defaults ("" = no default).
std::vector<std::pair<std::string, std::string>> command_keys(const std::string& command);

/// Resolves defaults < config file values < explicit values, rejecting unknown keys.
RunConfig resolve_config(const std::string& command, const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& flag_values);

/// Executes a resolved config; returns the report (also written to config "out").
Report execute(const RunConfig& config, std::ostream& out);

/// The field named by "input", or a synthetic one described by "source".
ScalarField field_from_config(const RunConfig& config);

}  // namespace oscilla
