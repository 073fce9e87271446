#pragma once

// Command-line front end: configuration, dispatch and output files.

#include "mems/core.hpp"
#include "mems/dynamics.hpp"
#include "mems/statics.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace mems {

enum class Command { Steady, Bifurcation, PullinStatic, Evolve, PullinDynamic, Limit };

std::string_view to_string(Command c);

struct RunConfig {
    Command command = Command::Steady;
    Params params;
    double dx = 5e-3;
    double deta = 5e-3;
    double dt = 0.0; ///< 0: 1e-5 for heat, 2e-3 for wave
    Tolerances tolerances;
    Equation equation = Equation::Heat;
    Branch branch = Branch::upper();
    std::filesystem::path output_dir = "out";
    int sample_every = 100;
    int n_points = 24;
    std::vector<double> snapshot_times;

    double effective_dt() const;
    Grid grid() const;
    /// Throws ConfigError on any invalid field.
    void validate() const;
};

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNoConvergence = 2;
inline constexpr int kExitInvalidConfig = 3;

/// Parses argv (flags, optional `--config file` of `key = value` lines).
/// Throws ConfigError on bad input; `help` is set when --help was requested
/// and the usage text has been written to `log`.
RunConfig parse_command_line(int argc, const char* const* argv, std::ostream& log, bool& help);

/// Runs the configured command, writing outputs under config.output_dir and
/// a short report to `log`. Returns the process exit code.
int run(const RunConfig& config, std::ostream& log);

/// parse_command_line + run with exit-code mapping.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mems
