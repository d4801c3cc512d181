#pragma once

#include "erbr/fitting.hpp"
#include "erbr/recovery.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace erbr::cli {

enum ExitCode : int {
    kSuccess = 0,
    kModelInconsistent = 1,  // a diagnosis: not ERBR, no recovery root, ...
    kInputError = 2,
};

/// Settings shared by the commands. A config file uses the same field names;
/// flags given on the command line override it.
struct RunConfig {
    std::uint64_t seed = 0;
    double tol = 1e-8;
    std::size_t anchor = 0;
    int max_cycle_len = 4;
    FitConfig fit;
    RecoveryConfig recovery;
    bool recover = true;
    std::string out_dir;

    /// ConfigurationError on non-positive tolerances or empty ranges.
    void validate() const;
};

/// Parses a JSON config:
///   {"seed": 0, "tol": 1e-8, "anchor": 0, "max_cycle_len": 4,
///    "aggregation": "pooled" | "averaged",
///    "grid": {"lo": -2, "hi": 4, "step": 0.01, "width_tol": 1e-12},
///    "recovery": {"lambda_min": 1e-3, "lambda_max": 1e3, "grid_points": 2001},
///    "recover": true, "out_dir": "..."}
/// Unknown keys are rejected.
RunConfig parse_run_config(std::string_view json_text);

struct Io {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
    bool interactive = false;  // stdout is a terminal: default to text tables
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, Io io);

}  // namespace erbr::cli
