#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qrdyn::cli {

// Numeric parameters shared across subcommands. Values come from the
// defaults below, then an optional --config JSON file, then flags.
struct RunConfig {
    int m = 3;
    int k = -1;             // -1 means "per-command default": 30 planar, 12 power map
    double rho_base = 0.0;  // 0 means "use the instance default"
    double tol = 1e-8;
    std::uint64_t seed = 0;
    std::int64_t samples = 1000000;
    std::string out;
    std::string format = "csv";

    int depth_or(int fallback) const { return k >= 0 ? k : fallback; }
};

// Merge a JSON config file over the defaults. Malformed JSON raises
// parse_error with line/column; well-formed but invalid values raise
// domain_error.
RunConfig load_config(const std::string& path);

// Exit status 0 on success, 1 on domain/precondition errors, 2 on parse
// errors. Output files are written atomically.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qrdyn::cli
