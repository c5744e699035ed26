#pragma once

#include <stdexcept>
#include <string>

namespace saln {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: bad files, empty corpora, shape
/// mismatches, invalid parameters. CLI exit code 2.
struct schema_error : error {
    using error::error;
};

/// No feasible point exists for the requested combinatorial problem.
/// CLI exit code 3.
struct infeasible_error : error {
    explicit infeasible_error(const std::string& what, int step = -1)
        : error(what), violated_step(step) {}
    int violated_step;  // first violated step index, -1 when unknown
};

/// A brute-force oracle was asked to run beyond its enforced size caps.
/// CLI exit code 4.
struct cap_error : error {
    using error::error;
};

}  // namespace saln
