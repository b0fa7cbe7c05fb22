#pragma once

#include <stdexcept>
#include <string>

namespace mrp {

// Error taxonomy mirrored by the CLI exit codes:
// validation/dimension problems -> 2, infeasible targets -> 3, file I/O -> 4.

struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct infeasibility_error : std::runtime_error {
    explicit infeasibility_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace mrp
