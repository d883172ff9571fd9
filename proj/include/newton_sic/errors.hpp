#pragma once

#include <stdexcept>
#include <string>

namespace newton_sic {

enum class ErrorCode {
    invalid_parameter,
    degenerate_geometry,
    invalid_geometry,
    resource_limit,
    out_of_domain,
    not_regular,
    parse_error,
    io_error,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Numerical tolerances shared across modules.
namespace tol {
inline constexpr double incidence = 1e-12;   // absolute, point-on-segment / point-on-boundary
inline constexpr double length_rel = 1e-9;   // relative, length identities
inline constexpr double ridge = 1e-9;        // gradients undefined this close to region boundaries
inline constexpr double tie = 1e-9;          // max-of generator value ties
}  // namespace tol

}  // namespace newton_sic
