// errors.hpp — Exception types shared across the library.

#pragma once

#include <stdexcept>
#include <string>

namespace cflux {

// Eigenvalue gap below the configured floor; couplings and τ are undefined there.
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Frame-to-frame eigenvector overlap dropped below 0.5; the time step is too
// large to track eigenbranches.
struct ContinuityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive stepper could not meet the requested tolerance.
struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested audit does not apply to this trajectory kind.
struct NotApplicableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadrature error estimate on a fixed sample grid exceeds the requested tolerance.
struct GridTooCoarseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed scenario configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace cflux
