#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bbpd {

/// Invalid geometry, horizon or material input detected while building a model.
class SetupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two bonded points collapsed onto each other; the bond direction is undefined.
class SingularBondError : public std::runtime_error {
public:
    SingularBondError() : std::runtime_error("singular bond: coincident deformed points") {}
    SingularBondError(std::size_t i, std::size_t j)
        : std::runtime_error("singular bond between particles " + std::to_string(i) + " and " +
                             std::to_string(j) + " (zero deformed length)"),
          first(i),
          second(j) {}

    std::size_t first = static_cast<std::size_t>(-1);
    std::size_t second = static_cast<std::size_t>(-1);
};

/// A linear or nonlinear solve could not proceed (singular system, no free DOFs, ...).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bbpd
