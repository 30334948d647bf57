#pragma once

#include <stdexcept>
#include <string>

namespace starnc {

/// Parameters violate the validity region of an analytic model
/// (e.g. a code rate at or above the cutoff rate for the union-bound
/// exponent). Maps to CLI exit code 2.
class ModelDomainError : public std::domain_error {
public:
    explicit ModelDomainError(const std::string& what) : std::domain_error(what) {}
};

/// Invalid scenario configuration (out-of-range field degree, divisibility
/// violation in strict mode, empty sweep). Maps to CLI exit code 1.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operation called in a state that does not admit it (e.g. decode before
/// the receiver matrix has full rank).
class StateError : public std::logic_error {
public:
    explicit StateError(const std::string& what) : std::logic_error(what) {}
};

} // namespace starnc
