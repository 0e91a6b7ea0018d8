#pragma once

#include <stdexcept>
#include <string>

namespace vnet {

// Scenario/allocation/config contract violations. what() names the violated field.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files (JSON syntax, missing keys, unknown format_version).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// An adaptive quadrature failed to reach the requested tolerance within budget.
struct QuadratureError : std::runtime_error {
    explicit QuadratureError(const std::string& msg) : std::runtime_error(msg) {}
};

// LP pivoting breakdown, iteration budget exhaustion, or node budget exhaustion.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace vnet
