#pragma once

#include <stdexcept>
#include <string>

namespace segbreak {

/// Malformed or inconsistent input data (bad CSV, gaps, non-numeric cells).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numerical operation failed in a way that invalidates the result
/// (singular system, non-finite intermediate).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace segbreak
