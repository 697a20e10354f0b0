#pragma once
#include <stdexcept>
#include <string>

namespace sgb {

/// Bad or inconsistent input data or configuration. CLI maps this to exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numerical routine failed to converge or produced an unusable result.
/// CLI maps this to exit code 1.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace sgb
