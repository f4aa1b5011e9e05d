#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace harvol {

/// Non-fatal messages collected while processing (coverage gaps, degenerate inputs).
using Warnings = std::vector<std::string>;

/// Base for all library errors. The module name is prefixed to what().
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& message)
        : std::runtime_error("[" + module + "] " + message), module_(std::move(module)) {}

    [[nodiscard]] const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Malformed input: bad files, out-of-range parameters, misaligned batches.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: rank deficiency, explosive simulation settings.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace harvol
