#pragma once

#include <stdexcept>
#include <string>

namespace hotspot {

// Base for every error raised by the library. Messages are prefixed with the
// module that raised them, e.g. "graphfuse: ...".
class Error : public std::runtime_error {
public:
    Error(const std::string& module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(module) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

// Malformed or invariant-violating input (bad dimensions, schema, ranges).
class InvalidInput : public Error {
public:
    using Error::Error;
};

// An iterative method exhausted its iteration budget.
class NonConvergence : public Error {
public:
    using Error::Error;
};

}  // namespace hotspot
