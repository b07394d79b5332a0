#pragma once

#include <stdexcept>
#include <string>

namespace parisian {

// Invalid user-supplied parameter or configuration. CLI maps this to exit code 2.
class param_error : public std::invalid_argument {
public:
    explicit param_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// A limit assembly referenced a constant that was never estimated. Exit code 2.
class assembly_error : public std::runtime_error {
public:
    explicit assembly_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Simulation produced no usable estimate (e.g. zero conditioning events). Exit code 3.
class sim_error : public std::runtime_error {
public:
    explicit sim_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal inconsistency: a code path that valid inputs can never reach.
class internal_error : public std::logic_error {
public:
    explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace parisian
