#pragma once

#include <stdexcept>
#include <string>

namespace ctrp {

// Shape/dimension violations (mode mismatch, bad index ranges).
class shape_error : public std::invalid_argument {
public:
    explicit shape_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Invalid parameter values (negative scales, psi < 1, bad hyperparameters).
class parameter_error : public std::invalid_argument {
public:
    explicit parameter_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Runtime numerical failures (non-PD precision, sampler exhaustion, non-convergence).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files or config documents.
class config_error : public std::invalid_argument {
public:
    explicit config_error(const std::string& msg) : std::invalid_argument(msg) {}
};

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ctrp
