#pragma once

#include <stdexcept>
#include <string>

namespace flextclus {

// Input that violates a documented precondition (shape mismatch, bad
// hyperparameter, malformed file).  Maps to CLI exit code 2.
class invalid_input_error : public std::runtime_error {
public:
    explicit invalid_input_error(const std::string& what)
        : std::runtime_error(what) {}
};

// The iteration ran but failed numerically (line search blow-up,
// non-finite objective).  Maps to CLI exit code 1.
class divergence_error : public std::runtime_error {
public:
    explicit divergence_error(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace flextclus
