#pragma once

#include <stdexcept>
#include <string>

namespace afc {

/// Invalid input: a type invariant or an operation precondition was violated.
/// Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numeric procedure failed (non-convergence, degenerate system, divergent
/// cavity denominator, ill-conditioned inversion). Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace afc
