#pragma once
#include <stdexcept>
#include <string>

namespace dcpt {

/// Input or configuration rejected by a constructor or validator.
class ValidationError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a finite result
/// (non-positive-definite precision, sampler blow-up, solver non-convergence).
class NumericError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace dcpt
