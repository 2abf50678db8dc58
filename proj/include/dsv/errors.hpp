#pragma once

#include <stdexcept>
#include <string>

namespace dsv {

// Invalid input data: bad files, shape mismatches, empty sets, broken labels.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Degenerate numerical situation: zero denominators, singular covariance,
// zero kernel bandwidth. The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dsv
