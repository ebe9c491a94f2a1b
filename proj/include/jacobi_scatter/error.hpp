#pragma once

#include <stdexcept>
#include <string>

namespace jacobi_scatter {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: malformed files, out-of-domain arguments, excluded points
/// such as z = 0, ±1 or the branch points E = ±2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerically singular situation: non-invertible Wronskian, energy too
/// close to an eigenvalue, quadrature that did not converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Two independent computations of the same quantity disagreed.
class CrossCheckError : public Error {
public:
    using Error::Error;
};

} // namespace jacobi_scatter
