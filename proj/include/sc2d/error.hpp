#pragma once

#include <stdexcept>
#include <string>

namespace sc2d {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand extents do not conform.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Frequency data fails the conjugate-symmetry check, or an inverse
/// transform left an imaginary residue above tolerance.
class SymmetryError : public Error {
public:
    using Error::Error;
};

/// Missing file, bad magic, truncated payload, malformed manifest.
class IoError : public Error {
public:
    using Error::Error;
};

/// Numerical failure inside a solver (zero dictionary, singular system,
/// non-finite iterate).
class SolverError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace sc2d
