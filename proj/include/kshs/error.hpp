#pragma once

#include <stdexcept>
#include <string>

namespace kshs {

/// Base of every error raised by the library. Callers that only need a
/// diagnostic catch this; tests match on the concrete subclasses.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input sizes violate a shape precondition (frame smaller than 2^J, Ñ > N, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Two objects that must share a layout do not (path structure, band/bin counts).
class StructureMismatch : public Error {
public:
    using Error::Error;
};

class RankDeficiency : public Error {
public:
    using Error::Error;
};

class FingerprintMismatch : public Error {
public:
    using Error::Error;
};

/// A precondition on a value or state was violated (depth > 2, double normalization,
/// non-orthogonal descriptor, singleton evaluation set, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace kshs
