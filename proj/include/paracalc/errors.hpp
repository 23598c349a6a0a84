#pragma once

#include <stdexcept>
#include <string>

namespace paracalc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GridMismatch : public Error {
public:
    GridMismatch() : Error("grid mismatch: operands live on different grids") {}
    explicit GridMismatch(const std::string& what) : Error(what) {}
};

class InvalidGrid : public Error {
public:
    using Error::Error;
};

class DerivativeUnavailable : public Error {
public:
    using Error::Error;
};

class FrequencyEvalUnavailable : public Error {
public:
    using Error::Error;
};

class NotDiffeomorphism : public Error {
public:
    using Error::Error;
};

class GridTooLarge : public Error {
public:
    using Error::Error;
};

class NoRankDecomposition : public Error {
public:
    NoRankDecomposition() : Error("symbol carries no rank decomposition") {}
};

class NonlinearOperator : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

class BandOverflow : public Error {
public:
    using Error::Error;
};

class NotContractive : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

/// A file could not be opened, read or written.
class FileError : public Error {
public:
    using Error::Error;
};

}  // namespace paracalc
