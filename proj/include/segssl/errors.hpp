#ifndef SEGSSL_ERRORS_HPP
#define SEGSSL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace segssl {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor file problems, split by cause so callers can react per variant.
class TensorIoError : public Error {
public:
    using Error::Error;
};

class BadMagicError : public TensorIoError {
public:
    using TensorIoError::TensorIoError;
};

class TruncatedFileError : public TensorIoError {
public:
    using TensorIoError::TensorIoError;
};

class UnknownDtypeError : public TensorIoError {
public:
    using TensorIoError::TensorIoError;
};

// Invalid configuration (bad key, bad value, broken invariant). CLI exit 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite loss or gradient during training. CLI exit 3.
class NumericError : public Error {
public:
    using Error::Error;
};

// Shape/class/file mismatches between data pieces. CLI exit 4.
class DataError : public Error {
public:
    using Error::Error;
};

// Synthetic generator could not place a shape.
class GenerationError : public Error {
public:
    using Error::Error;
};

// A surface-distance metric was asked for an empty boundary set.
class EmptySurfaceError : public Error {
public:
    using Error::Error;
};

} // namespace segssl

#endif
