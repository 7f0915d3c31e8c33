#pragma once

#include <stdexcept>
#include <string>

namespace rap {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad data handed to an operation (dimension mismatch, empty mask, ...).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// A configuration value outside its documented range.
class InvalidConfigError : public Error {
public:
    using Error::Error;
};

/// Out-of-range grid or matrix index.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure (unreadable image, unwritable report path).
class IoError : public Error {
public:
    using Error::Error;
};

/// A model backend failed (transport error, non-success status, refusal).
/// Carries the grid cell being processed when the failure happened during
/// per-crop work, -1 otherwise.
class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& msg, int cell_index = -1)
        : Error(msg), cell_index_(cell_index) {}

    int cell_index() const { return cell_index_; }

private:
    int cell_index_ = -1;
};

/// The backend answered, but the payload does not match the wire contract.
class ProtocolError : public Error {
public:
    using Error::Error;
};

} // namespace rap
