#pragma once

#include <stdexcept>
#include <string>

namespace celltrace {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// File missing, unreadable, or malformed on disk.
class IoError : public Error {
public:
    using Error::Error;
};

/// Requested index, id or frame does not exist.
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Edit submitted against a revision that is no longer current.
class ConflictError : public Error {
public:
    using Error::Error;
};

}  // namespace celltrace
