#pragma once

#include <stdexcept>
#include <string>

namespace simdetect {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed filter JSON, invalid parameters, unknown ids.
/// The CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failures (unreadable root, unwritable output).
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed or unsupported persisted data (reports, tables, archives).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Precondition violation inside the numeric pipeline.
class AnalysisError : public Error {
public:
    using Error::Error;
};

}  // namespace simdetect
