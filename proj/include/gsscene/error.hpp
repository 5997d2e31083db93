#pragma once

#include <stdexcept>
#include <string>

namespace gsscene {

// Root of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Least-squares depth alignment has fewer than two samples or no depth variance.
class DegenerateAlignment : public Error {
public:
    using Error::Error;
};

// A provider broke the generative contract (e.g. mutated known pixels, missing camera context).
class ContractViolation : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ManifestError : public Error {
public:
    using Error::Error;
};

class PipelineError : public Error {
public:
    using Error::Error;
};

// Raised when writing artifacts fails. `manifest_path` points at the partial manifest
// written before the failure (empty if even that could not be written).
class PersistenceError : public Error {
public:
    PersistenceError(const std::string& what, std::string manifest_path)
        : Error(what), manifest_path_(std::move(manifest_path)) {}

    const std::string& manifest_path() const noexcept { return manifest_path_; }

private:
    std::string manifest_path_;
};

}  // namespace gsscene
