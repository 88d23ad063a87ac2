#pragma once

#include <stdexcept>
#include <string>

namespace frag {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input supplied by the caller (empty question, K = 0, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class MediaError : public Error {
public:
    using Error::Error;
};

/// External frame decoder exited non-zero.
class DecoderError : public MediaError {
public:
    DecoderError(int exit_code, std::string stderr_text)
        : MediaError("decoder failed with exit code " + std::to_string(exit_code) + ": " + stderr_text),
          exit_code_(exit_code),
          stderr_(std::move(stderr_text)) {}

    int exit_code() const noexcept { return exit_code_; }
    const std::string& stderr_text() const noexcept { return stderr_; }

private:
    int exit_code_;
    std::string stderr_;
};

/// Manifest or config validation failure. `line` is 1-based, 0 when not line specific.
class ValidationError : public Error {
public:
    ValidationError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A backend answered, but not with an HTTP success. `status` is 0 for socket-level failures.
class TransportError : public Error {
public:
    TransportError(int status, std::string body)
        : Error("backend transport error (status " + std::to_string(status) + ")"),
          status_(status),
          body_(std::move(body)) {}

    int status() const noexcept { return status_; }
    const std::string& body() const noexcept { return body_; }
    bool retryable() const noexcept { return status_ == 0 || status_ == 408 || status_ == 429 || status_ >= 500; }

private:
    int status_;
    std::string body_;
};

/// No connection could be established at all.
class BackendUnreachable : public Error {
public:
    using Error::Error;
};

/// The backend returned 2xx with a body we cannot interpret.
class ProtocolError : public Error {
public:
    ProtocolError(const std::string& what, std::string raw_body)
        : Error("protocol error: " + what), raw_(std::move(raw_body)) {}

    const std::string& raw_body() const noexcept { return raw_; }

private:
    std::string raw_;
};

}  // namespace frag
