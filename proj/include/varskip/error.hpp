#pragma once

#include <stdexcept>
#include <string>

namespace varskip {

// Error categories, mirrored by the C API status codes.
enum class ErrorKind {
    invalid_argument,  // bad config, malformed query, shape mismatch
    io,                // file missing, truncated, unwritable
    runtime,           // divergence, non-finite values, internal failures
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) {
    throw Error(ErrorKind::invalid_argument, msg);
}
[[noreturn]] inline void fail_io(const std::string& msg) { throw Error(ErrorKind::io, msg); }
[[noreturn]] inline void fail_runtime(const std::string& msg) {
    throw Error(ErrorKind::runtime, msg);
}

}  // namespace varskip
