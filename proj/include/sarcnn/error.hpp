#pragma once

#include <stdexcept>
#include <string>

namespace sarcnn {

/// Error categories surfaced by the CLI as `error: <code>: <message>`.
enum class ErrorCode { invalid_argument, io, format, state };

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::io: return "io";
        case ErrorCode::format: return "format";
        case ErrorCode::state: return "state";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
    if (!condition) fail(ErrorCode::invalid_argument, message);
}

}  // namespace sarcnn
