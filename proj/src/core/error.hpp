#pragma once

#include <stdexcept>
#include <string>

namespace wavereg {

enum class ErrorCode {
    invalid_argument,
    io,
    format,
    degenerate,
    registration_failure,
    unsupported,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition)
        raise(code, message);
}

}  // namespace wavereg
