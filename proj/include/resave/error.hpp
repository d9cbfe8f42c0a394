#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace resave {

enum class ErrorCode {
    invalid_argument,
    no_data,
    insufficient_data,
    singular_covariance,
    numerical_failure,
    io_error,
    schema_error,
    empty_dataset,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI, the replication harness) can branch on the kind.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

// literal messages: no string is built unless the check fails
inline void require(bool condition, ErrorCode code, const char* message) {
    if (!condition) fail(code, message);
}

}  // namespace resave
