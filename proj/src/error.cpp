#include "resave/error.hpp"

namespace resave {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::no_data: return "no-data";
        case ErrorCode::insufficient_data: return "insufficient-data";
        case ErrorCode::singular_covariance: return "singular-covariance";
        case ErrorCode::numerical_failure: return "numerical-failure";
        case ErrorCode::io_error: return "io-error";
        case ErrorCode::schema_error: return "schema-error";
        case ErrorCode::empty_dataset: return "empty-dataset";
    }
    return "unknown";
}

}  // namespace resave
