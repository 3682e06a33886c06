#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace timetuner {

enum class ErrorCode {
    MissingValue,
    DuplicateTimestamp,
    UnknownTarget,
    MalformedInput,
    SpanTooLarge,
    SeriesTooShort,
    TooFewWindows,
    InvalidConfig,
    ConstantSeries,
    LagOutOfRange,
    SingularRegression,
    LengthMismatch,
    ZeroVariance,
    ShapeMismatch,
    NonFiniteActivation,
    DivergedLoss,
    TooManyFeatures,
    Univariate,
    DegenerateRange,
    UnknownRepresentation,
    UnknownWindow,
    MalformedPolygon,
    StoreNotFound,
    PortInUse,
    Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MissingValue: return "missing_value";
    case ErrorCode::DuplicateTimestamp: return "duplicate_timestamp";
    case ErrorCode::UnknownTarget: return "unknown_target";
    case ErrorCode::MalformedInput: return "malformed_input";
    case ErrorCode::SpanTooLarge: return "span_too_large";
    case ErrorCode::SeriesTooShort: return "series_too_short";
    case ErrorCode::TooFewWindows: return "too_few_windows";
    case ErrorCode::InvalidConfig: return "invalid_config";
    case ErrorCode::ConstantSeries: return "constant_series";
    case ErrorCode::LagOutOfRange: return "lag_out_of_range";
    case ErrorCode::SingularRegression: return "singular_regression";
    case ErrorCode::LengthMismatch: return "length_mismatch";
    case ErrorCode::ZeroVariance: return "zero_variance";
    case ErrorCode::ShapeMismatch: return "shape_mismatch";
    case ErrorCode::NonFiniteActivation: return "non_finite_activation";
    case ErrorCode::DivergedLoss: return "diverged_loss";
    case ErrorCode::TooManyFeatures: return "too_many_features";
    case ErrorCode::Univariate: return "univariate";
    case ErrorCode::DegenerateRange: return "degenerate_range";
    case ErrorCode::UnknownRepresentation: return "unknown_representation";
    case ErrorCode::UnknownWindow: return "unknown_window";
    case ErrorCode::MalformedPolygon: return "malformed_polygon";
    case ErrorCode::StoreNotFound: return "store_not_found";
    case ErrorCode::PortInUse: return "port_in_use";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

/// Single exception type for the library; `code()` identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace timetuner
