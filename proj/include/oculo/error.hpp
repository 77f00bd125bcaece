#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oculo {

/// Every failure the library can raise. Names are part of the CLI contract
/// (printed on stderr and written to failures.csv).
enum class ErrorCode {
    // session-io
    BadMagic,
    UnsupportedVersion,
    TruncatedPayload,
    NonMonotonicTimestamps,
    NonFiniteField,
    UnknownTask,
    MalformedRecord,
    IllegalPosition,
    // signal-prep
    EmptySession,
    BadWindow,
    BadOrder,
    TraceTooShort,
    EmptyTrack,
    // saccade-core
    WrongTask,
    // task-features
    NoSaccadesDetected,
    NoCorrectSaccades,
    NoFixationDetected,
    MissingStimulusClass,
    TooFewTrials,
    DegenerateGradient,
    // cohort-stats
    DegenerateParameter,
    EmptyGroup,
    UnknownGroup,
    // cli
    InvalidConfig,
    AllSessionsFailed,
    IoError,
};

constexpr std::string_view error_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorCode::NonFiniteField: return "NonFiniteField";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::IllegalPosition: return "IllegalPosition";
    case ErrorCode::EmptySession: return "EmptySession";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::BadOrder: return "BadOrder";
    case ErrorCode::TraceTooShort: return "TraceTooShort";
    case ErrorCode::EmptyTrack: return "EmptyTrack";
    case ErrorCode::WrongTask: return "WrongTask";
    case ErrorCode::NoSaccadesDetected: return "NoSaccadesDetected";
    case ErrorCode::NoCorrectSaccades: return "NoCorrectSaccades";
    case ErrorCode::NoFixationDetected: return "NoFixationDetected";
    case ErrorCode::MissingStimulusClass: return "MissingStimulusClass";
    case ErrorCode::TooFewTrials: return "TooFewTrials";
    case ErrorCode::DegenerateGradient: return "DegenerateGradient";
    case ErrorCode::DegenerateParameter: return "DegenerateParameter";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::AllSessionsFailed: return "AllSessionsFailed";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Parse-stage errors (exit code 2 in the CLI); everything else is analysis.
constexpr bool is_parse_error(ErrorCode code) {
    switch (code) {
    case ErrorCode::BadMagic:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::TruncatedPayload:
    case ErrorCode::NonMonotonicTimestamps:
    case ErrorCode::NonFiniteField:
    case ErrorCode::UnknownTask:
    case ErrorCode::MalformedRecord:
    case ErrorCode::IllegalPosition:
    case ErrorCode::IoError:
        return true;
    default:
        return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }

private:
    ErrorCode code_;
};

} // namespace oculo
