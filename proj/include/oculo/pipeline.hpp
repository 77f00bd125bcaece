#pragma once

// Whole-session feature extraction: segment the gaze trace per task, filter
// each segment, and run the task's feature operations.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oculo/features.hpp"
#include "oculo/saccade.hpp"
#include "oculo/signal.hpp"
#include "oculo/types.hpp"

namespace oculo {

struct AnalysisConfig {
    FilterConfig filter;
    DetectionConfig detection;
    FixationConfig fixation;
    double fov_half_angle_deg = kDefaultFovHalfAngleDeg;
};

struct AnalysisResult {
    FeatureSet features;
    /// One line per feature that came out ABSENT, naming the reason.
    std::vector<std::string> notes;
};

/// Errors that mean "this task yielded no usable events" rather than a
/// broken input; the affected parameter is reported ABSENT.
inline bool is_absent_feature_error(ErrorCode code) {
    switch (code) {
    case ErrorCode::NoSaccadesDetected:
    case ErrorCode::NoCorrectSaccades:
    case ErrorCode::NoFixationDetected:
    case ErrorCode::MissingStimulusClass:
    case ErrorCode::TooFewTrials:
    case ErrorCode::DegenerateGradient:
        return true;
    default:
        return false;
    }
}

/// Time span [begin_ms, end_ms) of the gaze trace that belongs to `track`.
/// Saccadic tasks include the baseline window before the first event and end
/// at a trailing central event; otherwise the span runs until the next
/// track in `all` starts (or forever).
inline std::pair<double, double> track_span(const StimulusTrack& track, std::span<const StimulusTrack> all,
                                            const DetectionConfig& detection) {
    if (track.events.empty()) throw Error(ErrorCode::EmptyTrack, "stimulus track has no events");
    const double first = track.events.front().timestamp_ms();
    const double last = track.events.back().timestamp_ms();
    if (track.task == TaskKind::Pursuit) return {first, std::nextafter(last, std::numeric_limits<double>::infinity())};

    const double begin = first - detection.baseline_window_ms;
    double end = track.events.back().is_central ? last : std::numeric_limits<double>::infinity();
    for (const auto& other : all) {
        if (other.events.empty() || &other == &track) continue;
        const double start = other.events.front().timestamp_ms();
        if (start > first) end = std::min(end, start);
    }
    return {begin, end};
}

inline AnalysisResult extract_features(const RawSession& session, std::span<const StimulusTrack> tracks,
                                       const AnalysisConfig& config = {}) {
    validate(config.filter);
    validate(config.detection);
    validate(config.fixation);
    const auto full = horizontal_trace(session, config.fov_half_angle_deg);

    AnalysisResult result;
    auto& f = result.features;
    auto attempt = [&](std::string_view code, auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            if (!is_absent_feature_error(e.code())) throw;
            result.notes.push_back(std::string(code) + ": " + e.what());
        }
    };
    auto segment_for = [&](const StimulusTrack& track) {
        const auto [begin, end] = track_span(track, tracks, config.detection);
        return savgol_filter(slice(full, begin, end), config.filter);
    };
    auto find = [&](TaskKind task) -> const StimulusTrack* {
        for (const auto& t : tracks) {
            if (t.task == task) return &t;
        }
        return nullptr;
    };

    if (const auto* track = find(TaskKind::Reflex)) {
        const auto trace = segment_for(*track);
        const auto matches = detect_saccades(trace, *track, config.detection);
        attempt("RL", [&] { f.reflex_latency_ms = reflex_latency(matches); });
        attempt("RSD", [&] { f.reflex_speed_deg_per_ms = reflex_speed(trace, matches, config.fixation, config.filter); });
        attempt("RA10/RA20", [&] {
            const auto amps = reflex_amplitudes(trace, *track, matches);
            f.reflex_amp10_deg = amps.amp10_deg;
            f.reflex_amp20_deg = amps.amp20_deg;
        });
        attempt("RAFT", [&] {
            f.reflex_fixation_ms = fixation_times(trace, matches, *track, config.fixation, config.filter);
        });
    }
    if (const auto* track = find(TaskKind::Anti)) {
        const auto trace = segment_for(*track);
        attempt("AL", [&] { f.anti_latency_ms = anti_latency(trace, *track, config.detection); });
        attempt("AISR", [&] { f.anti_incorrect_ratio = anti_incorrect_ratio(trace, *track, config.detection); });
    }
    if (const auto* track = find(TaskKind::MemoryMain)) {
        const auto trace = segment_for(*track);
        attempt("MISR", [&] { f.memory_incorrect_ratio = memory_incorrect_ratio(trace, *track, config.detection); });
    }
    if (const auto* track = find(TaskKind::Pursuit)) {
        const auto p = pursuit_features(segment_for(*track));
        f.pursuit_speed_mean_deg_per_ms = p.speed_mean_deg_per_ms;
        f.pursuit_accel_rms_deg_per_ms2 = p.accel_rms_deg_per_ms2;
        f.pursuit_speed_std_deg_per_ms = p.speed_std_deg_per_ms;
    }
    return result;
}

} // namespace oculo
