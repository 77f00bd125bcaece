#pragma once

// The clinical parameters: reflex latency / speed / amplitudes / fixation
// time, antisaccade latency and error ratio, memory-guided error ratio, and
// smooth-pursuit speed and acceleration statistics.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "oculo/error.hpp"
#include "oculo/saccade.hpp"
#include "oculo/signal.hpp"
#include "oculo/types.hpp"

namespace oculo {

namespace detail {

inline int sign_of(double v) { return v > 0 ? 1 : -1; }

inline double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double median(std::vector<double> v) {
    const auto n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

} // namespace detail

inline void validate(const FixationConfig& config) {
    if (!(config.threshold_fraction > 0.0) || !(config.min_fixation_ms > 0.0) || !(config.zscore_cutoff > 0.0) ||
        config.speed_radius_samples <= 0) {
        throw Error(ErrorCode::InvalidConfig, "fixation parameters must be positive");
    }
}

// ---------------------------------------------------------------------------
// Reflex saccades
// ---------------------------------------------------------------------------

inline double reflex_latency(std::span<const SaccadeMatch> matches) {
    std::vector<double> latencies;
    for (const auto& m : matches) {
        if (m.present()) latencies.push_back(*m.saccade_timestamp_ms - m.stimulus.timestamp_ms());
    }
    if (latencies.empty()) throw Error(ErrorCode::NoSaccadesDetected, "no saccade points to time");
    return detail::mean(latencies);
}

/// savgol_filter(gradient(trace)) in FOV units per ms.
inline std::vector<double> smoothed_velocity(const GazeTrace& trace, const FilterConfig& filter) {
    const auto g = gradient(trace.timestamps_ms, trace.values);
    return savgol_filter(std::span<const double>(g), filter);
}

/// Mean over detected saccades of the peak |velocity| within
/// +/- speed_radius_samples of the saccade point, in degrees per ms.
inline double reflex_speed(const GazeTrace& trace, std::span<const SaccadeMatch> matches,
                           const FixationConfig& config = {}, const FilterConfig& filter = {}) {
    validate(config);
    const auto radius = static_cast<std::size_t>(config.speed_radius_samples);
    if (trace.size() <= 2 * radius) {
        throw Error(ErrorCode::TraceTooShort, "speed search radius exceeds trace length");
    }
    const auto v = smoothed_velocity(trace, filter);
    std::vector<double> speeds;
    for (const auto& m : matches) {
        if (!m.present()) continue;
        const std::size_t i = *m.saccade_index;
        const std::size_t lo = i >= radius ? i - radius : 0;
        const std::size_t hi = std::min(i + radius, v.size() - 1);
        double peak = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) peak = std::max(peak, std::abs(v[k]));
        speeds.push_back(trace.to_deg(peak));
    }
    if (speeds.empty()) throw Error(ErrorCode::NoSaccadesDetected, "no saccade points for speed");
    return detail::mean(speeds);
}

struct ReflexAmplitudes {
    std::optional<double> amp10_deg;
    std::optional<double> amp20_deg;
};

/// Mean |gaze - trial baseline| (degrees) over the samples held at a 10 deg
/// or 20 deg stimulus, counted from the saccade point of that trial (or from
/// stimulus onset when no saccade was detected) to the stimulus offset.
inline ReflexAmplitudes reflex_amplitudes(const GazeTrace& trace, const StimulusTrack& track,
                                          std::span<const SaccadeMatch> matches) {
    bool has10 = false, has20 = false;
    for (const auto& e : track.events) {
        has10 = has10 || std::abs(e.position_deg) == 10.0;
        has20 = has20 || std::abs(e.position_deg) == 20.0;
    }
    if (!has10 || !has20) {
        throw Error(ErrorCode::MissingStimulusClass, "track needs both 10 and 20 degree stimuli");
    }
    const auto held = held_event_indices(track, trace.timestamps_ms);

    double sum10 = 0.0, sum20 = 0.0;
    std::size_t n10 = 0, n20 = 0;
    for (const auto& m : matches) {
        const double magnitude = std::abs(m.stimulus.position_deg);
        if (magnitude != 10.0 && magnitude != 20.0) continue;
        const auto onset = static_cast<std::size_t>(
            std::lower_bound(trace.timestamps_ms.begin(), trace.timestamps_ms.end(), m.stimulus.timestamp_ms()) -
            trace.timestamps_ms.begin());
        std::size_t i = m.saccade_index.value_or(onset);
        for (; i < trace.size(); ++i) {
            if (!held[i] || track.events[*held[i]].timestamp_us != m.stimulus.timestamp_us) break;
            const double a = trace.to_deg(std::abs(trace.values[i] - m.baseline));
            if (magnitude == 10.0) {
                sum10 += a;
                ++n10;
            } else {
                sum20 += a;
                ++n20;
            }
        }
    }
    ReflexAmplitudes out;
    if (n10) out.amp10_deg = sum10 / static_cast<double>(n10);
    if (n20) out.amp20_deg = sum20 / static_cast<double>(n20);
    return out;
}

// ---------------------------------------------------------------------------
// Fixation time
// ---------------------------------------------------------------------------

/// Drops values whose modified Z-score 0.6745 (x - median) / MAD exceeds the
/// cutoff. When MAD is zero the mean-absolute-deviation form
/// (x - median) / (1.253314 MeanAD) is used instead.
inline std::vector<double> remove_outliers_modified_z(std::span<const double> values, double cutoff = 3.5) {
    if (values.empty()) throw Error(ErrorCode::TraceTooShort, "no values to clean");
    const double med = detail::median({values.begin(), values.end()});
    std::vector<double> dev;
    dev.reserve(values.size());
    for (double v : values) dev.push_back(std::abs(v - med));
    const double mad = detail::median(dev);

    double scale = 0.0;
    if (mad > 0.0) {
        scale = mad / 0.6745;
    } else {
        const double mean_ad = detail::mean(dev);
        if (mean_ad == 0.0) throw Error(ErrorCode::DegenerateGradient, "constant gradient, MAD and MeanAD are zero");
        scale = 1.253314 * mean_ad;
    }
    std::vector<double> kept;
    kept.reserve(values.size());
    for (double v : values) {
        if (std::abs(v - med) / scale <= cutoff) kept.push_back(v);
    }
    return kept;
}

/// threshold_fraction x std of the outlier-cleaned |velocity| series.
inline double fixation_threshold(std::span<const double> abs_velocity, const FixationConfig& config) {
    const auto cleaned = remove_outliers_modified_z(abs_velocity, config.zscore_cutoff);
    return config.threshold_fraction * signal_std(cleaned);
}

/// Scans |velocity| from `start` for the first stable run (below threshold)
/// of at least min_fixation_ms. Shorter runs are microfixations: skipped, and
/// the scan resumes at their end. Samples at or after `stop` are not
/// examined; a run still open there ends at timestamps[stop] (or the last
/// sample). Returns the longest microfixation if no run qualifies.
inline std::optional<double> scan_fixation(std::span<const double> abs_velocity, std::span<const double> timestamps_ms,
                                           double threshold, std::size_t start, std::size_t stop,
                                           double min_fixation_ms) {
    const std::size_t n = abs_velocity.size();
    stop = std::min(stop, n);
    std::optional<double> longest_micro;
    std::size_t i = start;
    while (i < stop) {
        while (i < stop && abs_velocity[i] >= threshold) ++i;
        if (i >= stop) break;
        const std::size_t begin = i;
        while (i < stop && abs_velocity[i] < threshold) ++i;
        const double end_ms = i < n ? timestamps_ms[i] : timestamps_ms[n - 1];
        const double duration = end_ms - timestamps_ms[begin];
        if (duration >= min_fixation_ms) return duration;
        if (!longest_micro || duration > *longest_micro) longest_micro = duration;
    }
    return longest_micro;
}

/// Mean post-saccadic fixation duration (ms) over detected saccades.
inline double fixation_times(const GazeTrace& trace, std::span<const SaccadeMatch> matches,
                             const StimulusTrack& track, const FixationConfig& config = {},
                             const FilterConfig& filter = {}) {
    validate(config);
    bool any = false;
    for (const auto& m : matches) any = any || m.present();
    if (!any) throw Error(ErrorCode::NoSaccadesDetected, "no saccade points for fixation");

    auto speed = smoothed_velocity(trace, filter);
    for (double& v : speed) v = std::abs(v);
    const double threshold = fixation_threshold(speed, config);

    const auto windows = response_windows(trace, track);
    const auto peripheral = track.peripheral_indices();
    std::vector<double> durations;
    for (const auto& m : matches) {
        if (!m.present()) continue;
        std::size_t stop = trace.size();
        for (std::size_t k = 0; k < peripheral.size(); ++k) {
            if (track.events[peripheral[k]].timestamp_us == m.stimulus.timestamp_us) stop = windows[k].end;
        }
        if (auto d = scan_fixation(speed, trace.timestamps_ms, threshold, *m.saccade_index, stop,
                                   config.min_fixation_ms)) {
            durations.push_back(*d);
        }
    }
    if (durations.empty()) throw Error(ErrorCode::NoFixationDetected, "velocity never fell below threshold");
    return detail::mean(durations);
}

// ---------------------------------------------------------------------------
// Direction-scored tasks
// ---------------------------------------------------------------------------

struct DirectionTally {
    int correct = 0;
    int incorrect = 0;

    int total() const { return correct + incorrect; }
    double incorrect_ratio() const { return static_cast<double>(incorrect) / static_cast<double>(total()); }
    double correct_ratio() const { return static_cast<double>(correct) / static_cast<double>(total()); }
};

inline void require_task(const StimulusTrack& track, TaskKind task) {
    if (track.task != task) {
        throw Error(ErrorCode::WrongTask,
                    "expected " + std::string(task_name(task)) + ", got " + std::string(task_name(track.task)));
    }
}

/// Mean latency (ms) of the first saccade directed away from the stimulus;
/// an earlier wrong-direction crossing does not end the search.
inline double anti_latency(const GazeTrace& trace, const StimulusTrack& track, const DetectionConfig& detection = {}) {
    require_task(track, TaskKind::Anti);
    validate(detection);
    const double threshold = detection_threshold(trace, detection);
    const auto peripheral = track.peripheral_indices();
    const auto windows = response_windows(trace, track);
    std::vector<double> latencies;
    for (std::size_t k = 0; k < peripheral.size(); ++k) {
        const auto& s = track.events[peripheral[k]];
        const double baseline = pre_stimulus_baseline(trace, s.timestamp_ms(), detection.baseline_window_ms);
        if (auto i = first_crossing(trace, windows[k], baseline, threshold, -detail::sign_of(s.position_deg))) {
            latencies.push_back(trace.timestamps_ms[*i] - s.timestamp_ms());
        }
    }
    if (latencies.empty()) throw Error(ErrorCode::NoCorrectSaccades, "no saccade away from any stimulus");
    return detail::mean(latencies);
}

/// First-saccade direction verdicts: toward the stimulus counts as incorrect.
inline DirectionTally anti_direction_tally(const GazeTrace& trace, const StimulusTrack& track,
                                           const DetectionConfig& detection = {}) {
    require_task(track, TaskKind::Anti);
    DirectionTally tally;
    for (const auto& m : detect_saccades(trace, track, detection)) {
        if (!m.present()) continue;
        if (*m.displacement_sign == detail::sign_of(m.stimulus.position_deg)) {
            ++tally.incorrect;
        } else {
            ++tally.correct;
        }
    }
    return tally;
}

inline double anti_incorrect_ratio(const GazeTrace& trace, const StimulusTrack& track,
                                   const DetectionConfig& detection = {}) {
    const auto tally = anti_direction_tally(trace, track, detection);
    if (tally.total() == 0) throw Error(ErrorCode::NoSaccadesDetected, "no saccades in antisaccade task");
    return tally.incorrect_ratio();
}

/// Trial N is correct when its first saccade heads toward stimulus N-1;
/// trial 0 has no predecessor and is not scored.
inline DirectionTally memory_direction_tally(const GazeTrace& trace, const StimulusTrack& track,
                                             const DetectionConfig& detection = {}) {
    require_task(track, TaskKind::MemoryMain);
    if (track.peripheral_indices().size() < 2) {
        throw Error(ErrorCode::TooFewTrials, "memory scoring needs at least 2 peripheral stimuli");
    }
    const auto matches = detect_saccades(trace, track, detection);
    DirectionTally tally;
    for (std::size_t k = 1; k < matches.size(); ++k) {
        if (!matches[k].present()) continue;
        if (*matches[k].displacement_sign == detail::sign_of(matches[k - 1].stimulus.position_deg)) {
            ++tally.correct;
        } else {
            ++tally.incorrect;
        }
    }
    return tally;
}

inline double memory_incorrect_ratio(const GazeTrace& trace, const StimulusTrack& track,
                                     const DetectionConfig& detection = {}) {
    const auto tally = memory_direction_tally(trace, track, detection);
    if (tally.total() == 0) throw Error(ErrorCode::NoSaccadesDetected, "no scored saccades in memory task");
    return tally.incorrect_ratio();
}

// ---------------------------------------------------------------------------
// Smooth pursuit
// ---------------------------------------------------------------------------

struct PursuitFeatures {
    double speed_mean_deg_per_ms = 0.0;
    double speed_std_deg_per_ms = 0.0;
    double accel_rms_deg_per_ms2 = 0.0;
};

/// Speed is the derivative of |gaze|, taken by the chain rule as
/// sign(gaze) * d(gaze)/dt. Differencing |gaze| directly would straddle the
/// kink at every zero crossing and drop about one sample of speed there.
/// Its mean is over magnitudes, its std over the signed series.
/// Acceleration is the second gradient of gaze.
inline PursuitFeatures pursuit_features(const GazeTrace& trace) {
    if (trace.size() < 3) throw Error(ErrorCode::TraceTooShort, "pursuit needs at least 3 samples");
    std::vector<double> deg(trace.values.size());
    std::transform(trace.values.begin(), trace.values.end(), deg.begin(), [&](double v) { return trace.to_deg(v); });
    const auto velocity = gradient(trace.timestamps_ms, deg);
    const auto accel = gradient(trace.timestamps_ms, velocity);

    std::vector<double> speed(velocity.size());
    for (std::size_t i = 0; i < speed.size(); ++i) speed[i] = deg[i] < 0.0 ? -velocity[i] : velocity[i];

    PursuitFeatures out;
    double abs_sum = 0.0;
    for (double s : speed) abs_sum += std::abs(s);
    out.speed_mean_deg_per_ms = abs_sum / static_cast<double>(speed.size());
    out.speed_std_deg_per_ms = signal_std(speed);
    double sq = 0.0;
    for (double a : accel) sq += a * a;
    out.accel_rms_deg_per_ms2 = std::sqrt(sq / static_cast<double>(accel.size()));
    return out;
}

} // namespace oculo
