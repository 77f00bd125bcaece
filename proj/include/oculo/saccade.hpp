#pragma once

// Saccade-point detection: the first filtered gaze sample after a peripheral
// stimulus whose displacement from the pre-stimulus baseline exceeds
// amplitude_factor x std(trace), searched up to the next peripheral stimulus.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "oculo/error.hpp"
#include "oculo/types.hpp"

namespace oculo {

/// Population standard deviation.
inline double signal_std(std::span<const double> values) {
    if (values.size() < 2) throw Error(ErrorCode::TraceTooShort, "std needs at least 2 samples");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

inline double signal_std(const GazeTrace& trace) { return signal_std(trace.values); }

inline void validate(const DetectionConfig& config) {
    if (!(config.amplitude_factor > 0.0) || !(config.baseline_window_ms > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "amplitude_factor and baseline_window_ms must be positive");
    }
}

/// Sample-index range [begin, end) searched for the response to one stimulus.
struct ResponseWindow {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Mean of trace values over [t - window_ms, t]. Falls back to the nearest
/// sample when the interval holds none.
inline double pre_stimulus_baseline(const GazeTrace& trace, double t_ms, double window_ms) {
    const auto& ts = trace.timestamps_ms;
    auto lo = std::lower_bound(ts.begin(), ts.end(), t_ms - window_ms);
    auto hi = std::upper_bound(ts.begin(), ts.end(), t_ms);
    if (lo < hi) {
        double sum = 0.0;
        for (auto it = lo; it != hi; ++it) sum += trace.values[static_cast<std::size_t>(it - ts.begin())];
        return sum / static_cast<double>(hi - lo);
    }
    const auto i = std::min(static_cast<std::size_t>(hi - ts.begin()), ts.size() - 1);
    return trace.values[i];
}

/// One window per peripheral stimulus: from its onset up to (excluding) the
/// next peripheral onset, or the end of the trace for the last one.
inline std::vector<ResponseWindow> response_windows(const GazeTrace& trace, const StimulusTrack& track) {
    const auto& ts = trace.timestamps_ms;
    const auto peripheral = track.peripheral_indices();
    std::vector<ResponseWindow> out;
    out.reserve(peripheral.size());
    for (std::size_t k = 0; k < peripheral.size(); ++k) {
        const double start = track.events[peripheral[k]].timestamp_ms();
        const double stop = k + 1 < peripheral.size() ? track.events[peripheral[k + 1]].timestamp_ms()
                                                      : std::numeric_limits<double>::infinity();
        ResponseWindow w;
        w.begin = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), start) - ts.begin());
        w.end = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), stop) - ts.begin());
        out.push_back(w);
    }
    return out;
}

/// First index in the window with |value - baseline| > threshold and, when
/// `required_sign` is given, a displacement of that sign.
inline std::optional<std::size_t> first_crossing(const GazeTrace& trace, ResponseWindow window, double baseline,
                                                 double threshold, std::optional<int> required_sign = {}) {
    for (std::size_t i = window.begin; i < window.end; ++i) {
        const double d = trace.values[i] - baseline;
        if (std::abs(d) > threshold && (!required_sign || (d > 0 ? 1 : -1) == *required_sign)) return i;
    }
    return std::nullopt;
}

inline double detection_threshold(const GazeTrace& trace, const DetectionConfig& config) {
    return config.amplitude_factor * signal_std(trace);
}

/// Pairs every peripheral stimulus with its saccade point (or ABSENT).
/// `trace` is expected to be filtered already.
inline std::vector<SaccadeMatch> detect_saccades(const GazeTrace& trace, const StimulusTrack& track,
                                                 const DetectionConfig& config = {}) {
    validate(config);
    if (!is_saccadic(track.task)) throw Error(ErrorCode::WrongTask, "detection needs a saccadic task");
    const double threshold = detection_threshold(trace, config);
    const auto peripheral = track.peripheral_indices();
    const auto windows = response_windows(trace, track);

    std::vector<SaccadeMatch> matches;
    matches.reserve(peripheral.size());
    for (std::size_t k = 0; k < peripheral.size(); ++k) {
        SaccadeMatch m;
        m.stimulus = track.events[peripheral[k]];
        m.baseline = pre_stimulus_baseline(trace, m.stimulus.timestamp_ms(), config.baseline_window_ms);
        if (auto i = first_crossing(trace, windows[k], m.baseline, threshold)) {
            m.saccade_index = *i;
            m.saccade_timestamp_ms = trace.timestamps_ms[*i];
            m.displacement_sign = trace.values[*i] > m.baseline ? 1 : -1;
        }
        matches.push_back(m);
    }
    return matches;
}

} // namespace oculo
