#pragma once

// Signal preparation: gaze geometry, the normalized horizontal trace, and the
// numerical kernels shared by every feature (Savitzky–Golay smoothing,
// timestamp-aware gradient, zero-order-hold stimulus resampling).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oculo/error.hpp"
#include "oculo/types.hpp"

namespace oculo {

inline constexpr double kDefaultFovHalfAngleDeg = 26.5;

inline Vec3 gaze_position(const GazeSample& sample) { return sample.origin + sample.direction; }

/// Horizontal gaze angle in degrees from a (not necessarily unit) direction.
inline double horizontal_angle_deg(const Vec3& direction) {
    const double n = direction.norm();
    const double s = std::clamp(direction.x / n, -1.0, 1.0);
    return std::asin(s) * 180.0 / std::numbers::pi;
}

inline GazeTrace horizontal_trace(const RawSession& session, double fov_half_angle_deg = kDefaultFovHalfAngleDeg) {
    if (session.samples.empty()) throw Error(ErrorCode::EmptySession, "session has no samples");
    if (!(fov_half_angle_deg > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "fov_half_angle_deg must be positive");
    }
    GazeTrace trace;
    trace.fov_half_angle_deg = fov_half_angle_deg;
    trace.timestamps_ms.reserve(session.samples.size());
    trace.values.reserve(session.samples.size());
    for (const auto& s : session.samples) {
        trace.timestamps_ms.push_back(static_cast<double>(s.timestamp_us) / 1000.0);
        trace.values.push_back(horizontal_angle_deg(s.direction) / fov_half_angle_deg);
    }
    return trace;
}

/// Samples with timestamps in [begin_ms, end_ms).
inline GazeTrace slice(const GazeTrace& trace, double begin_ms, double end_ms) {
    GazeTrace out;
    out.fov_half_angle_deg = trace.fov_half_angle_deg;
    auto first = std::lower_bound(trace.timestamps_ms.begin(), trace.timestamps_ms.end(), begin_ms);
    auto last = std::lower_bound(first, trace.timestamps_ms.end(), end_ms);
    const auto a = static_cast<std::size_t>(first - trace.timestamps_ms.begin());
    const auto b = static_cast<std::size_t>(last - trace.timestamps_ms.begin());
    out.timestamps_ms.assign(trace.timestamps_ms.begin() + a, trace.timestamps_ms.begin() + b);
    out.values.assign(trace.values.begin() + a, trace.values.begin() + b);
    return out;
}

// ---------------------------------------------------------------------------
// Savitzky–Golay
// ---------------------------------------------------------------------------

inline void validate(const FilterConfig& config) {
    if (config.window < 3 || config.window % 2 == 0) {
        throw Error(ErrorCode::BadWindow, "window must be odd and >= 3, got " + std::to_string(config.window));
    }
    if (config.polyorder < 1 || config.polyorder >= config.window) {
        throw Error(ErrorCode::BadOrder, "polyorder must be in [1, window), got " + std::to_string(config.polyorder));
    }
}

/// Weights w such that sum_k w[k] * y[k] is the value at sample position
/// `eval_pos` (0-based inside the window) of the degree-`order` least-squares
/// polynomial through y[0..window).
inline std::vector<double> savgol_weights(int window, int order, int eval_pos) {
    const auto n = static_cast<std::size_t>(window);
    const auto m = static_cast<std::size_t>(order + 1);
    const double center = (window - 1) / 2.0;
    const double scale = std::max(center, 1.0);

    // Columns of the scaled Vandermonde matrix, orthonormalized in place (MGS, two passes).
    std::vector<std::vector<double>> q(m, std::vector<double>(n));
    std::vector<std::vector<double>> r(m, std::vector<double>(m, 0.0));
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) q[j][i] = std::pow((static_cast<double>(i) - center) / scale, j);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += q[k][i] * q[j][i];
                r[k][j] += dot;
                for (std::size_t i = 0; i < n; ++i) q[j][i] -= dot * q[k][i];
            }
        }
        double norm = 0.0;
        for (double v : q[j]) norm += v * v;
        norm = std::sqrt(norm);
        r[j][j] = norm;
        for (double& v : q[j]) v /= norm;
    }

    // w = Q R^{-T} a, where a is the monomial basis at the evaluation point.
    std::vector<double> a(m);
    for (std::size_t j = 0; j < m; ++j) a[j] = std::pow((eval_pos - center) / scale, j);
    std::vector<double> z(m);
    for (std::size_t j = 0; j < m; ++j) {
        double s = a[j];
        for (std::size_t k = 0; k < j; ++k) s -= r[k][j] * z[k];
        z[j] = s / r[j][j];
    }
    std::vector<double> w(n, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) w[i] += z[j] * q[j][i];
    }
    return w;
}

/// Central-point smoothing coefficients.
inline std::vector<double> savgol_kernel(const FilterConfig& config) {
    validate(config);
    return savgol_weights(config.window, config.polyorder, (config.window - 1) / 2);
}

/// Smooths a uniformly indexed series. Edge samples come from the polynomial
/// fitted to the first / last full window; no padding is fabricated.
inline std::vector<double> savgol_filter(std::span<const double> x, const FilterConfig& config) {
    validate(config);
    const auto window = static_cast<std::size_t>(config.window);
    if (x.size() < window) {
        throw Error(ErrorCode::TraceTooShort,
                    std::to_string(x.size()) + " samples, filter window " + std::to_string(window));
    }
    const std::size_t half = window / 2;
    const std::size_t n = x.size();
    std::vector<double> y(n);

    const auto kernel = savgol_kernel(config);
    for (std::size_t i = half; i + half < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < window; ++k) acc += kernel[k] * x[i - half + k];
        y[i] = acc;
    }
    for (std::size_t e = 0; e < half; ++e) {
        const auto head = savgol_weights(config.window, config.polyorder, static_cast<int>(e));
        const auto tail = savgol_weights(config.window, config.polyorder, static_cast<int>(window - 1 - e));
        double lo = 0.0, hi = 0.0;
        for (std::size_t k = 0; k < window; ++k) {
            lo += head[k] * x[k];
            hi += tail[k] * x[n - window + k];
        }
        y[e] = lo;
        y[n - 1 - e] = hi;
    }
    return y;
}

inline GazeTrace savgol_filter(const GazeTrace& trace, const FilterConfig& config) {
    GazeTrace out = trace;
    out.values = savgol_filter(std::span<const double>(trace.values), config);
    return out;
}

// ---------------------------------------------------------------------------
// Gradient
// ---------------------------------------------------------------------------

/// Second-order central differences on interior points (exact for quadratics
/// on any grid), first-order one-sided at the ends. Units: value / ms.
inline std::vector<double> gradient(std::span<const double> t, std::span<const double> v) {
    const std::size_t n = v.size();
    if (n < 2 || t.size() != n) {
        throw Error(ErrorCode::TraceTooShort, "gradient needs at least 2 samples");
    }
    std::vector<double> g(n);
    g[0] = (v[1] - v[0]) / (t[1] - t[0]);
    g[n - 1] = (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = t[i] - t[i - 1];
        const double hr = t[i + 1] - t[i];
        // Weighted one-sided slopes; written in differences so a constant
        // signal gives exactly zero.
        g[i] = (hr * (v[i] - v[i - 1]) / hl + hl * (v[i + 1] - v[i]) / hr) / (hl + hr);
    }
    return g;
}

inline GazeTrace gradient(const GazeTrace& trace) {
    GazeTrace out = trace;
    out.values = gradient(trace.timestamps_ms, trace.values);
    return out;
}

// ---------------------------------------------------------------------------
// Stimulus resampling
// ---------------------------------------------------------------------------

/// For each query time, the index of the latest event at or before it.
inline std::vector<std::optional<std::size_t>> held_event_indices(const StimulusTrack& track,
                                                                  std::span<const double> timestamps_ms) {
    if (track.events.empty()) throw Error(ErrorCode::EmptyTrack, "stimulus track has no events");
    std::vector<std::optional<std::size_t>> out(timestamps_ms.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < timestamps_ms.size(); ++i) {
        while (next < track.events.size() && track.events[next].timestamp_ms() <= timestamps_ms[i]) ++next;
        if (next > 0) out[i] = next - 1;
    }
    return out;
}

/// Zero-order hold of stimulus position (degrees) onto gaze sample times;
/// 0 before the first event.
inline std::vector<double> resample_stimuli(const StimulusTrack& track, std::span<const double> timestamps_ms) {
    const auto held = held_event_indices(track, timestamps_ms);
    std::vector<double> out(held.size(), 0.0);
    for (std::size_t i = 0; i < held.size(); ++i) {
        if (held[i]) out[i] = track.events[*held[i]].position_deg;
    }
    return out;
}

} // namespace oculo
