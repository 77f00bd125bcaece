#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oculo/error.hpp"

namespace oculo {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend constexpr Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator*(double k, const Vec3& v) { return {k * v.x, k * v.y, k * v.z}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// One eye-tracker frame. Origin in meters, direction unit length (device frame).
struct GazeSample {
    std::uint64_t timestamp_us = 0;
    Vec3 origin;
    Vec3 direction;

    friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

struct RawSession {
    std::vector<GazeSample> samples;
    std::uint16_t device_rate_hz = 30;
    std::string session_id;
};

enum class TaskKind { Reflex, Anti, MemoryTraining, MemoryMain, Pursuit };

constexpr std::string_view task_name(TaskKind task) {
    switch (task) {
    case TaskKind::Reflex: return "reflex";
    case TaskKind::Anti: return "anti";
    case TaskKind::MemoryTraining: return "memory_training";
    case TaskKind::MemoryMain: return "memory_main";
    case TaskKind::Pursuit: return "pursuit";
    }
    return "unknown";
}

inline std::optional<TaskKind> task_from_name(std::string_view name) {
    for (auto t : {TaskKind::Reflex, TaskKind::Anti, TaskKind::MemoryTraining, TaskKind::MemoryMain,
                   TaskKind::Pursuit}) {
        if (task_name(t) == name) return t;
    }
    return std::nullopt;
}

constexpr bool is_saccadic(TaskKind task) { return task != TaskKind::Pursuit; }

struct StimulusEvent {
    std::uint64_t timestamp_us = 0;
    double position_deg = 0.0;
    bool is_central = false;
    int trial_index = 0;

    double timestamp_ms() const { return static_cast<double>(timestamp_us) / 1000.0; }
    friend bool operator==(const StimulusEvent&, const StimulusEvent&) = default;
};

struct StimulusTrack {
    TaskKind task = TaskKind::Reflex;
    std::vector<StimulusEvent> events;
    std::optional<double> pursuit_frequency_hz;

    /// Indices into `events` of the non-central (target) stimuli, in order.
    std::vector<std::size_t> peripheral_indices() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (!events[i].is_central) out.push_back(i);
        }
        return out;
    }
};

/// Horizontal gaze in FOV units: 1.0 == fov_half_angle_deg degrees.
struct GazeTrace {
    std::vector<double> timestamps_ms;
    std::vector<double> values;
    double fov_half_angle_deg = 26.5;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    double to_deg(double fov_units) const { return fov_units * fov_half_angle_deg; }
};

/// Savitzky–Golay smoothing parameters.
struct FilterConfig {
    int window = 9;
    int polyorder = 3;
};

struct DetectionConfig {
    double amplitude_factor = 0.5;
    double baseline_window_ms = 100.0;
};

struct FixationConfig {
    double threshold_fraction = 0.05;
    double min_fixation_ms = 50.0;
    double zscore_cutoff = 3.5;
    int speed_radius_samples = 20;
};

/// A peripheral stimulus and the saccade point that answered it, if any.
struct SaccadeMatch {
    StimulusEvent stimulus;
    std::optional<double> saccade_timestamp_ms;
    std::optional<std::size_t> saccade_index;
    std::optional<int> displacement_sign;
    /// Mean pre-stimulus gaze (FOV units) the displacement is measured from.
    double baseline = 0.0;

    bool present() const { return saccade_index.has_value(); }
};

/// The eleven per-session parameters; ABSENT (nullopt) when the task was not
/// recorded or produced no usable events.
struct FeatureSet {
    std::optional<double> reflex_latency_ms;
    std::optional<double> reflex_speed_deg_per_ms;
    std::optional<double> reflex_amp10_deg;
    std::optional<double> reflex_amp20_deg;
    std::optional<double> reflex_fixation_ms;
    std::optional<double> anti_latency_ms;
    std::optional<double> anti_incorrect_ratio;
    std::optional<double> memory_incorrect_ratio;
    std::optional<double> pursuit_speed_mean_deg_per_ms;
    std::optional<double> pursuit_accel_rms_deg_per_ms2;
    std::optional<double> pursuit_speed_std_deg_per_ms;

    friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

/// Short column codes in report order.
inline constexpr std::string_view kFeatureCodes[11] = {"RL", "RSD", "RA10", "RA20", "RAFT", "AL",
                                                       "AISR", "MISR", "SSD", "SSA", "SSS"};
inline constexpr std::size_t kFeatureCount = 11;

inline std::optional<double>& feature_at(FeatureSet& f, std::size_t i) {
    std::optional<double>* fields[kFeatureCount] = {
        &f.reflex_latency_ms, &f.reflex_speed_deg_per_ms, &f.reflex_amp10_deg,
        &f.reflex_amp20_deg, &f.reflex_fixation_ms, &f.anti_latency_ms,
        &f.anti_incorrect_ratio, &f.memory_incorrect_ratio, &f.pursuit_speed_mean_deg_per_ms,
        &f.pursuit_accel_rms_deg_per_ms2, &f.pursuit_speed_std_deg_per_ms};
    return *fields[i];
}

inline const std::optional<double>& feature_at(const FeatureSet& f, std::size_t i) {
    return feature_at(const_cast<FeatureSet&>(f), i);
}

} // namespace oculo
