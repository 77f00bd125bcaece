#pragma once

// Synthetic ground truth: stimulus protocols for the four tasks and gaze
// traces from a parameterized oculomotor subject, with every planted value
// recorded so the extraction pipeline can be checked against it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oculo/random.hpp"
#include "oculo/session_io.hpp"
#include "oculo/types.hpp"

namespace oculo {

struct ProtocolConfig {
    TaskKind task = TaskKind::Reflex;
    int repetitions = 30;
    double interval_min_s = 1.0;
    double interval_max_s = 3.0;
    std::vector<double> positions_deg = {-20.0, -10.0, 10.0, 20.0};
    double pursuit_amp_deg = 15.0;
    std::vector<double> pursuit_freqs_hz = {0.2, 0.4};
    int rate_hz = 30;
    std::uint64_t seed = 0;
    /// Timestamp of the first event.
    std::uint64_t start_us = 1'000'000;

    static ProtocolConfig for_task(TaskKind task, std::uint64_t seed) {
        ProtocolConfig c;
        c.task = task;
        c.seed = seed;
        if (task == TaskKind::MemoryTraining) c.repetitions = 10;
        return c;
    }
};

inline void validate(const ProtocolConfig& c) {
    if (c.repetitions < 1 || !(c.interval_min_s > 0.0) || c.interval_max_s < c.interval_min_s ||
        c.positions_deg.empty() || c.pursuit_freqs_hz.empty() || c.rate_hz <= 0 || !(c.pursuit_amp_deg > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "invalid protocol configuration");
    }
}

/// Saccadic tasks: per trial a central point, then after a random interval a
/// peripheral point, which stays up for another random interval. A trailing
/// central point closes the last trial. Pursuit: -A cos(2 pi f t) sampled at
/// rate_hz for `repetitions` full cycles.
inline StimulusTrack generate_protocol(const ProtocolConfig& config) {
    validate(config);
    Rng rng(config.seed);
    StimulusTrack track;
    track.task = config.task;

    if (config.task == TaskKind::Pursuit) {
        const double f = rng.choose(std::span<const double>(config.pursuit_freqs_hz));
        track.pursuit_frequency_hz = f;
        const auto samples = static_cast<std::uint64_t>(std::llround(config.repetitions / f * config.rate_hz));
        for (std::uint64_t k = 0; k <= samples; ++k) {
            const std::uint64_t dt = k * 1'000'000ULL / static_cast<std::uint64_t>(config.rate_hz);
            const double t_s = static_cast<double>(dt) / 1e6;
            StimulusEvent e;
            e.timestamp_us = config.start_us + dt;
            e.position_deg = -config.pursuit_amp_deg * std::cos(2.0 * std::numbers::pi * f * t_s);
            e.trial_index = std::min(static_cast<int>(std::floor(t_s * f)), config.repetitions - 1);
            track.events.push_back(e);
        }
        return track;
    }

    auto interval_us = [&] {
        return static_cast<std::uint64_t>(std::llround(rng.uniform(config.interval_min_s, config.interval_max_s) * 1e6));
    };
    std::uint64_t t = config.start_us;
    for (int k = 0; k < config.repetitions; ++k) {
        track.events.push_back({t, 0.0, true, k});
        t += interval_us();
        track.events.push_back({t, rng.choose(std::span<const double>(config.positions_deg)), false, k});
        t += interval_us();
    }
    track.events.push_back({t, 0.0, true, config.repetitions});
    return track;
}

/// Oculomotor behaviour of a synthetic participant.
struct SubjectModel {
    double latency_mean_ms = 220.0;
    double latency_sd_ms = 30.0;
    double saccade_gain = 1.0;
    double peak_speed_deg_per_ms = 0.4;
    double anti_error_prob = 0.1;
    double memory_error_prob = 0.1;
    double fixation_noise_deg = 0.2;
    double pursuit_gain = 0.95;
    double pursuit_lag_ms = 100.0;
    /// Delay from an erroneous antisaccade to its corrective saccade.
    double anti_correction_ms = 180.0;
    double max_latency_ms = 800.0;

    static SubjectModel healthy() { return {}; }

    static SubjectModel parkinsonian() {
        SubjectModel m;
        m.latency_mean_ms = 290.0;
        m.latency_sd_ms = 45.0;
        m.saccade_gain = 0.75;
        m.peak_speed_deg_per_ms = 0.28;
        m.anti_error_prob = 0.35;
        m.memory_error_prob = 0.3;
        m.fixation_noise_deg = 0.35;
        m.pursuit_gain = 0.8;
        m.pursuit_lag_ms = 160.0;
        return m;
    }

    /// Idealized subject: exact latency, accurate, no errors, no noise.
    static SubjectModel ideal(double latency_ms = 250.0) {
        SubjectModel m;
        m.latency_mean_ms = latency_ms;
        m.latency_sd_ms = 0.0;
        m.anti_error_prob = 0.0;
        m.memory_error_prob = 0.0;
        m.fixation_noise_deg = 0.0;
        m.pursuit_gain = 1.0;
        return m;
    }
};

inline void validate(const SubjectModel& m) {
    const bool ok = m.latency_mean_ms >= 0.0 && m.latency_sd_ms >= 0.0 && m.saccade_gain > 0.0 &&
                    m.peak_speed_deg_per_ms > 0.0 && m.anti_error_prob >= 0.0 && m.anti_error_prob <= 1.0 &&
                    m.memory_error_prob >= 0.0 && m.memory_error_prob <= 1.0 && m.fixation_noise_deg >= 0.0 &&
                    m.pursuit_gain > 0.0 && m.pursuit_lag_ms >= 0.0 && m.anti_correction_ms > 0.0 &&
                    m.max_latency_ms > 0.0;
    if (!ok) throw Error(ErrorCode::InvalidConfig, "invalid subject model");
}

struct TrialTruth {
    TaskKind task = TaskKind::Reflex;
    int trial_index = 0;
    std::uint64_t stimulus_us = 0;
    double stimulus_deg = 0.0;
    double latency_ms = 0.0;
    /// Where the first saccade lands (degrees).
    double first_target_deg = 0.0;
    /// Where the gaze settles for the rest of the trial (degrees).
    double final_target_deg = 0.0;
    bool planted_error = false;
    /// Direction verdict as the scoring rules will see it; ABSENT for
    /// unscored trials (reflex, memory trial 0).
    std::optional<bool> scored_incorrect;
    double fixation_start_ms = 0.0;
    double fixation_end_ms = 0.0;
};

struct PursuitTruth {
    double amplitude_deg = 0.0;
    double frequency_hz = 0.0;
    double gain = 0.0;
    double lag_ms = 0.0;

    double speed_mean_deg_per_ms() const { return 4.0 * gain * amplitude_deg * frequency_hz / 1000.0; }
    double accel_rms_deg_per_ms2() const {
        const double w = 2.0 * std::numbers::pi * frequency_hz;
        return gain * amplitude_deg * w * w / std::numbers::sqrt2 / 1e6;
    }
};

struct TaskTally {
    int planted_errors = 0;
    int scored_incorrect = 0;
    int scored_total = 0;

    std::optional<double> planted_ratio() const {
        if (scored_total == 0) return std::nullopt;
        return static_cast<double>(scored_incorrect) / static_cast<double>(scored_total);
    }
};

struct GroundTruth {
    std::vector<TrialTruth> trials;
    std::optional<PursuitTruth> pursuit;

    TaskTally tally(TaskKind task) const {
        TaskTally t;
        for (const auto& tr : trials) {
            if (tr.task != task) continue;
            t.planted_errors += tr.planted_error ? 1 : 0;
            if (tr.scored_incorrect) {
                ++t.scored_total;
                t.scored_incorrect += *tr.scored_incorrect ? 1 : 0;
            }
        }
        return t;
    }

    std::optional<double> mean_latency_ms(TaskKind task) const {
        double sum = 0.0;
        int n = 0;
        for (const auto& tr : trials) {
            if (tr.task == task) {
                sum += tr.latency_ms;
                ++n;
            }
        }
        if (n == 0) return std::nullopt;
        return sum / n;
    }
};

struct SyntheticSession {
    RawSession session;
    GroundTruth truth;
};

namespace detail {

/// A logistic position step: from + (to - from) * sigma((t - mid) / tau).
struct Movement {
    double mid_ms;
    double from_deg;
    double to_deg;
    double tau_ms;

    double contribution(double t_ms) const {
        const double x = (t_ms - mid_ms) / tau_ms;
        if (x >= 50.0) return to_deg - from_deg;
        if (x <= -50.0) return 0.0;
        const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
        return (to_deg - from_deg) * s;
    }
};

/// Onset-to-midpoint offset, in units of tau (sigma(-3) ~ 4.7 %).
inline constexpr double kOnsetToMidTau = 3.0;

struct PursuitSegment {
    double start_ms;
    double end_ms;
    double amp_deg;
    double freq_hz;
    double gain;
    double lag_ms;

    /// Gaze offset relative to the held start position -gain * amp.
    double contribution(double t_ms) const {
        const double u = std::clamp(t_ms - lag_ms, start_ms, end_ms) - start_ms;
        const double s = -amp_deg * std::cos(2.0 * std::numbers::pi * freq_hz * u / 1000.0);
        return gain * (s + amp_deg);
    }
};

} // namespace detail

/// Renders one concatenated recording for all `tracks` (given in time
/// order). Saccades are logistic steps whose peak velocity equals
/// peak_speed_deg_per_ms; noise is added per sample.
inline SyntheticSession synthesize_gaze(std::span<const StimulusTrack> tracks, const SubjectModel& subject,
                                        std::uint64_t seed, int rate_hz = 30) {
    validate(subject);
    if (rate_hz <= 0 || rate_hz > 65535) throw Error(ErrorCode::InvalidConfig, "rate_hz out of range");
    Rng rng(seed);
    const double period_ms = 1000.0 / rate_hz;
    SyntheticSession out;
    auto& truth = out.truth;
    std::vector<detail::Movement> moves;
    std::vector<detail::PursuitSegment> pursuits;
    double gaze = 0.0;

    auto saccade = [&](double onset_ms, double to_deg) {
        const double amp = std::abs(to_deg - gaze);
        if (amp == 0.0) return onset_ms;
        const double tau = amp / (4.0 * subject.peak_speed_deg_per_ms);
        const double mid = onset_ms + detail::kOnsetToMidTau * tau;
        moves.push_back({mid, gaze, to_deg, tau});
        gaze = to_deg;
        return mid + detail::kOnsetToMidTau * tau;
    };
    auto draw_latency = [&] {
        const double l = rng.normal(subject.latency_mean_ms, subject.latency_sd_ms);
        return std::clamp(l, 2.0 * period_ms, subject.max_latency_ms);
    };

    std::uint64_t end_us = 0;
    for (const auto& track : tracks) {
        if (track.events.empty()) continue;
        end_us = std::max(end_us, track.events.back().timestamp_us);

        if (track.task == TaskKind::Pursuit) {
            const double f = track.pursuit_frequency_hz.value_or(0.2);
            double amp = 0.0;
            for (const auto& e : track.events) amp = std::max(amp, std::abs(e.position_deg));
            const double start = track.events.front().timestamp_ms();
            const double stop = track.events.back().timestamp_ms();
            saccade(start - 600.0, -subject.pursuit_gain * amp);
            pursuits.push_back({start, stop, amp, f, subject.pursuit_gain, subject.pursuit_lag_ms});
            saccade(stop + subject.pursuit_lag_ms + 400.0, 0.0);
            truth.pursuit = PursuitTruth{amp, f, subject.pursuit_gain, subject.pursuit_lag_ms};
            continue;
        }

        std::optional<double> previous_position;
        std::optional<std::size_t> open_trial;
        for (const auto& e : track.events) {
            const double t = e.timestamp_ms();
            if (e.is_central) {
                if (gaze != 0.0) {
                    const double onset = t + draw_latency();
                    if (open_trial) {
                        auto& end = truth.trials[*open_trial].fixation_end_ms;
                        end = std::min(end, onset);
                    }
                    saccade(onset, 0.0);
                }
                open_trial.reset();
                continue;
            }
            TrialTruth tr;
            tr.task = track.task;
            tr.trial_index = e.trial_index;
            tr.stimulus_us = e.timestamp_us;
            tr.stimulus_deg = e.position_deg;
            tr.latency_ms = draw_latency();
            const double g = subject.saccade_gain;
            const double p = e.position_deg;
            const double onset = t + tr.latency_ms;
            double landed = 0.0;

            switch (track.task) {
            case TaskKind::Reflex:
                tr.first_target_deg = tr.final_target_deg = g * p;
                landed = saccade(onset, g * p);
                break;
            case TaskKind::Anti:
                tr.planted_error = rng.bernoulli(subject.anti_error_prob);
                tr.scored_incorrect = tr.planted_error;
                tr.final_target_deg = -g * p;
                if (tr.planted_error) {
                    tr.first_target_deg = g * p;
                    saccade(onset, g * p);
                    landed = saccade(onset + subject.anti_correction_ms, -g * p);
                } else {
                    tr.first_target_deg = -g * p;
                    landed = saccade(onset, -g * p);
                }
                break;
            case TaskKind::MemoryTraining:
            case TaskKind::MemoryMain:
                if (previous_position) {
                    tr.planted_error = rng.bernoulli(subject.memory_error_prob);
                    const double target = tr.planted_error ? p : *previous_position;
                    tr.first_target_deg = tr.final_target_deg = g * target;
                    tr.scored_incorrect = (target > 0) != (*previous_position > 0);
                } else {
                    tr.first_target_deg = tr.final_target_deg = g * p;
                }
                landed = saccade(onset, tr.final_target_deg);
                break;
            case TaskKind::Pursuit:
                break;
            }
            previous_position = p;
            tr.fixation_start_ms = landed;
            tr.fixation_end_ms = std::numeric_limits<double>::infinity();
            truth.trials.push_back(tr);
            open_trial = truth.trials.size() - 1;
        }
    }
    // Trials whose fixation was not cut by a return saccade end at the next stimulus.
    for (std::size_t i = 0; i < truth.trials.size(); ++i) {
        auto& tr = truth.trials[i];
        if (std::isinf(tr.fixation_end_ms)) {
            tr.fixation_end_ms = i + 1 < truth.trials.size() ? static_cast<double>(truth.trials[i + 1].stimulus_us) / 1000.0
                                                             : static_cast<double>(end_us) / 1000.0;
        }
    }

    const std::uint64_t stop_us = end_us + 1'000'000ULL;
    auto& session = out.session;
    session.device_rate_hz = static_cast<std::uint16_t>(rate_hz);
    for (std::uint64_t k = 0;; ++k) {
        const std::uint64_t t_us = k * 1'000'000ULL / static_cast<std::uint64_t>(rate_hz);
        if (t_us > stop_us) break;
        const double t_ms = static_cast<double>(t_us) / 1000.0;
        double deg = 0.0;
        for (const auto& m : moves) deg += m.contribution(t_ms);
        for (const auto& p : pursuits) deg += p.contribution(t_ms);
        if (subject.fixation_noise_deg > 0.0) deg += rng.normal(0.0, subject.fixation_noise_deg);
        const double rad = deg * std::numbers::pi / 180.0;
        GazeSample s;
        s.timestamp_us = t_us;
        s.origin = {0.0, 0.0, 0.0};
        s.direction = {std::sin(rad), 0.0, std::cos(rad)};
        session.samples.push_back(s);
    }
    return out;
}

inline SyntheticSession synthesize_gaze(const StimulusTrack& track, const SubjectModel& subject, std::uint64_t seed,
                                        int rate_hz = 30) {
    return synthesize_gaze(std::span<const StimulusTrack>(&track, 1), subject, seed, rate_hz);
}

inline std::string ground_truth_csv(const GroundTruth& truth) {
    std::string out;
    for (TaskKind task : {TaskKind::Reflex, TaskKind::Anti, TaskKind::MemoryTraining, TaskKind::MemoryMain}) {
        const auto t = truth.tally(task);
        if (t.scored_total == 0 && t.planted_errors == 0) continue;
        out += "# " + std::string(task_name(task)) + " planted_errors=" + std::to_string(t.planted_errors) +
               " scored_incorrect=" + std::to_string(t.scored_incorrect) +
               " scored_total=" + std::to_string(t.scored_total);
        if (auto r = t.planted_ratio()) out += " ratio=" + detail::format_double(*r);
        out += "\n";
    }
    if (truth.pursuit) {
        const auto& p = *truth.pursuit;
        out += "# pursuit amplitude_deg=" + detail::format_double(p.amplitude_deg) +
               " frequency_hz=" + detail::format_double(p.frequency_hz) + " gain=" + detail::format_double(p.gain) +
               " lag_ms=" + detail::format_double(p.lag_ms) + "\n";
    }
    out += "task,trial_index,stimulus_us,stimulus_deg,latency_ms,first_target_deg,final_target_deg,planted_error,"
           "scored_label,fixation_start_ms,fixation_end_ms\n";
    for (const auto& tr : truth.trials) {
        out += std::string(task_name(tr.task)) + "," + std::to_string(tr.trial_index) + "," +
               std::to_string(tr.stimulus_us) + "," + detail::format_double(tr.stimulus_deg) + "," +
               detail::format_double(tr.latency_ms) + "," + detail::format_double(tr.first_target_deg) + "," +
               detail::format_double(tr.final_target_deg) + "," + (tr.planted_error ? "1" : "0") + "," +
               (tr.scored_incorrect ? (*tr.scored_incorrect ? "incorrect" : "correct") : "") + "," +
               detail::format_double(tr.fixation_start_ms) + "," + detail::format_double(tr.fixation_end_ms) + "\n";
    }
    return out;
}

} // namespace oculo
