#include <catch_amalgamated.hpp>

#include "oculo/session_io.hpp"
#include "oculo/signal.hpp"
#include "oculo/synth.hpp"

#include <numbers>

using namespace oculo;
using Catch::Approx;

namespace {

int zero_crossings(const StimulusTrack& track) {
    int n = 0;
    for (std::size_t i = 1; i < track.events.size(); ++i) {
        if ((track.events[i - 1].position_deg < 0) != (track.events[i].position_deg < 0)) ++n;
    }
    return n;
}

} // namespace

TEST_CASE("saccadic protocols follow the stimulus schedule", "[synth][protocol]") {
    for (TaskKind task : {TaskKind::Reflex, TaskKind::Anti, TaskKind::MemoryTraining, TaskKind::MemoryMain}) {
        for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL}) {
            const auto track = generate_protocol(ProtocolConfig::for_task(task, seed));
            const auto peripheral = track.peripheral_indices();
            CHECK(peripheral.size() == (task == TaskKind::MemoryTraining ? 10u : 30u));
            for (std::size_t k = 0; k < peripheral.size(); ++k) {
                const auto& e = track.events[peripheral[k]];
                CHECK((e.position_deg == -20 || e.position_deg == -10 || e.position_deg == 10 || e.position_deg == 20));
                REQUIRE(peripheral[k] >= 1);
                const auto& cue = track.events[peripheral[k] - 1];
                CHECK(cue.is_central);
                CHECK(cue.position_deg == 0.0);
                const double lead = e.timestamp_ms() - cue.timestamp_ms();
                CHECK(lead >= 1000.0);
                CHECK(lead <= 3000.0);
                const double hold = track.events[peripheral[k] + 1].timestamp_ms() - e.timestamp_ms();
                CHECK(hold >= 1000.0);
                CHECK(hold <= 3000.0);
            }
            CHECK(track.events.back().is_central);
        }
    }
}

TEST_CASE("pursuit protocol", "[synth][protocol]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto track = generate_protocol(ProtocolConfig::for_task(TaskKind::Pursuit, seed));
        REQUIRE(track.pursuit_frequency_hz);
        const double f = *track.pursuit_frequency_hz;
        CHECK((f == 0.2 || f == 0.4));
        for (const auto& e : track.events) CHECK(std::abs(e.position_deg) <= 15.0);
        const double span_s = (track.events.back().timestamp_ms() - track.events.front().timestamp_ms()) / 1000.0;
        const double estimated = zero_crossings(track) / (2.0 * span_s);
        CHECK(estimated == Approx(f).epsilon(0.01));
    }
}

TEST_CASE("protocol generation is deterministic per seed", "[synth][protocol]") {
    const auto a = generate_protocol(ProtocolConfig::for_task(TaskKind::Reflex, 7));
    const auto b = generate_protocol(ProtocolConfig::for_task(TaskKind::Reflex, 7));
    const auto c = generate_protocol(ProtocolConfig::for_task(TaskKind::Reflex, 8));
    CHECK(a.events == b.events);
    CHECK(a.events != c.events);

    auto bad = ProtocolConfig::for_task(TaskKind::Reflex, 1);
    bad.interval_min_s = 4.0;
    CHECK_THROWS_AS(generate_protocol(bad), Error);
}

TEST_CASE("synthesized sessions are byte-identical per seed", "[synth]") {
    const auto track = generate_protocol(ProtocolConfig::for_task(TaskKind::Anti, 3));
    const auto a = serialize_binary_session(synthesize_gaze(track, SubjectModel::healthy(), 99).session);
    const auto b = serialize_binary_session(synthesize_gaze(track, SubjectModel::healthy(), 99).session);
    const auto c = serialize_binary_session(synthesize_gaze(track, SubjectModel::healthy(), 100).session);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("serialization round-trip preserves the angular trace", "[synth]") {
    std::vector<StimulusTrack> tracks;
    std::uint64_t start = 1'000'000;
    for (TaskKind task : {TaskKind::Reflex, TaskKind::Pursuit}) {
        auto cfg = ProtocolConfig::for_task(task, 5);
        cfg.start_us = start;
        tracks.push_back(generate_protocol(cfg));
        start = tracks.back().events.back().timestamp_us + 3'000'000;
    }
    const auto syn = synthesize_gaze(tracks, SubjectModel::parkinsonian(), 11);
    const auto parsed = parse_binary_session(serialize_binary_session(syn.session));
    const auto before = horizontal_trace(syn.session, 1.0);
    const auto after = horizontal_trace(parsed, 1.0);
    REQUIRE(before.size() == after.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) worst = std::max(worst, std::abs(before.values[i] - after.values[i]));
    CHECK(worst <= 0.02);
}

TEST_CASE("ground truth tallies count the planted labels", "[synth]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto subject = SubjectModel::healthy();
        subject.anti_error_prob = 0.4;
        subject.memory_error_prob = 0.3;
        for (TaskKind task : {TaskKind::Anti, TaskKind::MemoryMain}) {
            const auto track = generate_protocol(ProtocolConfig::for_task(task, seed));
            const auto syn = synthesize_gaze(track, subject, seed + 100);
            int planted = 0, scored = 0, incorrect = 0;
            for (const auto& tr : syn.truth.trials) {
                planted += tr.planted_error;
                if (tr.scored_incorrect) {
                    ++scored;
                    incorrect += *tr.scored_incorrect;
                }
            }
            const auto tally = syn.truth.tally(task);
            CHECK(tally.planted_errors == planted);
            CHECK(tally.scored_total == scored);
            CHECK(tally.scored_incorrect == incorrect);
            CHECK(scored == (task == TaskKind::Anti ? 30 : 29));
            if (task == TaskKind::Anti) CHECK(incorrect == planted);
            // A planted memory error only shows when the two targets share no side.
            if (task == TaskKind::MemoryMain) CHECK(incorrect <= planted);
        }
    }
}

TEST_CASE("synthesized reflex gaze lands on gain times target", "[synth]") {
    const auto track = generate_protocol(ProtocolConfig::for_task(TaskKind::Reflex, 9));
    auto subject = SubjectModel::ideal(250.0);
    subject.saccade_gain = 0.7;
    const auto syn = synthesize_gaze(track, subject, 1);
    const auto trace = horizontal_trace(syn.session, 1.0);
    for (const auto& tr : syn.truth.trials) {
        CHECK(tr.latency_ms == 250.0);
        CHECK(tr.final_target_deg == Approx(0.7 * tr.stimulus_deg));
        // Mid-fixation sample sits on the target.
        const double mid = 0.5 * (tr.fixation_start_ms + tr.fixation_end_ms);
        const auto it = std::lower_bound(trace.timestamps_ms.begin(), trace.timestamps_ms.end(), mid);
        CHECK(trace.values[static_cast<std::size_t>(it - trace.timestamps_ms.begin())] ==
              Approx(tr.final_target_deg).margin(1e-4));
    }
}

TEST_CASE("pursuit ground truth formulas", "[synth]") {
    PursuitTruth p{15.0, 0.2, 1.0, 0.0};
    CHECK(p.speed_mean_deg_per_ms() == Approx(0.012));
    CHECK(p.accel_rms_deg_per_ms2() == Approx(1.675e-5).epsilon(1e-3));
}

TEST_CASE("ground truth CSV is stable", "[synth]") {
    const auto track = generate_protocol(ProtocolConfig::for_task(TaskKind::Anti, 2));
    const auto a = ground_truth_csv(synthesize_gaze(track, SubjectModel::healthy(), 5).truth);
    CHECK(a == ground_truth_csv(synthesize_gaze(track, SubjectModel::healthy(), 5).truth));
    CHECK(a.rfind("# anti planted_errors=", 0) == 0);
}
