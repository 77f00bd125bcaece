#include <catch_amalgamated.hpp>

#include "oculo/random.hpp"
#include "oculo/saccade.hpp"
#include "oracles.hpp"

using namespace oculo;
using Catch::Approx;
using Catch::Matchers::MessageMatches;
using Catch::Matchers::StartsWith;

namespace {

GazeTrace grid_trace(std::size_t n, double period_ms = 1000.0 / 30.0) {
    GazeTrace t;
    for (std::size_t k = 0; k < n; ++k) {
        t.timestamps_ms.push_back(static_cast<double>(static_cast<std::uint64_t>(k * period_ms * 1000.0)) / 1000.0);
    }
    t.values.assign(n, 0.0);
    return t;
}

StimulusTrack reflex_track(std::vector<std::pair<std::uint64_t, double>> events) {
    StimulusTrack track;
    track.task = TaskKind::Reflex;
    int trial = 0;
    for (auto [t, pos] : events) track.events.push_back({t, pos, pos == 0.0, pos == 0.0 ? trial : trial++});
    return track;
}

/// A random piecewise-constant trace with a stimulus every ~1.5 s.
std::pair<GazeTrace, StimulusTrack> random_session(Rng& rng) {
    auto trace = grid_trace(400);
    std::vector<std::pair<std::uint64_t, double>> events;
    double level = 0.0;
    const std::vector<double> positions = {-20, -10, 10, 20};
    for (std::uint64_t t = 500'000; t < 12'500'000; t += 1'500'000) {
        const double pos = rng.choose(std::span<const double>(positions));
        events.emplace_back(t, pos);
    }
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (rng.bernoulli(0.05)) level = rng.uniform(-0.8, 0.8);
        trace.values[i] = level + rng.normal(0.0, 0.01);
    }
    return {trace, reflex_track(events)};
}

} // namespace

TEST_CASE("signal_std", "[saccade]") {
    CHECK(signal_std(std::vector<double>(10, 4.2)) == Approx(0.0).margin(1e-15));

    std::vector<double> pm;
    for (int i = 0; i < 50; ++i) pm.insert(pm.end(), {-1.0, 1.0});
    CHECK(signal_std(pm) == 1.0);

    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(2 + rng.index(500));
        for (double& x : v) x = rng.uniform(-1, 1);
        CHECK(std::abs(signal_std(v) - oracle::naive_std(v)) <= 1e-12);
    }
    CHECK_THROWS_MATCHES(signal_std(std::vector<double>{1.0}), Error, MessageMatches(StartsWith("TraceTooShort")));
}

TEST_CASE("ideal step is detected at the first post-jump sample", "[saccade]") {
    auto trace = grid_trace(90);
    const double jump_ms = 1200.0;
    std::size_t first_after = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.timestamps_ms[i] >= jump_ms) {
            trace.values[i] = 10.0 / 26.5;
            if (first_after == 0) first_after = i;
        }
    }
    CHECK(signal_std(trace) == Approx(0.18).margin(0.01));

    const auto track = reflex_track({{500'000, 0.0}, {1'000'000, 10.0}, {2'500'000, 0.0}});
    const auto matches = detect_saccades(trace, track);
    REQUIRE(matches.size() == 1);
    REQUIRE(matches[0].present());
    CHECK(*matches[0].saccade_index == first_after);
    CHECK(*matches[0].displacement_sign == 1);
    const double latency = *matches[0].saccade_timestamp_ms - 1000.0;
    CHECK(latency >= 200.0);
    CHECK(latency < 200.0 + 1000.0 / 30.0);
}

TEST_CASE("flat trace yields no saccade points", "[saccade]") {
    auto trace = grid_trace(200);
    const auto track = reflex_track({{1'000'000, 10.0}, {3'000'000, -20.0}, {5'000'000, 0.0}});
    for (const auto& m : detect_saccades(trace, track)) CHECK_FALSE(m.present());
}

TEST_CASE("a late response is not attributed to the earlier stimulus", "[saccade]") {
    auto trace = grid_trace(120);
    // Stimuli at 1000 ms and 2000 ms; the gaze moves at 2300 ms.
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.timestamps_ms[i] >= 2300.0) trace.values[i] = 0.4;
    }
    const auto track = reflex_track({{1'000'000, 10.0}, {2'000'000, 20.0}});
    const auto matches = detect_saccades(trace, track);
    REQUIRE(matches.size() == 2);
    CHECK_FALSE(matches[0].present());
    REQUIRE(matches[1].present());
    CHECK(*matches[1].saccade_timestamp_ms >= 2300.0);
}

TEST_CASE("a threshold tie does not trigger", "[saccade]") {
    GazeTrace trace;
    trace.timestamps_ms = {0, 100, 200, 300};
    trace.values = {0.0, 0.0, 1.0, 1.0};
    // std = 0.5, so factor 2 puts the threshold exactly at the step height.
    const auto track = reflex_track({{150'000, 10.0}});
    CHECK_FALSE(detect_saccades(trace, track, {2.0, 100.0})[0].present());
    CHECK(detect_saccades(trace, track, {1.999, 100.0})[0].present());
}

TEST_CASE("detect_saccades rejects pursuit and bad configs", "[saccade]") {
    auto trace = grid_trace(30);
    StimulusTrack pursuit;
    pursuit.task = TaskKind::Pursuit;
    pursuit.events = {{0, 0.0, false, 0}};
    CHECK_THROWS_MATCHES(detect_saccades(trace, pursuit), Error, MessageMatches(StartsWith("WrongTask")));
    const auto track = reflex_track({{100'000, 10.0}});
    CHECK_THROWS_AS(detect_saccades(trace, track, {0.0, 100.0}), Error);
    CHECK_THROWS_AS(detect_saccades(trace, track, {0.5, -1.0}), Error);
    CHECK_THROWS_MATCHES(detect_saccades(grid_trace(1), track), Error, MessageMatches(StartsWith("TraceTooShort")));
}

TEST_CASE("saccade points lie inside their response window", "[saccade][property]") {
    Rng rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        auto [trace, track] = random_session(rng);
        const auto matches = detect_saccades(trace, track);
        REQUIRE(matches.size() == track.peripheral_indices().size());
        for (std::size_t k = 0; k < matches.size(); ++k) {
            if (!matches[k].present()) continue;
            CHECK(*matches[k].saccade_timestamp_ms >= matches[k].stimulus.timestamp_ms());
            if (k + 1 < matches.size()) CHECK(*matches[k].saccade_timestamp_ms < matches[k + 1].stimulus.timestamp_ms());
        }
    }
}

TEST_CASE("detection is translation invariant and reflection equivariant", "[saccade][property]") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        auto [trace, track] = random_session(rng);
        const auto base = detect_saccades(trace, track);

        // Dyadic offsets keep every difference exact in floating point.
        auto shifted = trace;
        const double offset = std::ldexp(static_cast<double>(rng.index(64)) - 32.0, -5);
        for (double& v : shifted.values) v += offset;
        const auto moved = detect_saccades(shifted, track);

        auto mirrored = trace;
        for (double& v : mirrored.values) v = -v;
        auto mirrored_track = track;
        for (auto& e : mirrored_track.events) e.position_deg = -e.position_deg;
        const auto flipped = detect_saccades(mirrored, mirrored_track);

        for (std::size_t k = 0; k < base.size(); ++k) {
            CHECK(moved[k].saccade_index == base[k].saccade_index);
            CHECK(flipped[k].saccade_index == base[k].saccade_index);
            if (base[k].present()) CHECK(*flipped[k].displacement_sign == -*base[k].displacement_sign);
        }
    }
}

TEST_CASE("lowering the amplitude factor never delays a saccade point", "[saccade][property]") {
    Rng rng(24);
    for (int trial = 0; trial < 100; ++trial) {
        auto [trace, track] = random_session(rng);
        const double hi = rng.uniform(0.1, 2.0);
        const double lo = hi * rng.uniform(0.1, 1.0);
        const auto strict = detect_saccades(trace, track, {hi, 100.0});
        const auto loose = detect_saccades(trace, track, {lo, 100.0});
        for (std::size_t k = 0; k < strict.size(); ++k) {
            if (!strict[k].present()) continue;
            REQUIRE(loose[k].present());
            CHECK(*loose[k].saccade_index <= *strict[k].saccade_index);
        }
    }
}

TEST_CASE("baseline averages the window before the stimulus", "[saccade]") {
    GazeTrace trace;
    trace.timestamps_ms = {0, 50, 100, 150, 200};
    trace.values = {9.0, 1.0, 2.0, 3.0, 9.0};
    CHECK(pre_stimulus_baseline(trace, 150.0, 100.0) == Approx(2.0));
    CHECK(pre_stimulus_baseline(trace, 25.0, 10.0) == 1.0);
}
