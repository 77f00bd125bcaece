#pragma once

// On-disk formats: the OMR1 binary gaze log, the line-delimited stimulus log,
// and the CSV / JSON feature reports.
//
// OMR1 layout (little-endian):
//   char[4] magic "OMR1" | u16 version (1) | u16 rate_hz | u32 sample_count
//   sample_count x { u64 timestamp_us | f32 origin[3] | f32 direction[3] }

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "oculo/error.hpp"
#include "oculo/types.hpp"

namespace oculo {

inline constexpr std::array<char, 4> kSessionMagic = {'O', 'M', 'R', '1'};
inline constexpr std::uint16_t kSessionVersion = 1;
inline constexpr std::size_t kSessionHeaderBytes = 12;
inline constexpr std::size_t kSampleBytes = 32;
/// Directions whose stored norm is off by more than this are rejected, not renormalized.
inline constexpr double kDirectionNormTolerance = 1e-3;

namespace detail {

class ByteWriter {
public:
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void raw(std::span<const char> chars) {
        for (char c : chars) bytes_.push_back(static_cast<std::uint8_t>(c));
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    float f32() { return std::bit_cast<float>(u32()); }

private:
    std::uint64_t get(int n) {
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

/// Shortest round-trip decimal; integral values keep a trailing ".0".
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    std::string s(buf.data(), end);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<std::string_view> lines(std::string_view text) { return split(text, '\n'); }

} // namespace detail

// ---------------------------------------------------------------------------
// Binary session
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> serialize_binary_session(const RawSession& session) {
    detail::ByteWriter w;
    w.raw(kSessionMagic);
    w.u16(kSessionVersion);
    w.u16(session.device_rate_hz);
    w.u32(static_cast<std::uint32_t>(session.samples.size()));
    for (const auto& s : session.samples) {
        w.u64(s.timestamp_us);
        for (double c : {s.origin.x, s.origin.y, s.origin.z}) w.f32(static_cast<float>(c));
        for (double c : {s.direction.x, s.direction.y, s.direction.z}) w.f32(static_cast<float>(c));
    }
    return w.take();
}

/// Parses an OMR1 recording. Directions are renormalized to unit length;
/// out-of-order timestamps are rejected, never repaired.
inline RawSession parse_binary_session(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kSessionMagic.size() ||
        std::memcmp(bytes.data(), kSessionMagic.data(), kSessionMagic.size()) != 0) {
        throw Error(ErrorCode::BadMagic, "input is not an OMR1 session file");
    }
    if (bytes.size() < kSessionHeaderBytes) {
        throw Error(ErrorCode::TruncatedPayload, "header shorter than 12 bytes");
    }
    detail::ByteReader header(bytes.subspan(4, kSessionHeaderBytes - 4));
    const auto version = header.u16();
    if (version != kSessionVersion) {
        throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(version));
    }
    RawSession session;
    session.device_rate_hz = header.u16();
    const std::uint64_t count = header.u32();
    const std::uint64_t payload = bytes.size() - kSessionHeaderBytes;
    if (payload != count * kSampleBytes) {
        throw Error(ErrorCode::TruncatedPayload, "declared " + std::to_string(count) + " samples, payload has " +
                                                     std::to_string(payload) + " bytes");
    }
    session.samples.reserve(count);
    detail::ByteReader r(bytes.subspan(kSessionHeaderBytes));
    for (std::uint64_t i = 0; i < count; ++i) {
        GazeSample s;
        s.timestamp_us = r.u64();
        s.origin = {r.f32(), r.f32(), r.f32()};
        s.direction = {r.f32(), r.f32(), r.f32()};
        if (!s.origin.finite() || !s.direction.finite()) {
            throw Error(ErrorCode::NonFiniteField, "sample " + std::to_string(i));
        }
        const double n = s.direction.norm();
        if (std::abs(n - 1.0) > kDirectionNormTolerance) {
            throw Error(ErrorCode::NonFiniteField,
                        "sample " + std::to_string(i) + " direction norm " + detail::format_double(n));
        }
        s.direction = (1.0 / n) * s.direction;
        if (!session.samples.empty() && s.timestamp_us <= session.samples.back().timestamp_us) {
            throw Error(ErrorCode::NonMonotonicTimestamps, "sample " + std::to_string(i));
        }
        session.samples.push_back(s);
    }
    return session;
}

// ---------------------------------------------------------------------------
// Stimulus log
// ---------------------------------------------------------------------------

inline constexpr std::string_view kStimulusColumns = "timestamp_us,position_deg,is_central,trial_index";
inline constexpr std::array<double, 5> kSaccadicPositions = {-20.0, -10.0, 0.0, 10.0, 20.0};
inline constexpr double kPursuitAmplitudeDeg = 15.0;

inline std::string write_stimulus_log(const StimulusTrack& track) {
    std::string out = "# task=" + std::string(task_name(track.task)) + "\n";
    if (track.pursuit_frequency_hz) {
        out += "# pursuit_frequency_hz=" + detail::format_double(*track.pursuit_frequency_hz) + "\n";
    }
    out += std::string(kStimulusColumns) + "\n";
    for (const auto& e : track.events) {
        out += std::to_string(e.timestamp_us) + "," + detail::format_double(e.position_deg) + "," +
               (e.is_central ? "1" : "0") + "," + std::to_string(e.trial_index) + "\n";
    }
    return out;
}

/// Zero crossings of the position series, as cycles per second.
inline std::optional<double> estimate_pursuit_frequency(const std::vector<StimulusEvent>& events) {
    if (events.size() < 2) return std::nullopt;
    int crossings = 0;
    for (std::size_t i = 1; i < events.size(); ++i) {
        const double a = events[i - 1].position_deg;
        const double b = events[i].position_deg;
        if ((a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)) ++crossings;
    }
    const double span_s =
        static_cast<double>(events.back().timestamp_us - events.front().timestamp_us) / 1e6;
    if (crossings == 0 || span_s <= 0.0) return std::nullopt;
    return crossings / (2.0 * span_s);
}

inline StimulusTrack parse_stimulus_log(std::string_view text) {
    std::optional<TaskKind> task;
    std::optional<double> frequency;
    std::vector<StimulusEvent> events;
    std::size_t line_no = 0;

    for (auto line : detail::lines(text)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto body = detail::trim(line.substr(1));
            auto eq = body.find('=');
            if (eq == std::string_view::npos) continue;
            auto key = detail::trim(body.substr(0, eq));
            auto value = detail::trim(body.substr(eq + 1));
            if (key == "task") {
                task = task_from_name(value);
                if (!task) throw Error(ErrorCode::UnknownTask, "task '" + std::string(value) + "'");
            } else if (key == "pursuit_frequency_hz") {
                frequency = detail::parse_double(value);
                if (!frequency || !std::isfinite(*frequency) || *frequency <= 0.0) {
                    throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no));
                }
            }
            continue;
        }
        if (!task) throw Error(ErrorCode::UnknownTask, "missing '# task=<name>' header");
        if (line == kStimulusColumns) continue;

        const auto fields = detail::split(line, ',');
        const auto where = "line " + std::to_string(line_no);
        if (fields.size() != 4) throw Error(ErrorCode::MalformedRecord, where);
        auto ts = detail::parse_int<std::uint64_t>(fields[0]);
        auto pos = detail::parse_double(fields[1]);
        auto central = detail::parse_int<int>(fields[2]);
        auto trial = detail::parse_int<int>(fields[3]);
        if (!ts || !pos || !central || !trial || (*central != 0 && *central != 1)) {
            throw Error(ErrorCode::MalformedRecord, where);
        }
        if (!std::isfinite(*pos)) throw Error(ErrorCode::NonFiniteField, where);

        StimulusEvent e{*ts, *pos, *central == 1, *trial};
        if (!events.empty() && e.timestamp_us <= events.back().timestamp_us) {
            throw Error(ErrorCode::NonMonotonicTimestamps, where);
        }
        if (is_saccadic(*task)) {
            bool allowed = false;
            for (double p : kSaccadicPositions) allowed = allowed || e.position_deg == p;
            if (!allowed || e.is_central != (e.position_deg == 0.0)) {
                throw Error(ErrorCode::IllegalPosition, where + " position " + std::string(fields[1]));
            }
        } else if (std::abs(e.position_deg) > kPursuitAmplitudeDeg + 1e-9) {
            throw Error(ErrorCode::IllegalPosition, where + " position " + std::string(fields[1]));
        }
        events.push_back(e);
    }
    if (!task) throw Error(ErrorCode::UnknownTask, "missing '# task=<name>' header");

    StimulusTrack track{*task, std::move(events), std::nullopt};
    if (track.task == TaskKind::Pursuit) {
        track.pursuit_frequency_hz = frequency ? frequency : estimate_pursuit_frequency(track.events);
    }
    return track;
}

// ---------------------------------------------------------------------------
// Feature reports
// ---------------------------------------------------------------------------

enum class ReportFormat { Json, Csv };

inline std::string write_feature_report(const FeatureSet& features, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::string header, row;
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            if (i) {
                header += ',';
                row += ',';
            }
            header += kFeatureCodes[i];
            if (const auto& v = feature_at(features, i)) row += detail::format_double(*v);
        }
        return header + "\n" + row + "\n";
    }
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        const auto& v = feature_at(features, i);
        j[std::string(kFeatureCodes[i])] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    }
    return j.dump(2) + "\n";
}

inline FeatureSet read_feature_report(std::string_view text, ReportFormat format) {
    FeatureSet f;
    if (format == ReportFormat::Csv) {
        std::vector<std::string_view> rows;
        for (auto l : detail::lines(text)) {
            if (!l.empty()) rows.push_back(l);
        }
        if (rows.size() != 2) throw Error(ErrorCode::MalformedRecord, "expected header and one row");
        const auto header = detail::split(rows[0], ',');
        const auto cells = detail::split(rows[1], ',');
        if (header.size() != kFeatureCount || cells.size() != kFeatureCount) {
            throw Error(ErrorCode::MalformedRecord, "expected 11 columns");
        }
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            if (header[i] != kFeatureCodes[i]) {
                throw Error(ErrorCode::MalformedRecord, "unexpected column " + std::string(header[i]));
            }
            if (cells[i].empty() || cells[i] == "null") continue;
            auto v = detail::parse_double(cells[i]);
            if (!v) throw Error(ErrorCode::MalformedRecord, "column " + std::string(header[i]));
            feature_at(f, i) = *v;
        }
        return f;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::MalformedRecord, "report is not an object");
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        const auto key = std::string(kFeatureCodes[i]);
        if (!j.contains(key)) throw Error(ErrorCode::MalformedRecord, "missing " + key);
        const auto& v = j[key];
        if (v.is_null()) continue;
        if (!v.is_number()) throw Error(ErrorCode::MalformedRecord, key + " is not a number");
        feature_at(f, i) = v.get<double>();
    }
    return f;
}

} // namespace oculo
