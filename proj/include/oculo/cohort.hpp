#pragma once

// Cohort aggregation: pooled min-max normalization of each parameter to
// [0, 1], per-group boxplot statistics, and their CSV / SVG renderings.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oculo/error.hpp"
#include "oculo/session_io.hpp"
#include "oculo/types.hpp"

namespace oculo {

enum class Group { Healthy, PD };

constexpr std::string_view group_name(Group g) { return g == Group::Healthy ? "Healthy" : "PD"; }

inline std::optional<Group> group_from_name(std::string_view s) {
    std::string lower(s);
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "healthy" || lower == "hc" || lower == "control") return Group::Healthy;
    if (lower == "pd" || lower == "parkinson") return Group::PD;
    return std::nullopt;
}

struct CohortRow {
    std::string subject_id;
    Group group = Group::Healthy;
    FeatureSet features;
};

struct CohortTable {
    std::vector<CohortRow> rows;
};

struct BoxplotStats {
    std::string_view parameter;
    Group group = Group::Healthy;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Quantile of sorted data by linear interpolation between order statistics
/// (position (n - 1) p).
inline double quantile_sorted(std::span<const double> sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline void check_unique_subjects(const CohortTable& table) {
    std::set<std::string_view> seen;
    for (const auto& r : table.rows) {
        if (!seen.insert(r.subject_id).second) {
            throw Error(ErrorCode::InvalidConfig, "duplicate subject id " + r.subject_id);
        }
    }
}

/// x' = (x - min) / (max - min) per parameter, pooled over both groups.
/// ABSENT values stay ABSENT. With `lenient`, a zero-range parameter maps
/// to 0 and is listed in `degenerate` instead of raising.
inline CohortTable normalize_cohort(const CohortTable& table, bool lenient = false,
                                    std::vector<std::string_view>* degenerate = nullptr) {
    check_unique_subjects(table);
    CohortTable out = table;
    for (std::size_t p = 0; p < kFeatureCount; ++p) {
        std::optional<double> lo, hi;
        for (const auto& r : table.rows) {
            if (const auto& v = feature_at(r.features, p)) {
                lo = lo ? std::min(*lo, *v) : *v;
                hi = hi ? std::max(*hi, *v) : *v;
            }
        }
        if (!lo) continue;
        const double range = *hi - *lo;
        if (!(range > 0.0)) {
            if (!lenient) {
                throw Error(ErrorCode::DegenerateParameter, std::string(kFeatureCodes[p]) + " has zero range");
            }
            if (degenerate) degenerate->push_back(kFeatureCodes[p]);
        }
        for (auto& r : out.rows) {
            if (auto& v = feature_at(r.features, p)) v = range > 0.0 ? (*v - *lo) / range : 0.0;
        }
    }
    return out;
}

/// Min / quartiles / max per (parameter, group), parameter-major in report
/// order, Healthy before PD. With `skip_empty`, groups without values for a
/// parameter are omitted instead of raising EmptyGroup.
inline std::vector<BoxplotStats> boxplot_stats(const CohortTable& table, bool skip_empty = false) {
    std::vector<BoxplotStats> out;
    for (std::size_t p = 0; p < kFeatureCount; ++p) {
        for (Group g : {Group::Healthy, Group::PD}) {
            std::vector<double> values;
            for (const auto& r : table.rows) {
                if (r.group == g) {
                    if (const auto& v = feature_at(r.features, p)) values.push_back(*v);
                }
            }
            if (values.empty()) {
                if (skip_empty) continue;
                throw Error(ErrorCode::EmptyGroup, std::string(kFeatureCodes[p]) + " has no values for group " +
                                                       std::string(group_name(g)));
            }
            std::sort(values.begin(), values.end());
            out.push_back({kFeatureCodes[p], g, values.front(), quantile_sorted(values, 0.25),
                           quantile_sorted(values, 0.5), quantile_sorted(values, 0.75), values.back()});
        }
    }
    return out;
}

inline std::string boxplots_csv(std::span<const BoxplotStats> stats) {
    std::string out = "parameter,group,min,q1,median,q3,max\n";
    for (const auto& s : stats) {
        out += std::string(s.parameter) + "," + std::string(group_name(s.group));
        for (double v : {s.min, s.q1, s.median, s.q3, s.max}) out += "," + detail::format_double(v);
        out += "\n";
    }
    return out;
}

inline std::string cohort_csv(const CohortTable& table) {
    std::string out = "subject_id,group";
    for (auto code : kFeatureCodes) out += "," + std::string(code);
    out += "\n";
    for (const auto& r : table.rows) {
        out += r.subject_id + "," + std::string(group_name(r.group));
        for (std::size_t p = 0; p < kFeatureCount; ++p) {
            out += ",";
            if (const auto& v = feature_at(r.features, p)) out += detail::format_double(*v);
        }
        out += "\n";
    }
    return out;
}

/// Two-column `subject_id,group` file; a header line is optional.
inline std::vector<std::pair<std::string, Group>> parse_group_file(std::string_view text) {
    std::vector<std::pair<std::string, Group>> out;
    std::size_t line_no = 0;
    for (auto line : detail::lines(text)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto fields = detail::split(line, ',');
        if (fields.size() != 2) throw Error(ErrorCode::MalformedRecord, "group file line " + std::to_string(line_no));
        if (line_no == 1 && fields[0] == "subject_id") continue;
        const auto g = group_from_name(fields[1]);
        if (!g) throw Error(ErrorCode::UnknownGroup, "group '" + std::string(fields[1]) + "'");
        out.emplace_back(std::string(fields[0]), *g);
    }
    return out;
}

namespace detail {

inline std::string fixed(double v, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

} // namespace detail

/// Minimal deterministic SVG: one box-and-whisker pair per parameter,
/// whiskers at raw min / max.
inline std::string boxplots_svg(std::span<const BoxplotStats> stats) {
    constexpr double left = 50, top = 30, plot_h = 300, slot_w = 60, box_w = 20;
    const double width = left + slot_w * kFeatureCount + 20;
    const double height = top + plot_h + 50;
    auto y = [&](double v) { return detail::fixed(top + (1.0 - v) * plot_h); };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fixed(width, 0) +
                      "\" height=\"" + detail::fixed(height, 0) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        svg += "<line x1=\"" + detail::fixed(left) + "\" x2=\"" + detail::fixed(width - 20) + "\" y1=\"" + y(tick) +
               "\" y2=\"" + y(tick) + "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + detail::fixed(left - 6) + "\" y=\"" + y(tick) + "\" text-anchor=\"end\">" +
               detail::fixed(tick) + "</text>\n";
    }
    for (std::size_t p = 0; p < kFeatureCount; ++p) {
        const double slot_x = left + slot_w * static_cast<double>(p);
        svg += "<text x=\"" + detail::fixed(slot_x + slot_w / 2) + "\" y=\"" + detail::fixed(top + plot_h + 20) +
               "\" text-anchor=\"middle\">" + std::string(kFeatureCodes[p]) + "</text>\n";
        for (const auto& s : stats) {
            if (s.parameter != kFeatureCodes[p]) continue;
            const bool healthy = s.group == Group::Healthy;
            const double x = slot_x + (healthy ? 8.0 : 32.0);
            const double cx = x + box_w / 2;
            const std::string fill = healthy ? "#1f3b73" : "#f2a0a0";
            svg += "<g class=\"box\" data-parameter=\"" + std::string(s.parameter) + "\" data-group=\"" +
                   std::string(group_name(s.group)) + "\">\n";
            svg += "<line x1=\"" + detail::fixed(cx) + "\" x2=\"" + detail::fixed(cx) + "\" y1=\"" + y(s.max) +
                   "\" y2=\"" + y(s.min) + "\" stroke=\"black\"/>\n";
            svg += "<rect x=\"" + detail::fixed(x) + "\" y=\"" + y(s.q3) + "\" width=\"" + detail::fixed(box_w) +
                   "\" height=\"" + detail::fixed((s.q3 - s.q1) * plot_h) + "\" fill=\"" + fill +
                   "\" stroke=\"black\"/>\n";
            svg += "<line x1=\"" + detail::fixed(x) + "\" x2=\"" + detail::fixed(x + box_w) + "\" y1=\"" +
                   y(s.median) + "\" y2=\"" + y(s.median) + "\" stroke=\"black\" stroke-width=\"2\"/>\n";
            svg += "</g>\n";
        }
    }
    svg += "<rect x=\"" + detail::fixed(left) + "\" y=\"" + detail::fixed(top + plot_h + 32) +
           "\" width=\"10\" height=\"10\" fill=\"#1f3b73\"/><text x=\"" + detail::fixed(left + 14) + "\" y=\"" +
           detail::fixed(top + plot_h + 41) + "\">Healthy</text>\n";
    svg += "<rect x=\"" + detail::fixed(left + 80) + "\" y=\"" + detail::fixed(top + plot_h + 32) +
           "\" width=\"10\" height=\"10\" fill=\"#f2a0a0\"/><text x=\"" + detail::fixed(left + 94) + "\" y=\"" +
           detail::fixed(top + plot_h + 41) + "\">PD</text>\n";
    svg += "</svg>\n";
    return svg;
}

} // namespace oculo
