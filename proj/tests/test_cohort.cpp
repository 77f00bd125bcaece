#include <catch_amalgamated.hpp>

#include "oculo/cohort.hpp"
#include "oculo/random.hpp"
#include "oracles.hpp"

#include <algorithm>

using namespace oculo;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::MessageMatches;
using Catch::Matchers::StartsWith;

namespace {

CohortRow row(std::string id, Group g, std::optional<double> rl) {
    CohortRow r{std::move(id), g, {}};
    r.features.reflex_latency_ms = rl;
    return r;
}

CohortTable random_table(Rng& rng, int healthy, int pd) {
    CohortTable t;
    for (int i = 0; i < healthy + pd; ++i) {
        CohortRow r{"s" + std::to_string(i), i < healthy ? Group::Healthy : Group::PD, {}};
        for (std::size_t p = 0; p < kFeatureCount; ++p) feature_at(r.features, p) = rng.uniform(0.0, 500.0);
        t.rows.push_back(r);
    }
    return t;
}

} // namespace

TEST_CASE("normalize_cohort", "[cohort]") {
    CohortTable t;
    t.rows = {row("a", Group::Healthy, 100), row("b", Group::PD, 200), row("c", Group::Healthy, 300),
              row("d", Group::PD, std::nullopt)};
    const auto n = normalize_cohort(t);
    CHECK(n.rows[0].features.reflex_latency_ms == 0.0);
    CHECK(n.rows[1].features.reflex_latency_ms == 0.5);
    CHECK(n.rows[2].features.reflex_latency_ms == 1.0);
    CHECK_FALSE(n.rows[3].features.reflex_latency_ms);
    CHECK_FALSE(n.rows[0].features.anti_latency_ms);

    CohortTable flat;
    flat.rows = {row("a", Group::Healthy, 5), row("b", Group::PD, 5)};
    CHECK_THROWS_MATCHES(normalize_cohort(flat), Error, MessageMatches(StartsWith("DegenerateParameter")));
    std::vector<std::string_view> degenerate;
    const auto lenient = normalize_cohort(flat, true, &degenerate);
    CHECK(lenient.rows[0].features.reflex_latency_ms == 0.0);
    CHECK(degenerate == std::vector<std::string_view>{"RL"});

    CohortTable dup;
    dup.rows = {row("a", Group::Healthy, 1), row("a", Group::PD, 2)};
    CHECK_THROWS_AS(normalize_cohort(dup), Error);
}

TEST_CASE("normalization properties", "[cohort][property]") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const auto t = random_table(rng, 2 + static_cast<int>(rng.index(15)), 1 + static_cast<int>(rng.index(6)));
        const auto n = normalize_cohort(t);
        CHECK(normalize_cohort(n).rows.size() == n.rows.size());
        const auto nn = normalize_cohort(n);
        for (std::size_t i = 0; i < n.rows.size(); ++i) {
            for (std::size_t p = 0; p < kFeatureCount; ++p) {
                const double a = *feature_at(n.rows[i].features, p);
                CHECK(a >= 0.0);
                CHECK(a <= 1.0);
                CHECK(std::abs(*feature_at(nn.rows[i].features, p) - a) <= 1e-15);
                for (std::size_t j = 0; j < n.rows.size(); ++j) {
                    if (*feature_at(t.rows[i].features, p) < *feature_at(t.rows[j].features, p)) {
                        CHECK(a < *feature_at(n.rows[j].features, p));
                    }
                }
            }
        }
    }
}

TEST_CASE("boxplot quartiles", "[cohort]") {
    const std::vector<double> v = {0, 0.25, 0.5, 0.75, 1};
    CHECK(quantile_sorted(v, 0.25) == 0.25);
    CHECK(quantile_sorted(v, 0.5) == 0.5);
    CHECK(quantile_sorted(v, 0.75) == 0.75);
    CHECK(quantile_sorted(std::vector<double>{0.3}, 0.25) == 0.3);

    CohortTable t;
    t.rows = {row("a", Group::Healthy, 0.2), row("b", Group::Healthy, 0.4), row("c", Group::PD, 0.9)};
    const auto stats = boxplot_stats(t, true);
    REQUIRE(stats.size() == 2);
    const auto& pd = stats[1];
    CHECK(pd.group == Group::PD);
    CHECK(pd.min == 0.9);
    CHECK(pd.q1 == 0.9);
    CHECK(pd.median == 0.9);
    CHECK(pd.q3 == 0.9);
    CHECK(pd.max == 0.9);
    CHECK(stats[0].median == (0.2 + 0.4) / 2);

    CHECK_THROWS_MATCHES(boxplot_stats(t), Error, MessageMatches(StartsWith("EmptyGroup")));
}

TEST_CASE("boxplot stats match a sort-and-interpolate oracle", "[cohort][property]") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const int healthy = trial == 0 ? 13 : 1 + static_cast<int>(rng.index(20));
        const auto t = normalize_cohort(random_table(rng, healthy, 1 + static_cast<int>(rng.index(8))));
        const auto stats = boxplot_stats(t);
        REQUIRE(stats.size() == 2 * kFeatureCount);
        for (const auto& s : stats) {
            std::vector<double> values;
            for (const auto& r : t.rows) {
                if (r.group == s.group) values.push_back(*feature_at(r.features, static_cast<std::size_t>(
                                                           std::find(std::begin(kFeatureCodes), std::end(kFeatureCodes),
                                                                     s.parameter) - std::begin(kFeatureCodes))));
            }
            CHECK(std::abs(s.min - *std::min_element(values.begin(), values.end())) <= 1e-12);
            CHECK(std::abs(s.q1 - oracle::quantile(values, 0.25)) <= 1e-12);
            CHECK(std::abs(s.median - oracle::quantile(values, 0.5)) <= 1e-12);
            CHECK(std::abs(s.q3 - oracle::quantile(values, 0.75)) <= 1e-12);
            CHECK(std::abs(s.max - *std::max_element(values.begin(), values.end())) <= 1e-12);
            CHECK(s.min <= s.q1);
            CHECK(s.q1 <= s.median);
            CHECK(s.median <= s.q3);
            CHECK(s.q3 <= s.max);
        }
    }
}

TEST_CASE("boxplot stats ignore the order of subjects", "[cohort][property]") {
    Rng rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        auto t = normalize_cohort(random_table(rng, 13, 4));
        const auto before = boxplot_stats(t);
        for (std::size_t i = t.rows.size() - 1; i > 0; --i) std::swap(t.rows[i], t.rows[rng.index(i + 1)]);
        const auto after = boxplot_stats(t);
        REQUIRE(after.size() == before.size());
        for (std::size_t i = 0; i < before.size(); ++i) {
            CHECK(after[i].parameter == before[i].parameter);
            CHECK(after[i].group == before[i].group);
            CHECK(after[i].min == before[i].min);
            CHECK(after[i].q1 == before[i].q1);
            CHECK(after[i].median == before[i].median);
            CHECK(after[i].q3 == before[i].q3);
            CHECK(after[i].max == before[i].max);
        }
    }
}

TEST_CASE("cohort renderings", "[cohort]") {
    Rng rng(44);
    const auto t = normalize_cohort(random_table(rng, 13, 4));
    const auto stats = boxplot_stats(t);
    const auto csv = boxplots_csv(stats);
    CHECK(csv.rfind("parameter,group,min,q1,median,q3,max\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 23);
    CHECK_THAT(csv, ContainsSubstring("\nRA20,PD,"));

    const auto svg = boxplots_svg(stats);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK_THAT(svg, ContainsSubstring("#1f3b73"));
    CHECK_THAT(svg, ContainsSubstring("#f2a0a0"));
    std::size_t boxes = 0;
    for (auto pos = svg.find("class=\"box\""); pos != std::string::npos; pos = svg.find("class=\"box\"", pos + 1)) ++boxes;
    CHECK(boxes == 22);
    CHECK(boxplots_svg(stats) == svg);

    const auto cohort = cohort_csv(t);
    CHECK(cohort.rfind("subject_id,group,RL,RSD,RA10,RA20,RAFT,AL,AISR,MISR,SSD,SSA,SSS\n", 0) == 0);
}

TEST_CASE("group file parsing", "[cohort]") {
    const auto groups = parse_group_file("subject_id,group\ns01,Healthy\ns02,PD\n# note\ns03,hc\n");
    REQUIRE(groups.size() == 3);
    CHECK(groups[1] == std::pair<std::string, Group>{"s02", Group::PD});
    CHECK(groups[2].second == Group::Healthy);
    CHECK_THROWS_MATCHES(parse_group_file("s01,Martian\n"), Error, MessageMatches(StartsWith("UnknownGroup")));
    CHECK_THROWS_MATCHES(parse_group_file("s01\n"), Error, MessageMatches(StartsWith("MalformedRecord")));
}
