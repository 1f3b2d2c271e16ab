// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>

#include "doctest.h"
#include "oracle_helpers.hpp"
#include "qformat/hwmodel.hpp"

using namespace qformat;

TEST_CASE("published MAC rows") {
    const auto int4 = paper_mac_cost("int4");
    CHECK(int4.accum_bits == 16);
    CHECK(int4.mac_area_um2 == 160.7);
    CHECK(int4.power_uw == 48.5);

    const auto sp = paper_mac_cost("e2m1-sp");
    CHECK(sp.accum_bits == 19);
    CHECK(sp.mac_area_um2 == 218.0);

    const auto int5 = paper_mac_cost("int5");
    CHECK(int5.mac_area_um2 == 203.6);
    CHECK(int5.power_uw == 59.8);
    CHECK(int5.operand_bits == 5);

    CHECK_THROWS_AS(paper_mac_cost("fp8"), std::invalid_argument);

    for (const auto& row : paper_mac_costs()) {
        CHECK(row.mac_area_um2 ==
              doctest::Approx(row.mult_area_um2 + row.accum_area_um2).epsilon(1e-9));
        CHECK(row.source == CostSource::paper_reference);
    }
}

TEST_CASE("accumulator width estimates") {
    CHECK(estimate_accumulator_bits(builtin_codebook("int4")) == 16);
    CHECK(estimate_accumulator_bits(builtin_codebook("e2m1")) == 17);
    CHECK(estimate_accumulator_bits(builtin_codebook("e2m1-sr")) == 18);
    CHECK(estimate_accumulator_bits(builtin_codebook("e3m0")) == 22);
    CHECK(estimate_accumulator_bits(builtin_codebook("int5")) == 18);
    // n_terms scaling: half the terms saves one bit
    CHECK(estimate_accumulator_bits(builtin_codebook("int4"), 128) == 15);

    // lookup tables are off the dyadic grid
    CHECK_THROWS_AS(estimate_accumulator_bits(builtin_codebook("nf4")), std::domain_error);
    CHECK_THROWS_AS(estimate_accumulator_bits(builtin_codebook("apot4")), std::domain_error);

    // an APoT codebook built from its defining sums is on-grid
    ApotSpec spec;
    spec.sets = {{0.0, 0.5, 0.25, 0.0625}, {0.0, 0.125}};
    CHECK(estimate_accumulator_bits(apot_codebook(spec)) == 16);
}

TEST_CASE("relative chip overhead reproduces the published cells") {
    CHECK(chip_overhead(160.7, 160.7, 4, 4) == 0.0);
    const std::map<std::string, double> published = {
        {"int4", 0.0},    {"int5", 17.7},    {"e2m1-i", 4.2},  {"e2m1-b", 6.7},
        {"e2m1", 0.6},    {"e2m1-sr", 1.9},  {"e2m1-sp", 3.6}, {"e3m0", 3.6},
        {"apot4", 1.3},   {"apot4-sp", 1.5}};
    const auto baseline = paper_mac_cost("int4");
    for (const auto& [format, want] : published) {
        const auto row = paper_mac_cost(format);
        const double got = chip_overhead(row.mac_area_um2, baseline.mac_area_um2,
                                         row.operand_bits, baseline.operand_bits);
        CHECK(std::abs(got - want) <= 0.1);
    }
    CHECK(chip_overhead(170.4, 160.7, 4, 4) == doctest::Approx(0.6).epsilon(0.02));
    CHECK(chip_overhead(203.6, 160.7, 5, 4) == doctest::Approx(17.7).epsilon(0.01));
    CHECK_THROWS_AS(chip_overhead(-1.0, 160.7, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS(chip_overhead(160.7, 160.7, 0, 4), std::invalid_argument);
}

TEST_CASE("pareto front basics") {
    const std::vector<ParetoPoint> one = {{"a", 1.0, 2.0}};
    CHECK(pareto_front(one).size() == 1);

    const std::vector<ParetoPoint> two = {{"a", 2.0, 1.0}, {"b", 1.0, 2.0}};
    const auto front = pareto_front(two);
    REQUIRE(front.size() == 1);
    CHECK(front[0].format == "a");

    // equal points do not dominate each other
    const std::vector<ParetoPoint> dup = {{"a", 1.0, 1.0}, {"b", 1.0, 1.0}};
    CHECK(pareto_front(dup).size() == 2);

    CHECK_THROWS_AS(pareto_front({}), std::invalid_argument);
}

TEST_CASE("pareto front equals the exhaustive dominance oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ParetoPoint> points;
        const int n = 1 + static_cast<int>(rng.uniform_below(100));
        for (int i = 0; i < n; ++i)
            points.push_back({"p" + std::to_string(i),
                              std::floor(rng.uniform() * 20.0),
                              std::floor(rng.uniform() * 20.0)});
        auto got = pareto_front(points);
        auto want = oracle::dominance_filter(points);
        std::sort(want.begin(), want.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
            return a.format < b.format;
        });
        std::sort(got.begin(), got.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
            return a.format < b.format;
        });
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].format == want[i].format);
    }
}

TEST_CASE("paper areas with monotone quality give the published front") {
    const std::map<std::string, double> quality = {
        {"int4", -6.0},   {"int5", -1.2},    {"e2m1-i", -5.2},  {"e2m1-b", -5.5},
        {"e2m1", -2.5},   {"e2m1-sr", -3.2}, {"e2m1-sp", -1.0}, {"e3m0", -4.5},
        {"apot4", -2.9},  {"apot4-sp", -2.6}};
    const auto baseline = paper_mac_cost("int4");
    std::vector<ParetoPoint> points;
    for (const auto& [format, q] : quality) {
        const auto row = paper_mac_cost(format);
        points.push_back({format, q,
                          chip_overhead(row.mac_area_um2, baseline.mac_area_um2,
                                        row.operand_bits, baseline.operand_bits)});
    }
    const auto front = pareto_front(points);
    REQUIRE(front.size() == 3);
    CHECK(front[0].format == "int4");
    CHECK(front[1].format == "e2m1");
    CHECK(front[2].format == "e2m1-sp");
}
