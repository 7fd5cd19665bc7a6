/* Copyright 2026 The Fogcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fogcast/geo.hpp"
#include "fogcast/idw.hpp"
#include "fogcast/rng.hpp"

using Catch::Matchers::WithinAbs;
using namespace fogcast;

namespace {

// Latitude offset along a meridian giving a ground distance of `km`.
double lat_offset_for_km(double km) { return km / 6371.0 * 180.0 / 3.14159265358979323846; }

}  // namespace

TEST_CASE("great-circle distances on the reference sphere", "[idw]") {
    CHECK_THAT(great_circle_km(0.0, 0.0, 0.0, 180.0),
               WithinAbs(6371.0 * 3.14159265358979323846, 1e-6));
    CHECK_THAT(great_circle_km(0.0, 0.0, 90.0, 0.0),
               WithinAbs(6371.0 * 3.14159265358979323846 / 2.0, 1e-6));
    CHECK(great_circle_km(31.0, 121.0, 31.0, 121.0) == 0.0);
    // Symmetry.
    CHECK_THAT(great_circle_km(30.0, 120.0, 31.5, 122.25),
               WithinAbs(great_circle_km(31.5, 122.25, 30.0, 120.0), 1e-12));
}

TEST_CASE("target on a node returns the node value exactly", "[idw]") {
    IdwConfig cfg;
    cfg.neighbors = 2;
    const std::vector<double> lats = {30.0, 31.0};
    const std::vector<double> lons = {120.0, 121.0};
    const double v = idw_interpolate(lats, lons, {7.3, 9.9}, 30.0, 120.0, cfg);
    CHECK(v == 7.3);
}

TEST_CASE("two equidistant nodes average to the midpoint", "[idw]") {
    IdwConfig cfg;
    cfg.neighbors = 2;
    const double v = idw_interpolate({30.0, 30.0}, {120.0, 121.0}, {10.0, 20.0},
                                     30.0, 120.5, cfg);
    CHECK_THAT(v, WithinAbs(15.0, 1e-12));
}

TEST_CASE("four-node hand-computed weighting", "[idw]") {
    // Nodes along one meridian at distances 1, 1, 2, 2 km holding values
    // 1, 2, 3, 4: weights 1, 1, 1/4, 1/4 give (1 + 2 + 0.75 + 1) / 2.5 = 1.9.
    IdwConfig cfg;  // power 2, neighbors 4
    const double d1 = lat_offset_for_km(1.0);
    const double d2 = lat_offset_for_km(2.0);
    const std::vector<double> lats = {30.0 + d1, 30.0 - d1, 30.0 + d2, 30.0 - d2};
    const std::vector<double> lons(4, 120.0);
    const double v = idw_interpolate(lats, lons, {1.0, 2.0, 3.0, 4.0}, 30.0, 120.0, cfg);
    CHECK_THAT(v, WithinAbs(1.9, 1e-12));
}

TEST_CASE("interpolant stays inside the value hull", "[idw]") {
    Rng rng(77);
    IdwConfig cfg;
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 4 + rng.uniform(5);
        std::vector<double> lats(n), lons(n), values(n);
        for (std::size_t i = 0; i < n; ++i) {
            lats[i] = rng.uniform_real(27.0, 33.0);
            lons[i] = rng.uniform_real(118.0, 125.0);
            values[i] = rng.uniform_real(-50.0, 50.0);
        }
        const double tlat = rng.uniform_real(27.0, 33.0);
        const double tlon = rng.uniform_real(118.0, 125.0);
        const double v = idw_interpolate(lats, lons, values, tlat, tlon, cfg);
        const double lo = *std::min_element(values.begin(), values.end());
        const double hi = *std::max_element(values.begin(), values.end());
        REQUIRE(v >= lo - 1e-12);
        REQUIRE(v <= hi + 1e-12);
    }
}

TEST_CASE("value is continuous across the coincidence epsilon", "[idw]") {
    IdwConfig cfg;  // epsilon 1e-6 m = 1e-9 km
    const double near_km = 1.5e-9;  // just outside the exact-match radius
    const std::vector<double> lats = {30.0, 30.5, 30.6, 30.7};
    const std::vector<double> lons = {120.0, 120.5, 120.6, 120.7};
    const std::vector<double> values = {42.0, -3.0, 18.0, 7.0};

    const double exact = idw_interpolate(lats, lons, values, 30.0, 120.0, cfg);
    CHECK(exact == 42.0);
    const double near = idw_interpolate(lats, lons, values,
                                        30.0 + lat_offset_for_km(near_km), 120.0, cfg);
    CHECK_THAT(near, WithinAbs(42.0, 1e-9 * 42.0));
}

TEST_CASE("missing nodes are skipped, more distant ones substituted", "[idw]") {
    IdwConfig cfg;
    cfg.neighbors = 2;
    const std::vector<double> lats = {30.0, 30.1, 30.2};
    const std::vector<double> lons = {120.0, 120.0, 120.0};
    // Nearest node missing: the result must use the two remaining nodes.
    const double v = idw_interpolate(lats, lons, {kMissing, 5.0, 9.0}, 30.0, 120.0, cfg);
    CHECK(v > 5.0);
    CHECK(v < 9.0);
}

TEST_CASE("too few usable nodes is an error", "[idw]") {
    IdwConfig cfg;  // neighbors 4
    CHECK_THROWS_AS(idw_interpolate({30.0, 30.1, 30.2}, {120.0, 120.0, 120.0},
                                    {1.0, 2.0, 3.0}, 30.05, 120.0, cfg),
                    DataError);
    CHECK_THROWS_AS(idw_interpolate({30.0, 30.1, 30.2, 30.3}, {120, 120, 120, 120},
                                    {1.0, kMissing, 3.0, 4.0}, 30.05, 120.0, cfg),
                    DataError);
}

TEST_CASE("configuration validation", "[idw]") {
    IdwConfig cfg;
    cfg.power = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = IdwConfig{};
    cfg.neighbors = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = IdwConfig{};
    cfg.zero_epsilon_m = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(idw_interpolate({30.0}, {120.0, 121.0}, {1.0}, 30.0, 120.0, IdwConfig{}),
                    InputError);
}

TEST_CASE("plan visitation order is distance then index", "[idw]") {
    const std::vector<double> lats = {30.2, 30.1, 30.1, 30.0};
    const std::vector<double> lons = {120.0, 120.0, 120.0, 120.0};
    IdwPlan plan(lats, lons, 30.0, 120.0);
    // Node 3 coincides; nodes 1 and 2 tie and must appear in index order.
    REQUIRE(plan.order().size() == 4);
    CHECK(plan.order()[0] == 3);
    CHECK(plan.order()[1] == 1);
    CHECK(plan.order()[2] == 2);
    CHECK(plan.order()[3] == 0);
}
