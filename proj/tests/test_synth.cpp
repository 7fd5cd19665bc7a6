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

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"

using namespace fogcast;

namespace {

SynthConfig small_config() {
    SynthConfig cfg;
    cfg.seed = 11;
    cfg.n_stations = 3;
    cfg.n_launch_days = 8;
    cfg.horizon = 24;
    return cfg;
}

std::set<int> all_months() {
    return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
}

// IDW node coordinates in frame order (latitude-major).
void node_coords(const ForecastGridSet& g, std::vector<double>& lats,
                 std::vector<double>& lons) {
    lats.clear();
    lons.clear();
    for (double lat : g.lats) {
        for (double lon : g.lons) {
            lats.push_back(lat);
            lons.push_back(lon);
        }
    }
}

// Value of `variable` at epoch hour `h` interpolated to (lat, lon), using any
// frame that covers the hour; forecasts are perfect so all launches agree.
bool value_at_hour(const ForecastGridSet& g, const std::vector<double>& nlats,
                   const std::vector<double>& nlons, std::size_t vi, int64_t h,
                   double lat, double lon, const IdwConfig& idw, double& out) {
    for (std::size_t li = 0; li < g.launches.size(); ++li) {
        const int64_t launch_h = g.launches[li].epoch_seconds() / 3600;
        const int64_t lead = h - launch_h;
        if (lead < 1 || lead > static_cast<int64_t>(g.max_lead)) continue;
        out = idw_interpolate(nlats, nlons, g.frame(li, static_cast<unsigned>(lead), vi),
                              lat, lon, idw);
        return true;
    }
    return false;
}

}  // namespace

TEST_CASE("noise-free labels agree with the planted rule recomputed from the files",
          "[synth]") {
    const SynthConfig cfg = small_config();
    const SynthBuild build = synth_build(cfg);
    fogtest::TempDir dir;
    const SynthFilePaths paths = synth_write_files(build, dir.dir());

    const ObservationTable obs = parse_observations_file(paths.observations);
    const ForecastGridSet grids = parse_grid_file(paths.grid);
    std::vector<double> nlats, nlons;
    node_coords(grids, nlats, nlons);
    const std::size_t rh_vi = grids.variable_index("R_H_GDS3_HTGL");
    const std::size_t u_vi = grids.variable_index("U_GRD_GDS3_HTGL");
    const std::size_t v_vi = grids.variable_index("V_GRD_GDS3_HTGL");

    std::size_t verified = 0;
    for (const ObservationRow& row : obs.rows) {
        const Station& st = obs.stations[row.station];
        const int64_t t = row.time.epoch_seconds() / 3600;
        double rh = 0.0, u = 0.0, v = 0.0;
        if (!value_at_hour(grids, nlats, nlons, rh_vi,
                           t - static_cast<int64_t>(cfg.planted_lag), st.lat, st.lon,
                           cfg.idw, rh)) {
            continue;  // before the first covered hour
        }
        if (!value_at_hour(grids, nlats, nlons, u_vi, t, st.lat, st.lon, cfg.idw, u)) {
            continue;
        }
        REQUIRE(value_at_hour(grids, nlats, nlons, v_vi, t, st.lat, st.lon, cfg.idw, v));
        const double wind = std::sqrt(u * u + v * v);
        const bool rule_fog = rh >= cfg.rh_threshold && wind < cfg.wind_threshold;
        const bool labeled_fog = row.visibility_km <= 1.0;
        CAPTURE(st.id, t, rh, wind);
        REQUIRE(labeled_fog == rule_fog);
        ++verified;
    }
    CHECK(verified > build.truth.n_obs_rows / 2);

    CHECK(build.truth.n_rule_fog_rows == build.truth.n_fog_rows);
    CHECK(build.truth.n_resampled_rows == 0);
    std::size_t fog_rows = 0;
    for (const ObservationRow& row : obs.rows) fog_rows += row.visibility_km <= 1.0;
    CHECK(fog_rows == build.truth.n_fog_rows);
    CHECK(obs.rows.size() == build.truth.n_obs_rows);
}

TEST_CASE("lagged correlation analysis recovers the planted lag", "[synth]") {
    SynthConfig cfg;
    cfg.seed = 12;
    cfg.n_stations = 5;
    cfg.n_launch_days = 30;
    cfg.planted_lag = 3;
    const SynthBuild build = synth_build(cfg);
    const Dataset ds = synth_dataset(build);

    // Visibility depends linearly on the lagged humidity, so the raw-target
    // correlation peaks sharply at the planted lag even on a short record.
    TlcaConfig tlca;
    tlca.months = all_months();
    const LaggedCorrelationTable table = lagged_correlations(ds, tlca);
    const std::size_t rh = ds.catalog.index_of(kSynthPlantedVariable);
    unsigned best_lag = 0;
    double best_abs = -1.0;
    for (unsigned lag = 0; lag <= tlca.max_lag; ++lag) {
        const LagCell& c = table.cell(rh, lag);
        REQUIRE(c.defined);
        if (std::fabs(c.r) > best_abs) {
            best_abs = std::fabs(c.r);
            best_lag = lag;
        }
    }
    CHECK(best_lag == cfg.planted_lag);
    CHECK(table.cell(rh, cfg.planted_lag).significant);
    CHECK(table.cell(rh, cfg.planted_lag).r < 0.0);  // high humidity cuts visibility

    TlcaConfig binary = tlca;
    binary.binary_target = true;
    const LaggedCorrelationTable btable = lagged_correlations(ds, binary);
    CHECK(btable.cell(rh, cfg.planted_lag).significant);
    CHECK(btable.cell(rh, cfg.planted_lag).r > 0.0);  // high humidity drives fog
}

TEST_CASE("the realized fog frequency tracks the target", "[synth]") {
    SynthConfig cfg;
    cfg.seed = 13;
    cfg.n_stations = 50;
    cfg.n_launch_days = 250;
    cfg.fog_frequency = 0.05;
    const SynthBuild build = synth_build(cfg);
    REQUIRE(build.truth.n_obs_rows >= 100000);
    const double realized = static_cast<double>(build.truth.n_fog_rows) /
                            static_cast<double>(build.truth.n_obs_rows);
    CHECK(std::fabs(realized - cfg.fog_frequency) <= 0.002);
    CHECK(std::fabs(build.truth.rh_shift) < 40.0);  // shift stays physical
}

TEST_CASE("identical seeds write identical files and seeds change the data",
          "[synth]") {
    const SynthConfig cfg = small_config();
    fogtest::TempDir da, db, dc;
    const SynthFilePaths pa = synth_write_files(synth_build(cfg), da.dir());
    const SynthFilePaths pb = synth_write_files(synth_build(cfg), db.dir());
    CHECK(fogtest::read_file(pa.observations) == fogtest::read_file(pb.observations));
    CHECK(fogtest::read_file(pa.grid) == fogtest::read_file(pb.grid));
    CHECK(fogtest::read_file(pa.catalog) == fogtest::read_file(pb.catalog));
    CHECK(fogtest::read_file(pa.truth) == fogtest::read_file(pb.truth));

    SynthConfig other = cfg;
    other.seed = 12;
    const SynthFilePaths pc = synth_write_files(synth_build(other), dc.dir());
    CHECK(fogtest::read_file(pa.observations) != fogtest::read_file(pc.observations));
    CHECK(fogtest::read_file(pa.grid) != fogtest::read_file(pc.grid));
}

TEST_CASE("ingesting the written files reproduces the in-memory dataset bit for bit",
          "[synth]") {
    const SynthConfig cfg = small_config();
    const SynthBuild build = synth_build(cfg);
    fogtest::TempDir dir;
    const SynthFilePaths paths = synth_write_files(build, dir.dir());

    const ObservationTable obs = parse_observations_file(paths.observations);
    const ForecastGridSet grids = parse_grid_file(paths.grid);
    const VariableCatalog catalog = read_catalog_file(paths.catalog);
    AssembleOptions opt;
    opt.idw = cfg.idw;
    opt.horizon = cfg.horizon;
    std::vector<std::string> warnings;
    const Dataset from_files = assemble_dataset(obs, grids, catalog, opt, &warnings);
    CHECK(warnings.empty());

    const Dataset direct = synth_dataset(build);
    std::stringstream sa, sb;
    write_dataset(from_files, sa);
    write_dataset(direct, sb);
    CHECK(sa.str() == sb.str());
}

TEST_CASE("label noise resamples roughly the expected number of rows", "[synth]") {
    SynthConfig cfg = small_config();
    cfg.n_stations = 5;
    cfg.n_launch_days = 30;
    cfg.label_noise = 0.3;
    const SynthBuild build = synth_build(cfg);
    const double n = static_cast<double>(build.truth.n_obs_rows);
    // A row flips when the noise gate fires (0.3) and the resampled label
    // differs; with a 0.1 fog rate both directions flip at rate 0.09.
    const double expect = 0.3 * 2.0 * 0.1 * 0.9 * n;
    const double sd = std::sqrt(n * 0.054 * (1.0 - 0.054));
    CHECK(build.truth.n_resampled_rows > 0);
    CHECK(std::fabs(static_cast<double>(build.truth.n_resampled_rows) - expect) <=
          4.0 * sd + 10.0);
    const auto diff = static_cast<long long>(build.truth.n_fog_rows) -
                      static_cast<long long>(build.truth.n_rule_fog_rows);
    CHECK(static_cast<long long>(build.truth.n_resampled_rows) >= std::llabs(diff));

    std::size_t fog_rows = 0;
    for (const ObservationRow& row : build.obs.rows) fog_rows += row.visibility_km <= 1.0;
    CHECK(fog_rows == build.truth.n_fog_rows);
}

TEST_CASE("weather codes mark exactly the fog rows when enabled", "[synth]") {
    SynthConfig cfg = small_config();
    cfg.emit_weather_codes = true;
    const SynthBuild build = synth_build(cfg);
    std::size_t coded = 0;
    for (const ObservationRow& row : build.obs.rows) {
        if (row.has_weather_code) {
            CHECK(row.weather_code == 45);
            CHECK(row.visibility_km <= 1.0);
            ++coded;
        }
    }
    CHECK(coded == build.truth.n_fog_rows);

    fogtest::TempDir dir;
    const SynthFilePaths paths = synth_write_files(build, dir.dir());
    const ObservationTable back = parse_observations_file(paths.observations);
    std::size_t parsed_codes = 0;
    for (const ObservationRow& row : back.rows) parsed_codes += row.has_weather_code;
    CHECK(parsed_codes == coded);
}

TEST_CASE("unachievable fog frequencies fail with a clear error", "[synth]") {
    SynthConfig cfg = small_config();
    cfg.wind_threshold = 0.2;  // calm rows become rare
    cfg.fog_frequency = 0.5;
    try {
        synth_build(cfg);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("not achievable") != std::string::npos);
    }

    SynthConfig tiny = small_config();
    tiny.fog_frequency = 1e-6;  // rounds to zero fog rows
    CHECK_THROWS_AS(synth_build(tiny), ConfigError);
}

TEST_CASE("scenario configuration is validated", "[synth]") {
    const auto expect_config_error = [](auto mutate) {
        SynthConfig cfg;
        mutate(cfg);
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    };
    expect_config_error([](SynthConfig& c) { c.n_stations = 0; });
    expect_config_error([](SynthConfig& c) { c.n_stations = 1000; });
    expect_config_error([](SynthConfig& c) { c.grid_lat = 1; });
    expect_config_error([](SynthConfig& c) { c.horizon = 2; });
    expect_config_error([](SynthConfig& c) { c.horizon = 61; });
    expect_config_error([](SynthConfig& c) { c.n_launch_days = 0; });
    expect_config_error([](SynthConfig& c) { c.launch_day_stride = 0; });
    expect_config_error([](SynthConfig& c) { c.planted_lag = 6; });
    expect_config_error([](SynthConfig& c) { c.wind_threshold = 0.0; });
    expect_config_error([](SynthConfig& c) { c.fog_frequency = 0.0; });
    expect_config_error([](SynthConfig& c) { c.fog_frequency = 1.0; });
    expect_config_error([](SynthConfig& c) { c.label_noise = 1.0; });
    expect_config_error([](SynthConfig& c) {
        c.grid_lat = 2;
        c.grid_lon = 2;
        c.idw.neighbors = 5;
    });
    CHECK_NOTHROW(SynthConfig{}.validate());
}

TEST_CASE("the catalog lists raw variables sorted with derived channels last",
          "[synth]") {
    const VariableCatalog catalog = SynthConfig{}.catalog();
    REQUIRE(catalog.size() == 9);
    const std::vector<std::string> raws = catalog.raw_names();
    REQUIRE(raws.size() == 7);
    CHECK(std::is_sorted(raws.begin(), raws.end()));
    CHECK(raws[0] == "DPT_GDS3_HTGL");
    CHECK(catalog.channels()[7].name == "wind_speed");
    CHECK(catalog.channels()[8].name == "air_sea_temp_diff");
    CHECK(catalog.channels()[8].kind == ChannelKind::kDerived);
}
