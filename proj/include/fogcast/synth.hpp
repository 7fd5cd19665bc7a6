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
#ifndef FOGCAST_SYNTH_HPP
#define FOGCAST_SYNTH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "fogcast/catalog.hpp"
#include "fogcast/common.hpp"
#include "fogcast/dataset.hpp"
#include "fogcast/idw.hpp"
#include "fogcast/ingest.hpp"
#include "fogcast/rng.hpp"
#include "fogcast/time.hpp"

namespace fogcast {

// Synthetic coastal-fog scenario. Six signal variables evolve as sinusoids
// plus autoregressive weather on a small grid; forecasts are perfect (the
// grid frame for launch L at lead t is the truth at L+t). Fog at a station
// follows a planted rule on its own interpolated series:
//
//   fog at time t  <=>  rh(t - lag) >= rh_threshold  and  wind(t) < wind_threshold
//
// The humidity field's mean is shifted once, before any output is produced,
// so that the rule at the configured thresholds hits the target fog
// frequency; the shift is recorded in the truth manifest. One extra variable
// carries no signal: its grid values are drawn fresh per (launch, lead,
// node), so any cross-launch association with labels is pure chance.
// Observations land on every 3-hour mark across the span, which puts labels
// at leads divisible by 3 and recent-visibility history at every launch.

struct SynthVariableParams {
    const char* name;
    double base;
    double diurnal_amp;
    double synoptic_amp;
    double synoptic_period_h;
    double common_rho;
    double common_sd;
    double node_rho;
    double node_sd;
    double phase_scale;
};

inline const std::array<SynthVariableParams, 6>& synth_signal_params() {
    static const std::array<SynthVariableParams, 6> kParams = {{
        {"R_H_GDS3_HTGL", 72.0, 10.0, 9.0, 96.0, 0.92, 1.6, 0.85, 0.7, 0.25},
        {"U_GRD_GDS3_HTGL", 2.5, 1.2, 1.8, 72.0, 0.90, 0.5, 0.85, 0.3, 0.40},
        {"V_GRD_GDS3_HTGL", 1.5, 1.0, 1.6, 84.0, 0.90, 0.5, 0.85, 0.3, 0.50},
        {"TMP_GDS3_HTGL", 18.0, 4.0, 3.0, 120.0, 0.95, 0.4, 0.90, 0.2, 0.20},
        {"TMP_GDS3_SFC", 17.0, 3.0, 3.0, 120.0, 0.95, 0.4, 0.90, 0.2, 0.25},
        {"DPT_GDS3_HTGL", 13.5, 2.0, 2.5, 110.0, 0.94, 0.5, 0.90, 0.25, 0.30},
    }};
    return kParams;
}

inline constexpr const char* kSynthPlantedVariable = "R_H_GDS3_HTGL";
inline constexpr const char* kSynthNoiseVariable = "PRES_GDS3_SFC";
inline constexpr double kSynthNoiseBase = 1013.0;
inline constexpr double kSynthNoiseSd = 5.0;

// Stream salts: each consumer owns an independent generator so adding draws
// to one stage cannot shift any other stage.
inline constexpr uint64_t kSynthSaltFields = 0xF06CA57F1E1D0001ULL;
inline constexpr uint64_t kSynthSaltNoiseVar = 0xF06CA57F1E1D0002ULL;
inline constexpr uint64_t kSynthSaltLabels = 0xF06CA57F1E1D0003ULL;
inline constexpr uint64_t kSynthSaltStations = 0xF06CA57F1E1D0004ULL;

struct SynthConfig {
    uint64_t seed = 1;
    unsigned n_stations = 5;
    unsigned grid_lat = 3;
    unsigned grid_lon = 3;
    int start_year = 2015;
    unsigned n_launch_days = 30;
    unsigned launch_day_stride = 1;  // days between consecutive launch days
    uint16_t horizon = 24;
    double rh_threshold = 90.0;    // planted rule: rh(t-lag) at or above this
    double wind_threshold = 5.0;   // planted rule: wind(t) below this, m/s
    unsigned planted_lag = 3;      // hours between the rh cause and the fog
    double fog_frequency = 0.10;   // target fraction of observation rows
    double label_noise = 0.0;      // per-row probability of a resampled label
    bool emit_weather_codes = false;
    IdwConfig idw;

    void validate() const {
        if (n_stations < 1 || n_stations > 999) {
            throw ConfigError("synth: station count must be in [1, 999]");
        }
        if (grid_lat < 2 || grid_lon < 2) {
            throw ConfigError("synth: grid must be at least 2x2");
        }
        if (n_launch_days < 1) throw ConfigError("synth: need at least one launch day");
        if (launch_day_stride < 1) throw ConfigError("synth: launch day stride must be >= 1");
        if (horizon < 3 || horizon > 60) {
            throw ConfigError("synth: horizon must be in [3, 60]");
        }
        if (planted_lag > 5) {
            throw ConfigError("synth: planted lag must be in [0, 5] hours");
        }
        if (!std::isfinite(rh_threshold)) throw ConfigError("synth: bad rh threshold");
        if (!(wind_threshold > 0.0)) throw ConfigError("synth: wind threshold must be > 0");
        if (!(fog_frequency > 0.0 && fog_frequency < 1.0)) {
            throw ConfigError("synth: fog frequency must be in (0, 1)");
        }
        if (!(label_noise >= 0.0 && label_noise < 1.0)) {
            throw ConfigError("synth: label noise must be in [0, 1)");
        }
        idw.validate();
        if (idw.neighbors > grid_lat * grid_lon) {
            throw ConfigError("synth: grid has fewer nodes than IDW neighbors");
        }
    }

    // Raw channels in sorted-name order, then the two derived channels.
    VariableCatalog catalog() const {
        std::vector<std::string> raws{kSynthNoiseVariable};
        for (const SynthVariableParams& p : synth_signal_params()) raws.push_back(p.name);
        std::sort(raws.begin(), raws.end());
        std::vector<Channel> channels;
        for (const std::string& name : raws) channels.push_back({name, ChannelKind::kRaw});
        channels.push_back({"wind_speed", ChannelKind::kDerived});
        channels.push_back({"air_sea_temp_diff", ChannelKind::kDerived});
        return VariableCatalog(std::move(channels));
    }
};

struct SynthTruth {
    double rh_shift = 0.0;    // added to every humidity value before output
    double fog_rh_cut = 0.0;  // pre-shift rule boundary the shift maps onto rh_threshold
    std::size_t n_obs_rows = 0;
    std::size_t n_fog_rows = 0;       // after label noise
    std::size_t n_rule_fog_rows = 0;  // before label noise
    std::size_t n_resampled_rows = 0;
    std::string planted_variable = kSynthPlantedVariable;
    unsigned planted_lag = 3;
};

struct SynthBuild {
    SynthConfig config;
    VariableCatalog catalog;
    ObservationTable obs;
    ForecastGridSet grids;
    SynthTruth truth;
};

namespace detail {

// Stationary AR(1) series driven by one shared generator.
inline std::vector<double> ar1_series(Rng& rng, std::size_t n, double rho, double sd) {
    std::vector<double> out(n);
    if (n == 0) return out;
    out[0] = sd / std::sqrt(1.0 - rho * rho) * rng.normal();
    for (std::size_t i = 1; i < n; ++i) out[i] = rho * out[i - 1] + sd * rng.normal();
    return out;
}

inline std::vector<double> linspace(double lo, double hi, unsigned n) {
    std::vector<double> out(n);
    for (unsigned i = 0; i < n; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

}  // namespace detail

inline SynthBuild synth_build(const SynthConfig& cfg) {
    cfg.validate();
    SynthBuild build;
    build.config = cfg;
    build.catalog = cfg.catalog();
    build.truth.planted_lag = cfg.planted_lag;

    // Stations inside the study area; ids sort in creation order.
    Rng station_rng(cfg.seed ^ kSynthSaltStations);
    std::vector<Station> stations;
    for (unsigned s = 0; s < cfg.n_stations; ++s) {
        char id[8];
        std::snprintf(id, sizeof(id), "S%03u", s + 1);
        const double lat = station_rng.uniform_real(27.0, 33.0);
        const double lon = station_rng.uniform_real(118.0, 125.0);
        stations.push_back({id, lat, lon});
    }

    const std::vector<double> grid_lats = detail::linspace(26.8, 33.2, cfg.grid_lat);
    const std::vector<double> grid_lons = detail::linspace(117.3, 125.7, cfg.grid_lon);
    const std::size_t n_nodes = grid_lats.size() * grid_lons.size();

    std::vector<UtcTime> launches;
    const UtcTime first_day = UtcTime::from_civil(cfg.start_year, 1, 1, 0, 0, 0);
    for (unsigned d = 0; d < cfg.n_launch_days; ++d) {
        const UtcTime day = first_day.plus_hours(24 * static_cast<int64_t>(d) *
                                                 cfg.launch_day_stride);
        launches.push_back(day);
        launches.push_back(day.plus_hours(12));
    }

    // Hourly truth span: observations start 6 h before the first launch (so
    // every launch has recent-visibility history) and the earliest one still
    // needs rh up to 5 h before that; the span ends at the last valid time.
    const int64_t obs_first_h = launches.front().epoch_seconds() / 3600 - 6;
    const int64_t first_h = obs_first_h - 5;
    const int64_t last_h = launches.back().epoch_seconds() / 3600 + cfg.horizon;
    const std::size_t n_hours = static_cast<std::size_t>(last_h - first_h + 1);
    const std::size_t n_obs_hours = static_cast<std::size_t>((last_h - obs_first_h) / 3 + 1);

    // Node-level truth for the signal variables, one generator for all so the
    // sequence is a pure function of the seed.
    const auto& params = synth_signal_params();
    Rng field_rng(cfg.seed ^ kSynthSaltFields);
    std::vector<std::vector<double>> truth(params.size());  // [var][node * n_hours + h]
    for (std::size_t v = 0; v < params.size(); ++v) {
        const SynthVariableParams& p = params[v];
        const std::vector<double> common =
            detail::ar1_series(field_rng, n_hours, p.common_rho, p.common_sd);
        truth[v].resize(n_nodes * n_hours);
        for (std::size_t node = 0; node < n_nodes; ++node) {
            const std::vector<double> local =
                detail::ar1_series(field_rng, n_hours, p.node_rho, p.node_sd);
            const std::size_t lat_idx = node / grid_lons.size();
            const std::size_t lon_idx = node % grid_lons.size();
            const double phase =
                p.phase_scale * (static_cast<double>(lat_idx) +
                                 0.6180339887498949 * static_cast<double>(lon_idx));
            for (std::size_t i = 0; i < n_hours; ++i) {
                const double t = static_cast<double>(first_h + static_cast<int64_t>(i));
                truth[v][node * n_hours + i] =
                    p.base +
                    p.diurnal_amp * std::sin(2.0 * M_PI * t / 24.0 + phase) +
                    p.synoptic_amp *
                        std::sin(2.0 * M_PI * t / p.synoptic_period_h + 0.7 * phase) +
                    common[i] + local[i];
            }
        }
    }

    // Station series via the same interpolation the pipeline uses, so the
    // rule inputs equal the features the model will see.
    std::vector<double> node_lats, node_lons;
    {
        node_lats.reserve(n_nodes);
        node_lons.reserve(n_nodes);
        for (double lat : grid_lats) {
            for (double lon : grid_lons) {
                node_lats.push_back(lat);
                node_lons.push_back(lon);
            }
        }
    }
    std::vector<IdwPlan> plans;
    plans.reserve(stations.size());
    for (const Station& s : stations) {
        plans.emplace_back(node_lats, node_lons, s.lat, s.lon);
    }
    const std::size_t rh_v = 0;  // synth_signal_params order
    const std::size_t u_v = 1, v_v = 2;
    const auto station_value = [&](std::size_t s, std::size_t var, int64_t hour) {
        const std::size_t hi = static_cast<std::size_t>(hour - first_h);
        return idw_from_plan(
            plans[s], [&](std::size_t node) { return truth[var][node * n_hours + hi]; },
            cfg.idw);
    };

    // st_rh[s][i] is rh `planted_lag` hours before observation row i.
    const auto station_rh_lagged = [&](std::vector<std::vector<double>>& out) {
        out.assign(stations.size(), std::vector<double>(n_obs_hours));
        for (std::size_t s = 0; s < stations.size(); ++s) {
            for (std::size_t i = 0; i < n_obs_hours; ++i) {
                const int64_t hour = obs_first_h + 3 * static_cast<int64_t>(i) -
                                     static_cast<int64_t>(cfg.planted_lag);
                out[s][i] = station_value(s, rh_v, hour);
            }
        }
    };
    std::vector<std::vector<double>> st_rh;
    station_rh_lagged(st_rh);
    std::vector<std::vector<double>> st_wind(stations.size());
    for (std::size_t s = 0; s < stations.size(); ++s) {
        st_wind[s].resize(n_obs_hours);
        for (std::size_t i = 0; i < n_obs_hours; ++i) {
            const int64_t hour = obs_first_h + 3 * static_cast<int64_t>(i);
            const double u = station_value(s, u_v, hour);
            const double v = station_value(s, v_v, hour);
            st_wind[s][i] = std::sqrt(u * u + v * v);
        }
    }

    // Shift the humidity field so the k-th largest lagged rh among calm rows
    // lands on the rule threshold; the rule then meets the target frequency
    // at the configured thresholds (up to interpolation rounding).
    std::vector<double> calm_rh;
    const std::size_t n_rows_total = stations.size() * n_obs_hours;
    for (std::size_t s = 0; s < stations.size(); ++s) {
        for (std::size_t i = 0; i < n_obs_hours; ++i) {
            if (st_wind[s][i] < cfg.wind_threshold) calm_rh.push_back(st_rh[s][i]);
        }
    }
    const auto k = static_cast<std::size_t>(
        std::llround(cfg.fog_frequency * static_cast<double>(n_rows_total)));
    if (k < 1 || k > calm_rh.size()) {
        throw ConfigError(
            "synth: fog frequency " + format_double(cfg.fog_frequency) +
            " is not achievable; this scenario supports (0, " +
            format_double(static_cast<double>(calm_rh.size()) /
                          static_cast<double>(n_rows_total)) +
            "]");
    }
    std::nth_element(calm_rh.begin(), calm_rh.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     calm_rh.end(), std::greater<double>());
    const double cut = calm_rh[k - 1];
    const double rh_shift = cfg.rh_threshold - cut;
    build.truth.fog_rh_cut = cut;
    build.truth.rh_shift = rh_shift;
    for (double& value : truth[rh_v]) value += rh_shift;
    station_rh_lagged(st_rh);  // rule inputs must match the shifted field

    // Grid frames: perfect forecasts for the signal variables, fresh noise
    // per (launch, lead, node) for the no-signal variable.
    ForecastGridSet& g = build.grids;
    g.lats = grid_lats;
    g.lons = grid_lons;
    g.launches = launches;
    g.variables = build.catalog.raw_names();  // already sorted by construction
    g.max_lead = cfg.horizon;
    g.allocate_frames();
    std::vector<std::size_t> var_of(params.size());
    for (std::size_t v = 0; v < params.size(); ++v) {
        var_of[v] = g.variable_index(params[v].name);
    }
    for (std::size_t li = 0; li < launches.size(); ++li) {
        const int64_t launch_h = launches[li].epoch_seconds() / 3600;
        for (unsigned lead = 1; lead <= cfg.horizon; ++lead) {
            const std::size_t hi = static_cast<std::size_t>(launch_h + lead - first_h);
            for (std::size_t v = 0; v < params.size(); ++v) {
                std::vector<double>& frame = g.frame_mut(li, lead, var_of[v]);
                frame.resize(n_nodes);
                for (std::size_t node = 0; node < n_nodes; ++node) {
                    frame[node] = truth[v][node * n_hours + hi];
                }
            }
        }
    }
    Rng noise_rng(cfg.seed ^ kSynthSaltNoiseVar);
    const std::size_t noise_vi = g.variable_index(kSynthNoiseVariable);
    for (std::size_t li = 0; li < launches.size(); ++li) {
        for (unsigned lead = 1; lead <= cfg.horizon; ++lead) {
            std::vector<double>& frame = g.frame_mut(li, lead, noise_vi);
            frame.resize(n_nodes);
            for (std::size_t node = 0; node < n_nodes; ++node) {
                frame[node] = noise_rng.normal(kSynthNoiseBase, kSynthNoiseSd);
            }
        }
    }

    // Observation rows in (station, time) order; the label-noise stream is
    // consumed in exactly this order.
    Rng label_rng(cfg.seed ^ kSynthSaltLabels);
    ObservationTable& obs = build.obs;
    obs.stations = stations;
    for (std::size_t s = 0; s < stations.size(); ++s) {
        for (std::size_t i = 0; i < n_obs_hours; ++i) {
            const int64_t hour = obs_first_h + 3 * static_cast<int64_t>(i);
            const double rh = st_rh[s][i];
            const double wind = st_wind[s][i];
            bool fog = rh >= cfg.rh_threshold && wind < cfg.wind_threshold;
            build.truth.n_rule_fog_rows += fog ? 1 : 0;
            double vis;
            if (fog) {
                vis = std::min(1.0, std::max(0.05, 1.0 - 0.095 * (rh - cfg.rh_threshold)));
            } else {
                vis = 1.05 + 0.25 * std::max(0.0, cfg.rh_threshold - rh) +
                      0.4 * std::max(0.0, wind - cfg.wind_threshold);
            }
            if (cfg.label_noise > 0.0 &&
                label_rng.uniform_real() < cfg.label_noise) {
                const bool resampled = label_rng.uniform_real() < cfg.fog_frequency;
                if (resampled != fog) {
                    ++build.truth.n_resampled_rows;
                    vis = resampled ? std::min(vis, 1.0) : std::max(vis, 1.05);
                    fog = resampled;
                }
            }
            build.truth.n_fog_rows += fog ? 1 : 0;
            ObservationRow row;
            row.station = static_cast<uint32_t>(s);
            row.time = UtcTime(hour * 3600);
            row.visibility_km = vis;
            if (cfg.emit_weather_codes && fog) {
                row.has_weather_code = true;
                row.weather_code = 45;
            }
            obs.rows.push_back(row);
        }
    }
    build.truth.n_obs_rows = obs.rows.size();
    obs.build_index();
    return build;
}

// In-memory dataset straight from a build, bypassing file serialization.
// Writing the same build to files and ingesting them yields a bit-identical
// dataset because values round-trip losslessly through the CSV formats.
inline Dataset synth_dataset(const SynthBuild& build, unsigned workers = 1,
                             const LabelPolicy& labels = LabelPolicy{}) {
    AssembleOptions opt;
    opt.idw = build.config.idw;
    opt.labels = labels;
    opt.horizon = build.config.horizon;
    opt.workers = workers;
    return assemble_dataset(build.obs, build.grids, build.catalog, opt);
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    return os;
}

}  // namespace detail

struct SynthFilePaths {
    std::string observations;
    std::string grid;
    std::string catalog;
    std::string truth;
};

// Serializes a build as pipeline inputs: observations CSV, grid CSV, catalog
// file, and a truth manifest describing the planted rule.
inline SynthFilePaths synth_write_files(const SynthBuild& build, const std::string& dir) {
    SynthFilePaths paths;
    paths.observations = dir + "/observations.csv";
    paths.grid = dir + "/grid.csv";
    paths.catalog = dir + "/catalog.txt";
    paths.truth = dir + "/truth.json";

    {
        std::ofstream os = detail::open_out(paths.observations);
        os << "station_id,lat,lon,time_utc,visibility_km,present_weather\n";
        for (const ObservationRow& r : build.obs.rows) {
            const Station& s = build.obs.stations[r.station];
            os << s.id << ',' << format_double(s.lat) << ',' << format_double(s.lon) << ','
               << r.time.iso8601() << ',' << format_double(r.visibility_km) << ',';
            if (r.has_weather_code) os << r.weather_code;
            os << '\n';
        }
        if (!os.flush()) throw IoError("failed to flush '" + paths.observations + "'");
    }
    {
        std::ofstream os = detail::open_out(paths.grid);
        os << "launch_utc,lead_hour,lat,lon,variable,value\n";
        const ForecastGridSet& g = build.grids;
        for (std::size_t li = 0; li < g.launches.size(); ++li) {
            const std::string launch = g.launches[li].iso8601();
            for (unsigned lead = 1; lead <= g.max_lead; ++lead) {
                for (std::size_t vi = 0; vi < g.variables.size(); ++vi) {
                    const std::vector<double>& frame = g.frame(li, lead, vi);
                    std::size_t node = 0;
                    for (double lat : g.lats) {
                        for (double lon : g.lons) {
                            os << launch << ',' << lead << ',' << format_double(lat) << ','
                               << format_double(lon) << ',' << g.variables[vi] << ',';
                            if (!is_missing(frame[node])) os << format_double(frame[node]);
                            os << '\n';
                            ++node;
                        }
                    }
                }
            }
        }
        if (!os.flush()) throw IoError("failed to flush '" + paths.grid + "'");
    }
    {
        std::ofstream os = detail::open_out(paths.catalog);
        write_catalog(build.catalog, os);
        if (!os.flush()) throw IoError("failed to flush '" + paths.catalog + "'");
    }
    {
        std::ofstream os = detail::open_out(paths.truth);
        const SynthTruth& t = build.truth;
        os << "{\n";
        os << "  \"seed\": " << build.config.seed << ",\n";
        os << "  \"planted_variable\": \"" << t.planted_variable << "\",\n";
        os << "  \"planted_lag\": " << t.planted_lag << ",\n";
        os << "  \"noise_variable\": \"" << kSynthNoiseVariable << "\",\n";
        os << "  \"rh_threshold\": " << format_double(build.config.rh_threshold) << ",\n";
        os << "  \"wind_threshold\": " << format_double(build.config.wind_threshold)
           << ",\n";
        os << "  \"rh_shift\": " << format_double(t.rh_shift) << ",\n";
        os << "  \"fog_rh_cut\": " << format_double(t.fog_rh_cut) << ",\n";
        os << "  \"target_fog_frequency\": " << format_double(build.config.fog_frequency)
           << ",\n";
        os << "  \"label_noise\": " << format_double(build.config.label_noise) << ",\n";
        os << "  \"n_obs_rows\": " << t.n_obs_rows << ",\n";
        os << "  \"n_rule_fog_rows\": " << t.n_rule_fog_rows << ",\n";
        os << "  \"n_fog_rows\": " << t.n_fog_rows << ",\n";
        os << "  \"n_resampled_rows\": " << t.n_resampled_rows << ",\n";
        os << "  \"stations\": [";
        for (std::size_t s = 0; s < build.obs.stations.size(); ++s) {
            const Station& st = build.obs.stations[s];
            os << (s ? ", " : "") << "{\"id\": \"" << st.id << "\", \"lat\": "
               << format_double(st.lat) << ", \"lon\": " << format_double(st.lon) << "}";
        }
        os << "]\n}\n";
        if (!os.flush()) throw IoError("failed to flush '" + paths.truth + "'");
    }
    return paths;
}

}  // namespace fogcast

#endif  // FOGCAST_SYNTH_HPP
