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
#ifndef FOGCAST_INGEST_HPP
#define FOGCAST_INGEST_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fogcast/catalog.hpp"
#include "fogcast/common.hpp"
#include "fogcast/csv.hpp"
#include "fogcast/dataset.hpp"
#include "fogcast/idw.hpp"
#include "fogcast/time.hpp"

namespace fogcast {

struct ObservationRow {
    uint32_t station = 0;
    UtcTime time;
    double visibility_km = kMissing;
    bool has_weather_code = false;
    int weather_code = 0;
};

// Station-keyed observation records with one row per (station, timestamp).
class ObservationTable {
  public:
    std::vector<Station> stations;  // sorted by id
    std::vector<ObservationRow> rows;

    std::size_t station_index(const std::string& id) const {
        auto it = station_index_.find(id);
        if (it == station_index_.end()) {
            throw DataError("unknown station '" + id + "'");
        }
        return it->second;
    }

    bool has_station(const std::string& id) const {
        return station_index_.count(id) != 0;
    }

    // Visibility at an exact instant; kMissing when absent or excluded.
    const ObservationRow* find(uint32_t station, UtcTime t) const {
        auto it = row_index_.find(key(station, t));
        return it == row_index_.end() ? nullptr : &rows[it->second];
    }

    UtcTime min_time() const { return min_time_; }
    UtcTime max_time() const { return max_time_; }

    void build_index() {
        station_index_.clear();
        for (std::size_t i = 0; i < stations.size(); ++i) {
            station_index_.emplace(stations[i].id, i);
        }
        row_index_.clear();
        min_time_ = UtcTime(std::numeric_limits<int64_t>::max());
        max_time_ = UtcTime(std::numeric_limits<int64_t>::min());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            row_index_.emplace(key(rows[i].station, rows[i].time), i);
            if (rows[i].time < min_time_) min_time_ = rows[i].time;
            if (max_time_ < rows[i].time) max_time_ = rows[i].time;
        }
    }

  private:
    static std::pair<uint32_t, int64_t> key(uint32_t station, UtcTime t) {
        return {station, t.epoch_seconds()};
    }

    std::unordered_map<std::string, std::size_t> station_index_;
    std::map<std::pair<uint32_t, int64_t>, std::size_t> row_index_;
    UtcTime min_time_;
    UtcTime max_time_;
};

// Parses the observations CSV:
//   station_id,lat,lon,time_utc,visibility_km,present_weather
// Empty visibility means missing; empty present_weather means absent.
inline ObservationTable parse_observations(std::istream& is,
                                           const std::string& source = "observations") {
    CsvReader reader(is, "station_id,lat,lon,time_utc,visibility_km,present_weather", source);
    ObservationTable table;
    struct Raw {
        std::string station_id;
        ObservationRow row;
    };
    std::vector<Raw> raws;
    std::map<std::string, std::pair<double, double>> coords;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        reader.expect_fields(fields, 6);
        Raw r;
        r.station_id = fields[0];
        if (r.station_id.empty()) reader.fail("empty station_id");
        const double lat = reader.parse_double(fields[1], "lat");
        const double lon = reader.parse_double(fields[2], "lon");
        auto [it, inserted] = coords.emplace(r.station_id, std::make_pair(lat, lon));
        if (!inserted && (it->second.first != lat || it->second.second != lon)) {
            reader.fail("station '" + r.station_id + "' re-declared with different coordinates");
        }
        try {
            r.row.time = UtcTime::parse(fields[3]);
        } catch (const Error& e) {
            reader.fail(e.what());
        }
        if (fields[4].empty()) {
            r.row.visibility_km = kMissing;
        } else {
            r.row.visibility_km = reader.parse_double(fields[4], "visibility_km");
            if (r.row.visibility_km < 0.0) reader.fail("negative visibility");
        }
        if (!fields[5].empty()) {
            r.row.has_weather_code = true;
            r.row.weather_code = static_cast<int>(reader.parse_long(fields[5], "present_weather"));
        }
        raws.push_back(std::move(r));
    }
    if (raws.empty()) throw InputError(source + ": no observation rows");

    for (const auto& [id, ll] : coords) {
        table.stations.push_back({id, ll.first, ll.second});
    }
    std::unordered_map<std::string, uint32_t> idx;
    for (std::size_t i = 0; i < table.stations.size(); ++i) {
        idx.emplace(table.stations[i].id, static_cast<uint32_t>(i));
    }
    std::set<std::pair<uint32_t, int64_t>> seen;
    for (Raw& r : raws) {
        r.row.station = idx.at(r.station_id);
        if (!seen.emplace(r.row.station, r.row.time.epoch_seconds()).second) {
            throw InputError(source + ": duplicate observation for station '" +
                             r.station_id + "' at " + r.row.time.iso8601());
        }
        table.rows.push_back(r.row);
    }
    table.build_index();
    return table;
}

inline ObservationTable parse_observations_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    return parse_observations(is, path);
}

// Gridded forecasts as dense per-(launch, lead, variable) frames over one
// fixed rectilinear node set. Frame values are row-major [lat][lon]; an
// absent frame stays empty and yields missing values downstream.
class ForecastGridSet {
  public:
    std::vector<double> lats;  // sorted ascending, unique
    std::vector<double> lons;
    std::vector<UtcTime> launches;  // sorted ascending
    std::vector<std::string> variables;  // raw registry names, sorted
    uint16_t max_lead = 0;

    std::size_t nodes() const { return lats.size() * lons.size(); }

    const std::vector<double>& frame(std::size_t launch_idx, unsigned lead,
                                     std::size_t var_idx) const {
        return frames_[frame_index(launch_idx, lead, var_idx)];
    }

    std::vector<double>& frame_mut(std::size_t launch_idx, unsigned lead,
                                   std::size_t var_idx) {
        return frames_[frame_index(launch_idx, lead, var_idx)];
    }

    void allocate_frames() {
        frames_.assign(launches.size() * max_lead * variables.size(), {});
    }

    bool has_variable(const std::string& name) const {
        return std::binary_search(variables.begin(), variables.end(), name);
    }

    std::size_t variable_index(const std::string& name) const {
        auto it = std::lower_bound(variables.begin(), variables.end(), name);
        if (it == variables.end() || *it != name) {
            throw DataError("grid set has no variable '" + name + "'");
        }
        return static_cast<std::size_t>(it - variables.begin());
    }

    // Node coordinates flattened in the same row-major order as frames.
    void node_coordinates(std::vector<double>& node_lats,
                          std::vector<double>& node_lons) const {
        node_lats.clear();
        node_lons.clear();
        node_lats.reserve(nodes());
        node_lons.reserve(nodes());
        for (double la : lats) {
            for (double lo : lons) {
                node_lats.push_back(la);
                node_lons.push_back(lo);
            }
        }
    }

  private:
    std::size_t frame_index(std::size_t launch_idx, unsigned lead,
                            std::size_t var_idx) const {
        return (launch_idx * max_lead + (lead - 1)) * variables.size() + var_idx;
    }

    std::vector<std::vector<double>> frames_;
};

// Parses the long-form grid CSV:
//   launch_utc,lead_hour,lat,lon,variable,value
// Launches must fall on 00:00 or 12:00 UTC; leads in [1, 60]; every present
// frame must cover the full rectilinear node set exactly once.
inline ForecastGridSet parse_grid(std::istream& is, const std::string& source = "grid") {
    CsvReader reader(is, "launch_utc,lead_hour,lat,lon,variable,value", source);
    struct Cell {
        int64_t launch;
        unsigned lead;
        double lat, lon;
        std::string variable;
        double value;
    };
    std::vector<Cell> cells;
    std::set<double> lat_set, lon_set;
    std::set<int64_t> launch_set;
    std::set<std::string> var_set;
    unsigned max_lead = 0;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        reader.expect_fields(fields, 6);
        Cell c;
        try {
            UtcTime launch = UtcTime::parse(fields[0]);
            const auto cv = launch.civil();
            if ((cv.hour != 0 && cv.hour != 12) || cv.minute != 0 || cv.second != 0) {
                reader.fail("launch time must be 00:00 or 12:00 UTC");
            }
            c.launch = launch.epoch_seconds();
        } catch (const Error& e) {
            reader.fail(e.what());
        }
        const long lead = reader.parse_long(fields[1], "lead_hour");
        if (lead < 1 || lead > 60) reader.fail("lead_hour must be in [1, 60]");
        c.lead = static_cast<unsigned>(lead);
        c.lat = reader.parse_double(fields[2], "lat");
        c.lon = reader.parse_double(fields[3], "lon");
        c.variable = fields[4];
        if (!is_raw_variable(c.variable)) {
            reader.fail("'" + c.variable + "' is not a known raw variable");
        }
        c.value = fields[5].empty() ? kMissing : reader.parse_double(fields[5], "value");
        max_lead = std::max(max_lead, c.lead);
        lat_set.insert(c.lat);
        lon_set.insert(c.lon);
        launch_set.insert(c.launch);
        var_set.insert(c.variable);
        cells.push_back(std::move(c));
    }
    if (cells.empty()) throw InputError(source + ": no grid rows");

    ForecastGridSet g;
    g.lats.assign(lat_set.begin(), lat_set.end());
    g.lons.assign(lon_set.begin(), lon_set.end());
    for (int64_t s : launch_set) g.launches.push_back(UtcTime(s));
    g.variables.assign(var_set.begin(), var_set.end());
    g.max_lead = static_cast<uint16_t>(max_lead);
    g.allocate_frames();

    std::unordered_map<int64_t, std::size_t> launch_idx;
    for (std::size_t i = 0; i < g.launches.size(); ++i) {
        launch_idx.emplace(g.launches[i].epoch_seconds(), i);
    }
    std::unordered_map<double, std::size_t> lat_idx, lon_idx;
    for (std::size_t i = 0; i < g.lats.size(); ++i) lat_idx.emplace(g.lats[i], i);
    for (std::size_t i = 0; i < g.lons.size(); ++i) lon_idx.emplace(g.lons[i], i);

    const std::size_t n_nodes = g.nodes();
    std::vector<std::size_t> fill_counts(g.launches.size() * g.max_lead * g.variables.size(), 0);
    for (const Cell& c : cells) {
        const std::size_t li = launch_idx.at(c.launch);
        const std::size_t vi = g.variable_index(c.variable);
        std::vector<double>& frame = g.frame_mut(li, c.lead, vi);
        if (frame.empty()) frame.assign(n_nodes, kMissing);
        const std::size_t node = lat_idx.at(c.lat) * g.lons.size() + lon_idx.at(c.lon);
        std::size_t& count = fill_counts[(li * g.max_lead + (c.lead - 1)) * g.variables.size() + vi];
        if (!is_missing(frame[node])) {
            throw InputError(source + ": duplicate grid cell (launch " +
                             UtcTime(c.launch).iso8601() + ", lead " +
                             std::to_string(c.lead) + ", " + c.variable + ", " +
                             format_double(c.lat) + ", " + format_double(c.lon) + ")");
        }
        frame[node] = c.value;
        ++count;
    }
    // Missing values are allowed inside a frame, but a frame must mention
    // every node so gaps are explicit rather than accidental.
    for (std::size_t li = 0; li < g.launches.size(); ++li) {
        for (unsigned lead = 1; lead <= g.max_lead; ++lead) {
            for (std::size_t vi = 0; vi < g.variables.size(); ++vi) {
                const std::vector<double>& f = g.frame(li, lead, vi);
                if (f.empty()) continue;
                const std::size_t count =
                    fill_counts[(li * g.max_lead + (lead - 1)) * g.variables.size() + vi];
                if (count != n_nodes) {
                    throw InputError(source + ": incomplete grid frame (launch " +
                                     g.launches[li].iso8601() + ", lead " +
                                     std::to_string(lead) + ", " + g.variables[vi] +
                                     "): " + std::to_string(count) + " of " +
                                     std::to_string(n_nodes) + " nodes");
                }
            }
        }
    }
    return g;
}

inline ForecastGridSet parse_grid_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    return parse_grid(is, path);
}

struct AssembleOptions {
    IdwConfig idw;
    LabelPolicy labels;
    uint16_t horizon = 0;  // 0 = infer from the grid set's max lead
    unsigned workers = 1;
};

// Builds the forecast tensor: one sample per (station, launch), X from
// IDW-interpolated grid frames with derived channels computed afterwards,
// Y from observations matched at exact valid times. Stations outside the
// grid bounding box are dropped with a warning.
inline Dataset assemble_dataset(const ObservationTable& obs, const ForecastGridSet& grids,
                                const VariableCatalog& catalog, const AssembleOptions& opt,
                                std::vector<std::string>* warnings = nullptr) {
    opt.idw.validate();
    for (const std::string& name : catalog.raw_names()) {
        if (!grids.has_variable(name)) {
            throw DataError("grid set lacks catalog variable '" + name + "'");
        }
    }
    const uint16_t horizon = opt.horizon ? opt.horizon : grids.max_lead;
    if (horizon < 1) throw DataError("assemble: horizon must be >= 1");

    // Time ranges must overlap or no Y value can ever be filled.
    const UtcTime first_valid = grids.launches.front().plus_hours(1);
    const UtcTime last_valid = grids.launches.back().plus_hours(horizon);
    if (obs.max_time() < first_valid || last_valid < obs.min_time()) {
        throw DataError("observation and forecast time ranges do not overlap");
    }

    Dataset ds;
    ds.catalog = catalog;
    ds.horizon = horizon;

    const double lat_lo = grids.lats.front(), lat_hi = grids.lats.back();
    const double lon_lo = grids.lons.front(), lon_hi = grids.lons.back();
    std::vector<uint32_t> kept;  // indices into obs.stations
    for (uint32_t i = 0; i < obs.stations.size(); ++i) {
        const Station& s = obs.stations[i];
        if (s.lat < lat_lo || s.lat > lat_hi || s.lon < lon_lo || s.lon > lon_hi) {
            if (warnings) {
                warnings->push_back("station '" + s.id +
                                    "' is outside the grid bounding box; dropped");
            }
            continue;
        }
        if (warnings && !station_in_study_area(s)) {
            warnings->push_back("station '" + s.id + "' lies outside the study area box");
        }
        ds.stations.push_back(s);
        kept.push_back(i);
    }
    if (ds.stations.empty()) throw DataError("no stations inside the grid bounding box");

    for (uint32_t si = 0; si < ds.stations.size(); ++si) {
        for (std::size_t li = 0; li < grids.launches.size(); ++li) {
            SampleMeta m;
            m.station = si;
            m.launch = grids.launches[li];
            ds.samples.push_back(m);
        }
    }
    ds.allocate();

    std::vector<double> node_lats, node_lons;
    grids.node_coordinates(node_lats, node_lons);
    std::vector<IdwPlan> plans;
    plans.reserve(ds.stations.size());
    for (const Station& s : ds.stations) {
        plans.emplace_back(node_lats, node_lons, s.lat, s.lon);
    }

    const std::size_t n_launches = grids.launches.size();
    const std::vector<Channel>& channels = ds.catalog.channels();
    std::vector<std::size_t> grid_var_of(channels.size(), 0);
    for (std::size_t m = 0; m < channels.size(); ++m) {
        if (channels[m].kind == ChannelKind::kRaw) {
            grid_var_of[m] = grids.variable_index(channels[m].name);
        }
    }

    parallel_for(ds.samples.size(), opt.workers, [&](std::size_t n) {
        const std::size_t si = ds.samples[n].station;
        const std::size_t li = n % n_launches;
        const IdwPlan& plan = plans[si];
        for (unsigned lead = 1; lead <= horizon; ++lead) {
            if (lead <= grids.max_lead) {
                for (std::size_t m = 0; m < channels.size(); ++m) {
                    if (channels[m].kind != ChannelKind::kRaw) continue;
                    const std::vector<double>& f = grids.frame(li, lead, grid_var_of[m]);
                    if (f.empty()) continue;
                    double v;
                    try {
                        v = idw_from_plan(plan, [&](std::size_t node) { return f[node]; },
                                          opt.idw);
                    } catch (const DataError&) {
                        v = kMissing;
                    }
                    ds.set_x(n, m, lead, static_cast<float>(v));
                }
            }
            for (std::size_t m = 0; m < channels.size(); ++m) {
                if (channels[m].kind != ChannelKind::kDerived) continue;
                const DerivedFormula& formula = find_formula(channels[m].name);
                std::vector<double> inputs;
                inputs.reserve(formula.inputs.size());
                for (const std::string& in : formula.inputs) {
                    const float raw = ds.x(n, ds.catalog.index_of(in), lead);
                    inputs.push_back(std::isnan(raw) ? kMissing
                                                     : static_cast<double>(raw));
                }
                const double v = derive_channel(channels[m].name, inputs);
                ds.set_x(n, m, lead, static_cast<float>(v));
            }
            const ObservationRow* row = obs.find(kept[si], ds.valid_time(n, lead));
            if (row && !is_missing(row->visibility_km)) {
                const bool excluded = opt.labels.excludes(
                    row->visibility_km, row->has_weather_code, row->weather_code);
                if (!excluded) {
                    ds.set_y(n, lead, static_cast<float>(row->visibility_km));
                }
            }
        }
        // Observed visibility at launch +0, -3, -6 hours feeds the
        // recent-conditions feature block downstream.
        for (int k = 0; k < 3; ++k) {
            const ObservationRow* row =
                obs.find(kept[si], ds.samples[n].launch.plus_hours(-3 * k));
            if (row && !is_missing(row->visibility_km)) {
                ds.samples[n].recent_vis[k] = static_cast<float>(row->visibility_km);
            }
        }
    });

    ds.validate();
    bool any_y = false;
    for (float v : ds.y_data) {
        if (!std::isnan(v)) {
            any_y = true;
            break;
        }
    }
    if (!any_y) {
        throw DataError("assembled dataset has no observed visibility at any valid time");
    }
    return ds;
}

}  // namespace fogcast

#endif  // FOGCAST_INGEST_HPP
