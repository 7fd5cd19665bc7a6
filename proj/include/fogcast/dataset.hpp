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
#ifndef FOGCAST_DATASET_HPP
#define FOGCAST_DATASET_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fogcast/binio.hpp"
#include "fogcast/catalog.hpp"
#include "fogcast/common.hpp"
#include "fogcast/time.hpp"

namespace fogcast {

struct Station {
    std::string id;
    double lat = 0.0;
    double lon = 0.0;
};

// Study-area box. Stations outside it are only warned about, never rejected.
inline bool station_in_study_area(const Station& s) {
    return s.lat >= 26.5 && s.lat <= 33.5 && s.lon >= 117.0 && s.lon <= 126.0;
}

// One sample = one (station, launch) forecast run covering leads 1..T.
// recent_vis holds observed visibility at launch +0, -3, -6 hours (km,
// NaN when no observation exists at that instant).
struct SampleMeta {
    uint32_t station = 0;
    UtcTime launch;
    std::array<float, 3> recent_vis = {
        std::numeric_limits<float>::quiet_NaN(),
        std::numeric_limits<float>::quiet_NaN(),
        std::numeric_limits<float>::quiet_NaN()};
};

// Forecast tensor X[n][m][t] plus per-(sample, lead) observed visibility
// Y[n][t]. Lead hours t are 1-based; storage is float32 with quiet NaN as
// the missing sentinel. Immutable once assembled.
class Dataset {
  public:
    VariableCatalog catalog;
    std::vector<Station> stations;
    std::vector<SampleMeta> samples;
    uint16_t horizon = 60;
    std::vector<float> x_data;  // samples.size() * catalog.size() * horizon
    std::vector<float> y_data;  // samples.size() * horizon

    std::size_t num_samples() const { return samples.size(); }
    std::size_t num_variables() const { return catalog.size(); }

    std::size_t x_index(std::size_t n, std::size_t m, unsigned lead) const {
        return (n * catalog.size() + m) * horizon + (lead - 1);
    }

    float x(std::size_t n, std::size_t m, unsigned lead) const {
        return x_data[x_index(n, m, lead)];
    }
    void set_x(std::size_t n, std::size_t m, unsigned lead, float v) {
        x_data[x_index(n, m, lead)] = v;
    }

    float y(std::size_t n, unsigned lead) const {
        return y_data[n * horizon + (lead - 1)];
    }
    void set_y(std::size_t n, unsigned lead, float v) {
        y_data[n * horizon + (lead - 1)] = v;
    }

    UtcTime valid_time(std::size_t n, unsigned lead) const {
        return samples[n].launch.plus_hours(static_cast<int>(lead));
    }

    const Station& station_of(std::size_t n) const {
        return stations[samples[n].station];
    }

    void allocate() {
        x_data.assign(samples.size() * catalog.size() * horizon,
                      std::numeric_limits<float>::quiet_NaN());
        y_data.assign(samples.size() * horizon,
                      std::numeric_limits<float>::quiet_NaN());
    }

    // Checks the container invariants: shapes, Y >= 0 where present, X finite
    // or NaN, station references in range, unique (station, launch) pairs.
    void validate() const {
        if (horizon < 1) throw DataError("dataset: horizon must be >= 1");
        if (x_data.size() != samples.size() * catalog.size() * horizon) {
            throw DataError("dataset: X size does not match N*M*T");
        }
        if (y_data.size() != samples.size() * horizon) {
            throw DataError("dataset: Y size does not match N*T");
        }
        std::set<std::pair<uint32_t, int64_t>> keys;
        for (const SampleMeta& s : samples) {
            if (s.station >= stations.size()) {
                throw DataError("dataset: sample references station out of range");
            }
            if (!keys.emplace(s.station, s.launch.epoch_seconds()).second) {
                throw DataError("dataset: duplicate (station, launch) sample");
            }
        }
        for (float v : x_data) {
            if (std::isinf(v)) throw DataError("dataset: X contains infinity");
        }
        for (float v : y_data) {
            if (std::isinf(v)) throw DataError("dataset: Y contains infinity");
            if (!std::isnan(v) && v < 0.0f) {
                throw DataError("dataset: negative visibility in Y");
            }
        }
    }
};

inline constexpr char kFogdMagic[4] = {'F', 'O', 'G', 'D'};
inline constexpr uint16_t kFogdVersion = 1;

// FOGD v1 layout, all integers little-endian:
//   "FOGD" u16 version
//   u64 N, u16 M, u16 T
//   u16 catalog count; per channel: u8 kind, u16 name length, name bytes
//   u32 station count; per station: u16 id length, id bytes, f64 lat, f64 lon
//   X as N*M*T float32 in [n][m][t] order (missing = quiet NaN)
//   Y as N*T float32
//   per sample: u32 station index, i64 launch epoch seconds, 3x f32 recent vis
inline void write_dataset(const Dataset& ds, std::ostream& os) {
    ds.validate();
    binio::write_magic(os, kFogdMagic);
    binio::write_le<uint16_t>(os, kFogdVersion);
    binio::write_le<uint64_t>(os, ds.samples.size());
    binio::write_le<uint16_t>(os, static_cast<uint16_t>(ds.catalog.size()));
    binio::write_le<uint16_t>(os, ds.horizon);
    binio::write_le<uint16_t>(os, static_cast<uint16_t>(ds.catalog.size()));
    for (const Channel& c : ds.catalog.channels()) {
        binio::write_le<uint8_t>(os, static_cast<uint8_t>(c.kind));
        binio::write_string16(os, c.name);
    }
    binio::write_le<uint32_t>(os, static_cast<uint32_t>(ds.stations.size()));
    for (const Station& s : ds.stations) {
        binio::write_string16(os, s.id);
        binio::write_le<double>(os, s.lat);
        binio::write_le<double>(os, s.lon);
    }
    for (float v : ds.x_data) binio::write_le<float>(os, v);
    for (float v : ds.y_data) binio::write_le<float>(os, v);
    for (const SampleMeta& m : ds.samples) {
        binio::write_le<uint32_t>(os, m.station);
        binio::write_le<int64_t>(os, m.launch.epoch_seconds());
        for (float v : m.recent_vis) binio::write_le<float>(os, v);
    }
    if (!os) throw IoError("failed to write dataset container");
}

inline Dataset read_dataset(std::istream& is) {
    binio::expect_magic(is, kFogdMagic, "FOGD");
    binio::expect_version(is, kFogdVersion, "FOGD");
    const uint64_t n = binio::read_le<uint64_t>(is, "sample count");
    const uint16_t m = binio::read_le<uint16_t>(is, "variable count");
    const uint16_t t = binio::read_le<uint16_t>(is, "lead horizon");
    const uint16_t n_catalog = binio::read_le<uint16_t>(is, "catalog count");
    if (n_catalog != m) {
        throw FormatError("FOGD: catalog count does not match variable count");
    }
    std::vector<Channel> channels;
    channels.reserve(n_catalog);
    for (uint16_t i = 0; i < n_catalog; ++i) {
        const uint8_t kind = binio::read_le<uint8_t>(is, "channel kind");
        if (kind > 1) throw FormatError("FOGD: bad channel kind");
        std::string name = binio::read_string16(is, "channel name");
        channels.push_back({std::move(name), static_cast<ChannelKind>(kind)});
    }
    Dataset ds;
    ds.catalog = VariableCatalog(std::move(channels));
    ds.horizon = t;
    const uint32_t n_stations = binio::read_le<uint32_t>(is, "station count");
    ds.stations.reserve(n_stations);
    for (uint32_t i = 0; i < n_stations; ++i) {
        Station s;
        s.id = binio::read_string16(is, "station id");
        s.lat = binio::read_le<double>(is, "station lat");
        s.lon = binio::read_le<double>(is, "station lon");
        ds.stations.push_back(std::move(s));
    }
    ds.x_data.resize(n * m * t);
    for (float& v : ds.x_data) v = binio::read_le<float>(is, "X value");
    ds.y_data.resize(n * t);
    for (float& v : ds.y_data) v = binio::read_le<float>(is, "Y value");
    ds.samples.resize(n);
    for (SampleMeta& sm : ds.samples) {
        sm.station = binio::read_le<uint32_t>(is, "sample station");
        sm.launch = UtcTime(binio::read_le<int64_t>(is, "sample launch"));
        for (float& v : sm.recent_vis) v = binio::read_le<float>(is, "recent vis");
    }
    ds.validate();
    return ds;
}

inline void write_dataset_file(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_dataset(ds, os);
    if (!os.flush()) throw IoError("failed to flush '" + path + "'");
}

inline Dataset read_dataset_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    return read_dataset(is);
}

}  // namespace fogcast

#endif  // FOGCAST_DATASET_HPP
