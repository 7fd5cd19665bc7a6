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
#ifndef FOGCAST_FEATURIZE_HPP
#define FOGCAST_FEATURIZE_HPP

#include <algorithm>
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
#include "fogcast/dataset.hpp"
#include "fogcast/tlca.hpp"
#include "fogcast/time.hpp"

namespace fogcast {

// Feature layout: selected predictors at their lags, then station location,
// calendar fields, observed visibility before launch, and the lead hour.
// The manifest lists every column name in emission order.
struct FeatureSpec {
    PredictorSet predictors;          // empty = all catalog variables at lag 0
    bool include_location = true;
    bool include_calendar = true;
    bool include_recent_visibility = true;
    bool include_lead_time = true;
    bool calendar_from_launch = false;  // default: valid time
    double label_threshold_km = 1.0;

    std::vector<std::string> manifest(const VariableCatalog& catalog) const {
        std::vector<std::string> names;
        for (const Predictor& p : effective_predictors(catalog)) {
            if (!catalog.contains(p.variable)) {
                throw ConfigError("featurize: predictor variable '" + p.variable +
                                  "' is not in the catalog");
            }
            names.push_back(p.variable + "_lag" + std::to_string(p.lag));
        }
        if (include_location) {
            names.push_back("lat");
            names.push_back("lon");
        }
        if (include_calendar) {
            names.push_back("hour");
            names.push_back("day");
            names.push_back("month");
        }
        if (include_recent_visibility) {
            names.push_back("obs_vis_0h");
            names.push_back("obs_vis_3h");
            names.push_back("obs_vis_6h");
        }
        if (include_lead_time) names.push_back("lead_hour");
        return names;
    }

    PredictorSet effective_predictors(const VariableCatalog& catalog) const {
        if (!predictors.empty()) return predictors;
        PredictorSet fallback;
        for (const Channel& c : catalog.channels()) fallback.push_back({c.name, 0});
        return fallback;
    }
};

struct RowMeta {
    uint32_t station = 0;  // index into FeatureMatrix::station_ids
    UtcTime launch;
    uint16_t lead = 0;

    UtcTime valid() const { return launch.plus_hours(lead); }
};

// Flat float32 feature rows with labels, weights and row provenance.
struct FeatureMatrix {
    std::vector<std::string> manifest;
    std::vector<std::string> station_ids;
    std::vector<float> values;  // rows x manifest.size()
    std::vector<uint8_t> labels;
    std::vector<float> weights;
    std::vector<RowMeta> meta;

    std::size_t rows() const { return labels.size(); }
    std::size_t cols() const { return manifest.size(); }

    const float* row(std::size_t i) const { return values.data() + i * cols(); }

    void reserve_rows(std::size_t n) {
        values.reserve(n * cols());
        labels.reserve(n);
        weights.reserve(n);
        meta.reserve(n);
    }

    void append_row_from(const FeatureMatrix& src, std::size_t i) {
        values.insert(values.end(), src.row(i), src.row(i) + src.cols());
        labels.push_back(src.labels[i]);
        weights.push_back(src.weights[i]);
        meta.push_back(src.meta[i]);
    }

    void validate() const {
        if (manifest.empty()) throw DataError("feature matrix: empty manifest");
        if (values.size() != rows() * cols() || weights.size() != rows() ||
            meta.size() != rows()) {
            throw DataError("feature matrix: inconsistent row storage");
        }
        for (const RowMeta& m : meta) {
            if (m.station >= station_ids.size()) {
                throw DataError("feature matrix: station index out of range");
            }
        }
    }
};

// Builds one labeled row per (sample, lead) with an observed visibility.
// Predictor values come from lead L-lag; a source lead below 1 or a missing
// tensor value yields the missing sentinel.
inline FeatureMatrix build_features(const Dataset& ds, const FeatureSpec& spec) {
    FeatureMatrix fm;
    fm.manifest = spec.manifest(ds.catalog);
    for (const Station& s : ds.stations) fm.station_ids.push_back(s.id);

    const PredictorSet preds = spec.effective_predictors(ds.catalog);
    std::vector<std::size_t> pred_var(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        pred_var[i] = ds.catalog.index_of(preds[i].variable);
    }

    for (std::size_t n = 0; n < ds.num_samples(); ++n) {
        const Station& st = ds.station_of(n);
        for (unsigned lead = 1; lead <= ds.horizon; ++lead) {
            const float vis = ds.y(n, lead);
            if (std::isnan(vis)) continue;
            for (std::size_t i = 0; i < preds.size(); ++i) {
                const unsigned lag = preds[i].lag;
                fm.values.push_back(lead > lag ? ds.x(n, pred_var[i], lead - lag)
                                               : kMissing);
            }
            if (spec.include_location) {
                fm.values.push_back(static_cast<float>(st.lat));
                fm.values.push_back(static_cast<float>(st.lon));
            }
            if (spec.include_calendar) {
                const UtcTime stamp = spec.calendar_from_launch
                                          ? ds.samples[n].launch
                                          : ds.valid_time(n, lead);
                const UtcTime::Civil c = stamp.civil();
                fm.values.push_back(static_cast<float>(c.hour));
                fm.values.push_back(static_cast<float>(c.day));
                fm.values.push_back(static_cast<float>(c.month));
            }
            if (spec.include_recent_visibility) {
                for (float v : ds.samples[n].recent_vis) fm.values.push_back(v);
            }
            if (spec.include_lead_time) {
                fm.values.push_back(static_cast<float>(lead));
            }
            fm.labels.push_back(static_cast<uint8_t>(
                label_from_visibility(vis, spec.label_threshold_km)));
            fm.weights.push_back(1.0f);
            RowMeta meta;
            meta.station = ds.samples[n].station;
            meta.launch = ds.samples[n].launch;
            meta.lead = static_cast<uint16_t>(lead);
            fm.meta.push_back(meta);
        }
    }
    fm.validate();
    return fm;
}

// Partitions rows by launch-time year. Year sets must be pairwise disjoint;
// rows whose launch year is in none of the sets are dropped.
inline void chronological_split(const FeatureMatrix& fm, const std::set<int>& train_years,
                                const std::set<int>& val_years, const std::set<int>& test_years,
                                FeatureMatrix& train, FeatureMatrix& val, FeatureMatrix& test) {
    for (int y : train_years) {
        if (val_years.count(y) || test_years.count(y)) {
            throw ConfigError("split: year " + std::to_string(y) + " appears in two sets");
        }
    }
    for (int y : val_years) {
        if (test_years.count(y)) {
            throw ConfigError("split: year " + std::to_string(y) + " appears in two sets");
        }
    }
    for (FeatureMatrix* out : {&train, &val, &test}) {
        *out = FeatureMatrix{};
        out->manifest = fm.manifest;
        out->station_ids = fm.station_ids;
    }
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        const int year = fm.meta[i].launch.year();
        if (train_years.count(year)) {
            train.append_row_from(fm, i);
        } else if (val_years.count(year)) {
            val.append_row_from(fm, i);
        } else if (test_years.count(year)) {
            test.append_row_from(fm, i);
        }
    }
}

// Rows whose launch year falls in `years`; empty set selects every row.
inline FeatureMatrix filter_by_years(const FeatureMatrix& fm, const std::set<int>& years) {
    if (years.empty()) return fm;
    FeatureMatrix out;
    out.manifest = fm.manifest;
    out.station_ids = fm.station_ids;
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        if (years.count(fm.meta[i].launch.year())) out.append_row_from(fm, i);
    }
    return out;
}

// The named columns, in the given order, with labels and metadata unchanged.
inline FeatureMatrix select_columns(const FeatureMatrix& fm,
                                    const std::vector<std::string>& names) {
    if (names.empty()) throw ConfigError("column selection must not be empty");
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const std::string& name : names) {
        const auto it = std::find(fm.manifest.begin(), fm.manifest.end(), name);
        if (it == fm.manifest.end()) {
            throw InputError("feature matrix has no column '" + name + "'");
        }
        idx.push_back(static_cast<std::size_t>(it - fm.manifest.begin()));
    }
    FeatureMatrix out;
    out.manifest = names;
    out.station_ids = fm.station_ids;
    out.labels = fm.labels;
    out.weights = fm.weights;
    out.meta = fm.meta;
    out.values.reserve(fm.rows() * names.size());
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        const float* src = fm.row(i);
        for (const std::size_t j : idx) out.values.push_back(src[j]);
    }
    return out;
}

inline constexpr char kFogfMagic[4] = {'F', 'O', 'G', 'F'};
inline constexpr uint16_t kFogfVersion = 1;

// FOGF v1 layout, all integers little-endian:
//   "FOGF" u16 version
//   u64 rows, u16 cols
//   u16 manifest count (== cols); per name: u16 length, bytes
//   u32 station count; per station: u16 length, id bytes
//   per row: cols x f32 features, u8 label, f32 weight,
//            u32 station index, i64 launch epoch seconds, u16 lead hour
inline void write_features(const FeatureMatrix& fm, std::ostream& os) {
    fm.validate();
    binio::write_magic(os, kFogfMagic);
    binio::write_le<uint16_t>(os, kFogfVersion);
    binio::write_le<uint64_t>(os, fm.rows());
    binio::write_le<uint16_t>(os, static_cast<uint16_t>(fm.cols()));
    binio::write_le<uint16_t>(os, static_cast<uint16_t>(fm.manifest.size()));
    for (const std::string& name : fm.manifest) binio::write_string16(os, name);
    binio::write_le<uint32_t>(os, static_cast<uint32_t>(fm.station_ids.size()));
    for (const std::string& id : fm.station_ids) binio::write_string16(os, id);
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        const float* row = fm.row(i);
        for (std::size_t j = 0; j < fm.cols(); ++j) binio::write_le<float>(os, row[j]);
        binio::write_le<uint8_t>(os, fm.labels[i]);
        binio::write_le<float>(os, fm.weights[i]);
        binio::write_le<uint32_t>(os, fm.meta[i].station);
        binio::write_le<int64_t>(os, fm.meta[i].launch.epoch_seconds());
        binio::write_le<uint16_t>(os, fm.meta[i].lead);
    }
    if (!os) throw IoError("failed to write feature container");
}

inline FeatureMatrix read_features(std::istream& is) {
    binio::expect_magic(is, kFogfMagic, "FOGF");
    binio::expect_version(is, kFogfVersion, "FOGF");
    const uint64_t rows = binio::read_le<uint64_t>(is, "row count");
    const uint16_t cols = binio::read_le<uint16_t>(is, "column count");
    const uint16_t n_names = binio::read_le<uint16_t>(is, "manifest count");
    if (n_names != cols) throw FormatError("FOGF: manifest count does not match columns");
    FeatureMatrix fm;
    for (uint16_t i = 0; i < n_names; ++i) {
        fm.manifest.push_back(binio::read_string16(is, "manifest name"));
    }
    const uint32_t n_stations = binio::read_le<uint32_t>(is, "station count");
    for (uint32_t i = 0; i < n_stations; ++i) {
        fm.station_ids.push_back(binio::read_string16(is, "station id"));
    }
    fm.values.resize(rows * cols);
    fm.labels.resize(rows);
    fm.weights.resize(rows);
    fm.meta.resize(rows);
    for (uint64_t i = 0; i < rows; ++i) {
        for (uint16_t j = 0; j < cols; ++j) {
            fm.values[i * cols + j] = binio::read_le<float>(is, "feature value");
        }
        const uint8_t label = binio::read_le<uint8_t>(is, "label");
        if (label > 1) throw FormatError("FOGF: label must be 0 or 1");
        fm.labels[i] = label;
        fm.weights[i] = binio::read_le<float>(is, "weight");
        fm.meta[i].station = binio::read_le<uint32_t>(is, "row station");
        fm.meta[i].launch = UtcTime(binio::read_le<int64_t>(is, "row launch"));
        fm.meta[i].lead = binio::read_le<uint16_t>(is, "row lead");
    }
    fm.validate();
    return fm;
}

inline void write_features_file(const FeatureMatrix& fm, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_features(fm, os);
    if (!os.flush()) throw IoError("failed to flush '" + path + "'");
}

inline FeatureMatrix read_features_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    return read_features(is);
}

// Human-readable export: manifest columns plus label, weight and provenance.
inline void write_features_csv(const FeatureMatrix& fm, std::ostream& os) {
    for (const std::string& name : fm.manifest) os << name << ',';
    os << "label,weight,station_id,launch_utc,lead_hour\n";
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        const float* row = fm.row(i);
        for (std::size_t j = 0; j < fm.cols(); ++j) {
            if (std::isnan(row[j])) {
                os << ',';
            } else {
                os << format_double(row[j]) << ',';
            }
        }
        os << static_cast<int>(fm.labels[i]) << ',' << format_double(fm.weights[i]) << ','
           << fm.station_ids[fm.meta[i].station] << ',' << fm.meta[i].launch.iso8601() << ','
           << fm.meta[i].lead << '\n';
    }
    if (!os) throw IoError("failed to write feature CSV");
}

}  // namespace fogcast

#endif  // FOGCAST_FEATURIZE_HPP
