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
#ifndef FOGCAST_TLCA_HPP
#define FOGCAST_TLCA_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "fogcast/catalog.hpp"
#include "fogcast/common.hpp"
#include "fogcast/csv.hpp"
#include "fogcast/dataset.hpp"
#include "fogcast/stats.hpp"

namespace fogcast {

struct TlcaConfig {
    unsigned max_lag = 5;                      // hours looked back from the labeled lead
    double alpha = 0.05;                       // two-sided significance level
    std::set<int> months = {3, 4, 5, 6, 7};    // month filter on the valid time
    bool binary_target = false;                // correlate against fog labels, not raw km
    double label_threshold_km = 1.0;           // used only with binary_target
    unsigned workers = 1;

    void validate(uint16_t horizon) const {
        if (max_lag >= horizon) {
            throw ConfigError("tlca: max lag must be below the lead horizon");
        }
        if (alpha <= 0.0 || alpha >= 1.0) {
            throw ConfigError("tlca: alpha must be in (0,1)");
        }
        if (months.empty()) throw ConfigError("tlca: month filter is empty");
        for (int m : months) {
            if (m < 1 || m > 12) throw ConfigError("tlca: month out of range");
        }
    }
};

// One (variable, lag) cell. Cells with too little or constant data are kept
// but marked undefined instead of aborting the whole table.
struct LagCell {
    std::size_t variable = 0;  // catalog index
    unsigned lag = 0;          // hours back, 0..max_lag
    bool defined = false;
    double r = 0.0;
    std::size_t n = 0;
    double p_value = 1.0;
    bool significant = false;
    bool exact = false;  // |r| = 1 convention
};

struct LaggedCorrelationTable {
    std::vector<std::string> variable_names;  // catalog order
    unsigned max_lag = 0;
    double alpha = 0.05;
    std::vector<LagCell> cells;  // [variable][lag], lag fastest

    const LagCell& cell(std::size_t variable, unsigned lag) const {
        return cells[variable * (max_lag + 1) + lag];
    }
};

struct Predictor {
    std::string variable;
    unsigned lag = 0;
};

using PredictorSet = std::vector<Predictor>;

// Correlates each variable at leads L, L-1, ..., L-max_lag against the
// observation at lead L, over every labeled (sample, lead) whose valid time
// falls in the configured months. Pairs with a missing X value or an
// out-of-range source lead are dropped per cell (pairwise deletion).
inline LaggedCorrelationTable lagged_correlations(const Dataset& ds, const TlcaConfig& cfg) {
    cfg.validate(ds.horizon);
    LaggedCorrelationTable table;
    for (const Channel& c : ds.catalog.channels()) table.variable_names.push_back(c.name);
    table.max_lag = cfg.max_lag;
    table.alpha = cfg.alpha;
    table.cells.resize(ds.catalog.size() * (cfg.max_lag + 1));

    // Labeled (sample, lead) points surviving the month filter, shared by
    // every cell scan.
    std::vector<std::pair<uint32_t, uint16_t>> points;
    for (std::size_t n = 0; n < ds.num_samples(); ++n) {
        for (unsigned lead = 1; lead <= ds.horizon; ++lead) {
            if (std::isnan(ds.y(n, lead))) continue;
            if (!cfg.months.count(ds.valid_time(n, lead).month())) continue;
            points.emplace_back(static_cast<uint32_t>(n), static_cast<uint16_t>(lead));
        }
    }
    if (points.empty()) {
        throw DataError("tlca: no labeled valid times in the configured months");
    }

    parallel_for(table.cells.size(), cfg.workers, [&](std::size_t ci) {
        const std::size_t m = ci / (cfg.max_lag + 1);
        const unsigned lag = static_cast<unsigned>(ci % (cfg.max_lag + 1));
        LagCell& cell = table.cells[ci];
        cell.variable = m;
        cell.lag = lag;
        std::vector<double> xs, ys;
        xs.reserve(points.size());
        ys.reserve(points.size());
        for (const auto& [n, lead] : points) {
            if (lead <= lag) continue;  // source lead L-lag must stay >= 1
            const float xv = ds.x(n, m, lead - lag);
            if (std::isnan(xv)) continue;
            const double yv = ds.y(n, lead);
            xs.push_back(xv);
            ys.push_back(cfg.binary_target
                             ? static_cast<double>(
                                   label_from_visibility(yv, cfg.label_threshold_km))
                             : yv);
        }
        cell.n = xs.size();
        try {
            cell.r = std::clamp(pearson(xs, ys), -1.0, 1.0);
            const Significance sig = significance(cell.r, cell.n, cfg.alpha);
            cell.p_value = sig.p_value;
            cell.significant = sig.significant;
            cell.exact = sig.exact;
            cell.defined = true;
        } catch (const DataError&) {
            cell.defined = false;
        }
    });
    return table;
}

// Retains every significant cell, ordered by |r| descending with ties broken
// by catalog order then lag. An empty result is not an error; downstream
// featurization falls back to all variables at lag 0.
inline PredictorSet select_predictors(const LaggedCorrelationTable& table) {
    std::vector<const LagCell*> picked;
    for (const LagCell& c : table.cells) {
        if (c.defined && c.significant) picked.push_back(&c);
    }
    std::sort(picked.begin(), picked.end(), [](const LagCell* a, const LagCell* b) {
        const double ra = std::fabs(a->r), rb = std::fabs(b->r);
        if (ra != rb) return ra > rb;
        if (a->variable != b->variable) return a->variable < b->variable;
        return a->lag < b->lag;
    });
    PredictorSet out;
    out.reserve(picked.size());
    for (const LagCell* c : picked) {
        out.push_back({table.variable_names[c->variable], c->lag});
    }
    return out;
}

// Table CSV: variable,lag,r,n,p_value,significant. Undefined cells print NA
// for r and p_value.
inline void write_correlation_table(const LaggedCorrelationTable& table, std::ostream& os) {
    os << "variable,lag,r,n,p_value,significant\n";
    for (const LagCell& c : table.cells) {
        os << table.variable_names[c.variable] << ',' << c.lag << ',';
        if (c.defined) {
            os << format_double(c.r) << ',' << c.n << ',' << format_double(c.p_value) << ','
               << (c.significant ? 1 : 0) << '\n';
        } else {
            os << "NA," << c.n << ",NA,0\n";
        }
    }
    if (!os) throw IoError("failed to write correlation table");
}

inline void write_predictor_set(const PredictorSet& set, std::ostream& os) {
    os << "variable,lag\n";
    for (const Predictor& p : set) {
        os << p.variable << ',' << p.lag << '\n';
    }
    if (!os) throw IoError("failed to write predictor set");
}

inline PredictorSet read_predictor_set(std::istream& is,
                                       const std::string& source = "predictors") {
    CsvReader reader(is, "variable,lag", source);
    PredictorSet set;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        reader.expect_fields(fields, 2);
        const long lag = reader.parse_long(fields[1], "lag");
        if (lag < 0) reader.fail("lag must be >= 0");
        set.push_back({fields[0], static_cast<unsigned>(lag)});
    }
    return set;
}

inline PredictorSet read_predictor_set_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    return read_predictor_set(is, path);
}

}  // namespace fogcast

#endif  // FOGCAST_TLCA_HPP
