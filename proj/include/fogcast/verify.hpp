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
#ifndef FOGCAST_VERIFY_HPP
#define FOGCAST_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "fogcast/catalog.hpp"
#include "fogcast/common.hpp"
#include "fogcast/csv.hpp"
#include "fogcast/ingest.hpp"
#include "fogcast/time.hpp"

namespace fogcast {

// Event counts: a = hits, b = false alarms, c = misses, d = correct
// negatives ("event" means fog observed or forecast).
struct ConfusionMatrix {
    uint64_t a = 0;
    uint64_t b = 0;
    uint64_t c = 0;
    uint64_t d = 0;

    uint64_t n() const { return a + b + c + d; }

    void add(int forecast, int observed) {
        if ((forecast != 0 && forecast != 1) || (observed != 0 && observed != 1)) {
            throw InputError("confusion matrix labels must be 0 or 1");
        }
        if (forecast == 1) {
            observed == 1 ? ++a : ++b;
        } else {
            observed == 1 ? ++c : ++d;
        }
    }

    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        a += o.a;
        b += o.b;
        c += o.c;
        d += o.d;
        return *this;
    }
};

struct Metric {
    double value = std::numeric_limits<double>::quiet_NaN();
    bool defined = false;
};

inline Metric defined_metric(double v) { return Metric{v, true}; }

struct ScoreSet {
    Metric pod;
    Metric far_paper;         // false alarms over correct outcomes: b / (a + d)
    Metric far_conventional;  // false alarms over positive forecasts: b / (a + b)
    Metric ets;
    Metric hss;
};

// Degenerate matrices yield undefined metrics, never NaN arithmetic; the
// zero-denominator conditions are checked exactly in integer arithmetic.
inline ScoreSet scores(const ConfusionMatrix& m) {
    ScoreSet s;
    const uint64_t n = m.n();
    if (m.a + m.c > 0) {
        s.pod = defined_metric(static_cast<double>(m.a) / static_cast<double>(m.a + m.c));
    }
    if (m.a + m.d > 0) {
        s.far_paper = defined_metric(static_cast<double>(m.b) / static_cast<double>(m.a + m.d));
    }
    if (m.a + m.b > 0) {
        s.far_conventional =
            defined_metric(static_cast<double>(m.b) / static_cast<double>(m.a + m.b));
    }
    if (n > 0) {
        using u128 = unsigned __int128;
        const u128 fo = static_cast<u128>(m.a + m.b) * (m.a + m.c);
        if (static_cast<u128>(n) * (m.a + m.b + m.c) != fo) {
            const double ar = static_cast<double>(m.a + m.b) * static_cast<double>(m.a + m.c) /
                              static_cast<double>(n);
            s.ets = defined_metric((static_cast<double>(m.a) - ar) /
                                   (static_cast<double>(m.a + m.b + m.c) - ar));
        }
        const u128 expected = fo + static_cast<u128>(m.b + m.d) * (m.c + m.d);
        if (expected != static_cast<u128>(n) * n) {
            const double nd = static_cast<double>(n);
            const double pcf = static_cast<double>(m.a + m.d) / nd;
            const double e =
                (static_cast<double>(m.a + m.b) * static_cast<double>(m.a + m.c) +
                 static_cast<double>(m.b + m.d) * static_cast<double>(m.c + m.d)) /
                (nd * nd);
            s.hss = defined_metric((pcf - e) / (1.0 - e));
        }
    }
    return s;
}

enum class FarConvention { kPaper, kConventional };

inline FarConvention parse_far_convention(const std::string& name) {
    if (name == "paper") return FarConvention::kPaper;
    if (name == "conventional") return FarConvention::kConventional;
    throw ConfigError("unknown FAR convention '" + name + "'");
}

inline Metric far_of(const ScoreSet& s, FarConvention conv) {
    return conv == FarConvention::kPaper ? s.far_paper : s.far_conventional;
}

// One forecast/observation pair for a station, launch, and lead time.
struct PredictionRecord {
    uint32_t station_index = 0;  // index into an external station id list
    std::string station_id;
    UtcTime launch{0};
    uint16_t lead_hour = 0;
    double probability = 0.0;
    int forecast_label = 0;
    int observed_label = 0;
};

inline ConfusionMatrix confusion(const std::vector<PredictionRecord>& records) {
    ConfusionMatrix m;
    for (const PredictionRecord& r : records) m.add(r.forecast_label, r.observed_label);
    return m;
}

enum class AggregateMode { kPooled, kMean };

inline AggregateMode parse_aggregate_mode(const std::string& name) {
    if (name == "pooled") return AggregateMode::kPooled;
    if (name == "mean") return AggregateMode::kMean;
    throw ConfigError("unknown aggregate mode '" + name + "'");
}

struct LeadtimeReport {
    std::vector<uint16_t> leads;  // populated leads, ascending
    std::vector<ConfusionMatrix> matrices;
    std::vector<ScoreSet> by_lead;
    ConfusionMatrix pooled_24;  // leads 1..24
    ConfusionMatrix pooled_60;  // leads 1..60
    ScoreSet summary_24;
    ScoreSet summary_60;
    AggregateMode aggregate = AggregateMode::kPooled;
};

namespace detail {

// Unweighted mean of each metric over the leads where it is defined.
inline ScoreSet mean_scores(const std::vector<uint16_t>& leads,
                            const std::vector<ScoreSet>& sets, uint16_t max_lead) {
    ScoreSet out;
    const auto fold = [&](Metric ScoreSet::* field) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < leads.size(); ++i) {
            if (leads[i] > max_lead) continue;
            const Metric& mv = sets[i].*field;
            if (mv.defined) {
                sum += mv.value;
                ++count;
            }
        }
        out.*field = count ? defined_metric(sum / static_cast<double>(count)) : Metric{};
    };
    fold(&ScoreSet::pod);
    fold(&ScoreSet::far_paper);
    fold(&ScoreSet::far_conventional);
    fold(&ScoreSet::ets);
    fold(&ScoreSet::hss);
    return out;
}

}  // namespace detail

inline LeadtimeReport score_by_leadtime(const std::vector<PredictionRecord>& records,
                                        AggregateMode aggregate = AggregateMode::kPooled) {
    if (records.empty()) throw DataError("no forecast/observation pairs to score");
    std::map<uint16_t, ConfusionMatrix> per_lead;
    for (const PredictionRecord& r : records) {
        if (r.lead_hour < 1) throw InputError("lead hour must be >= 1");
        per_lead[r.lead_hour].add(r.forecast_label, r.observed_label);
    }
    LeadtimeReport rep;
    rep.aggregate = aggregate;
    for (const auto& [lead, m] : per_lead) {
        rep.leads.push_back(lead);
        rep.matrices.push_back(m);
        rep.by_lead.push_back(scores(m));
        if (lead <= 24) rep.pooled_24 += m;
        if (lead <= 60) rep.pooled_60 += m;
    }
    if (aggregate == AggregateMode::kPooled) {
        rep.summary_24 = scores(rep.pooled_24);
        rep.summary_60 = scores(rep.pooled_60);
    } else {
        rep.summary_24 = detail::mean_scores(rep.leads, rep.by_lead, 24);
        rep.summary_60 = detail::mean_scores(rep.leads, rep.by_lead, 60);
    }
    return rep;
}

// Horizontal visibility implied by surface temperature, dewpoint, and
// relative humidity: 1.609 * 6000 * (t - td) / rh^1.75, in kilometres.
// The dewpoint depression uses a temperature difference, so Celsius and
// Kelvin inputs give identical results. Saturated or supersaturated air
// clamps to the depression floor; visibility is capped at 100 km.
inline constexpr double kFslCapKm = 100.0;

inline double fsl_visibility_km(double temp, double dewpoint, double rh_percent) {
    if (!std::isfinite(temp) || !std::isfinite(dewpoint) || !std::isfinite(rh_percent)) {
        throw InputError("visibility baseline inputs must be finite");
    }
    if (rh_percent <= 0.0) {
        throw InputError("relative humidity must be positive");
    }
    const double rh = std::min(rh_percent, 100.0);
    const double depression = std::max(0.0, temp - dewpoint);
    const double km = 1.609 * 6000.0 * depression / std::pow(rh, 1.75);
    return std::min(km, kFslCapKm);
}

inline const std::string kPredictionHeader =
    "station_id,launch_utc,lead_hour,probability,forecast_label,observed_label";

inline void write_predictions(const std::vector<PredictionRecord>& records, std::ostream& os) {
    os << kPredictionHeader << '\n';
    for (const PredictionRecord& r : records) {
        os << r.station_id << ',' << r.launch.iso8601() << ',' << r.lead_hour << ','
           << format_double(r.probability) << ',' << r.forecast_label << ','
           << r.observed_label << '\n';
    }
    if (!os) throw IoError("failed to write predictions");
}

// Pairing rows carry no probability; external forecasts supply labels only.
inline const std::string kPairingHeader =
    "station_id,launch_utc,lead_hour,forecast_label,observed_label";

// Accepts either the native prediction CSV or the probability-free pairing
// CSV for externally produced forecasts. Pairing rows take their forecast
// label as the probability, so re-thresholding reproduces the labels.
inline std::vector<PredictionRecord> read_predictions(std::istream& is,
                                                      const std::string& source) {
    const std::istream::pos_type start = is.tellg();
    std::string header;
    if (std::getline(is, header)) {
        if (!header.empty() && header.back() == '\r') header.pop_back();
        is.clear();
        is.seekg(start);
    } else {
        is.clear();
    }
    const bool pairing = header == kPairingHeader;
    CsvReader reader(is, pairing ? kPairingHeader : kPredictionHeader, source);
    std::vector<PredictionRecord> records;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        reader.expect_fields(fields, pairing ? 5 : 6);
        PredictionRecord r;
        r.station_id = fields[0];
        if (r.station_id.empty()) reader.fail("station id must not be empty");
        try {
            r.launch = UtcTime::parse(fields[1]);
        } catch (const Error& e) {
            reader.fail(e.what());
        }
        const long lead = reader.parse_long(fields[2], "lead_hour");
        if (lead < 1 || lead > 65535) reader.fail("lead hour out of range");
        r.lead_hour = static_cast<uint16_t>(lead);
        std::size_t col = 3;
        if (!pairing) {
            r.probability = reader.parse_double(fields[col++], "probability");
            if (!(r.probability >= 0.0 && r.probability <= 1.0)) {
                reader.fail("probability must be in [0, 1]");
            }
        }
        const long f = reader.parse_long(fields[col], "forecast_label");
        const long o = reader.parse_long(fields[col + 1], "observed_label");
        if ((f != 0 && f != 1) || (o != 0 && o != 1)) reader.fail("labels must be 0 or 1");
        r.forecast_label = static_cast<int>(f);
        r.observed_label = static_cast<int>(o);
        if (pairing) r.probability = static_cast<double>(f);
        records.push_back(std::move(r));
    }
    return records;
}

inline std::vector<PredictionRecord> read_predictions_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    return read_predictions(is, path);
}

// Re-derives the observed labels by joining each prediction with the
// observation at its valid time. Predictions without a matching labelable
// observation are dropped and counted in `unmatched`.
inline std::vector<PredictionRecord> join_observed_labels(
    const std::vector<PredictionRecord>& records, const ObservationTable& obs,
    const LabelPolicy& policy, std::size_t& unmatched) {
    std::vector<PredictionRecord> out;
    unmatched = 0;
    for (const PredictionRecord& r : records) {
        if (!obs.has_station(r.station_id)) {
            ++unmatched;
            continue;
        }
        const uint32_t si = obs.station_index(r.station_id);
        const ObservationRow* row =
            obs.find(si, r.launch.plus_hours(static_cast<int64_t>(r.lead_hour)));
        if (row == nullptr || is_missing(row->visibility_km) ||
            policy.excludes(row->visibility_km, row->has_weather_code, row->weather_code)) {
            ++unmatched;
            continue;
        }
        PredictionRecord joined = r;
        joined.observed_label =
            label_from_visibility(row->visibility_km, policy.threshold_km);
        out.push_back(std::move(joined));
    }
    return out;
}

namespace detail {

inline std::string metric_cell(const Metric& m) {
    return m.defined ? format_double(m.value) : std::string("NA");
}

inline void report_row(std::ostream& os, const std::string& label, const ConfusionMatrix& m,
                       const ScoreSet& s) {
    os << label << ',' << m.a << ',' << m.b << ',' << m.c << ',' << m.d << ','
       << metric_cell(s.pod) << ',' << metric_cell(s.far_paper) << ','
       << metric_cell(s.far_conventional) << ',' << metric_cell(s.ets) << ','
       << metric_cell(s.hss) << '\n';
}

}  // namespace detail

inline const std::string kReportHeader =
    "lead_hour,a,b,c,d,pod,far_paper,far_conventional,ets,hss";

// Per-lead rows for the populated leads, then two summary rows. Summary
// labels carry the aggregation mode; counts are always the pooled counts.
inline void write_report(const LeadtimeReport& rep, std::ostream& os) {
    os << kReportHeader << '\n';
    for (std::size_t i = 0; i < rep.leads.size(); ++i) {
        detail::report_row(os, std::to_string(rep.leads[i]), rep.matrices[i], rep.by_lead[i]);
    }
    const bool pooled = rep.aggregate == AggregateMode::kPooled;
    detail::report_row(os, pooled ? "pooled_24" : "mean_24", rep.pooled_24, rep.summary_24);
    detail::report_row(os, pooled ? "pooled_60" : "mean_60", rep.pooled_60, rep.summary_60);
    if (!os) throw IoError("failed to write report");
}

inline void write_report_file(const LeadtimeReport& rep, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_report(rep, os);
    if (!os.flush()) throw IoError("failed to flush '" + path + "'");
}

}  // namespace fogcast

#endif  // FOGCAST_VERIFY_HPP
