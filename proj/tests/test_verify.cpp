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
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"

using namespace fogcast;

namespace {

ConfusionMatrix matrix_of(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    ConfusionMatrix m;
    m.a = a;
    m.b = b;
    m.c = c;
    m.d = d;
    return m;
}

// Algebraically rearranged score formulas in extended precision. These share
// no intermediate expressions with the library versions, so agreement checks
// both the values and the exact zero-denominator conditions.
struct AltScores {
    Metric pod, far_paper, far_conventional, ets, hss;
};

AltScores alt_scores(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    AltScores s;
    const uint64_t n = a + b + c + d;
    const auto ld = [](uint64_t v) { return static_cast<long double>(v); };
    if (a + c > 0) s.pod = defined_metric(static_cast<double>(ld(a) / ld(a + c)));
    if (a + d > 0) s.far_paper = defined_metric(static_cast<double>(ld(b) / ld(a + d)));
    if (a + b > 0) {
        s.far_conventional = defined_metric(static_cast<double>(ld(b) / ld(a + b)));
    }
    // ETS = (a n - (a+b)(a+c)) / (n (a+b+c) - (a+b)(a+c)).
    const uint64_t fo = (a + b) * (a + c);
    if (n > 0 && n * (a + b + c) != fo) {
        s.ets = defined_metric(static_cast<double>(
            (ld(a) * ld(n) - ld(fo)) / (ld(n) * ld(a + b + c) - ld(fo))));
    }
    // HSS = 2 (ad - bc) / ((a+c)(c+d) + (a+b)(b+d)).
    const uint64_t denom = (a + c) * (c + d) + (a + b) * (b + d);
    if (denom > 0) {
        s.hss = defined_metric(static_cast<double>(
            2.0L * (ld(a) * ld(d) - ld(b) * ld(c)) / ld(denom)));
    }
    return s;
}

void check_metric(const Metric& got, const Metric& want) {
    REQUIRE(got.defined == want.defined);
    if (want.defined) {
        CHECK(std::fabs(got.value - want.value) <=
              1e-12 * std::max(1.0, std::fabs(want.value)));
    }
}

PredictionRecord record(const std::string& station, const std::string& launch,
                        uint16_t lead, double prob, int forecast, int observed) {
    PredictionRecord r;
    r.station_id = station;
    r.launch = UtcTime::parse(launch);
    r.lead_hour = lead;
    r.probability = prob;
    r.forecast_label = forecast;
    r.observed_label = observed;
    return r;
}

}  // namespace

TEST_CASE("confusion counts route by forecast and observation", "[verify]") {
    ConfusionMatrix m;
    m.add(1, 1);
    m.add(1, 0);
    m.add(0, 1);
    m.add(0, 0);
    CHECK(m.a == 1);
    CHECK(m.b == 1);
    CHECK(m.c == 1);
    CHECK(m.d == 1);
    CHECK(m.n() == 4);
    CHECK_THROWS_AS(m.add(2, 0), InputError);
    CHECK_THROWS_AS(m.add(0, -1), InputError);

    std::vector<PredictionRecord> recs = {
        record("S1", "2016-01-01T00:00:00Z", 1, 0.9, 1, 1),
        record("S1", "2016-01-01T00:00:00Z", 2, 0.8, 1, 0),
        record("S1", "2016-01-01T00:00:00Z", 3, 0.2, 0, 1),
    };
    const ConfusionMatrix from_records = confusion(recs);
    CHECK(from_records.a == 1);
    CHECK(from_records.b == 1);
    CHECK(from_records.c == 1);
    CHECK(from_records.d == 0);
}

TEST_CASE("worked example scores match hand arithmetic", "[verify]") {
    const ScoreSet s = scores(matrix_of(2, 3, 1, 4));
    REQUIRE(s.pod.defined);
    REQUIRE(s.far_paper.defined);
    REQUIRE(s.far_conventional.defined);
    REQUIRE(s.ets.defined);
    REQUIRE(s.hss.defined);
    CHECK(std::fabs(s.pod.value - 2.0 / 3.0) < 1e-15);
    CHECK(std::fabs(s.far_paper.value - 0.5) < 1e-15);
    CHECK(std::fabs(s.far_conventional.value - 0.6) < 1e-15);
    CHECK(std::fabs(s.ets.value - 1.0 / 9.0) < 1e-15);
    CHECK(std::fabs(s.hss.value - 0.2) < 1e-15);
    // Six-figure rounded values hold to the coarser published precision.
    CHECK(std::fabs(s.pod.value - 0.666667) <= 1e-6);
    CHECK(std::fabs(s.ets.value - 0.111111) <= 1e-6);
}

TEST_CASE("degenerate matrices disable exactly the right metrics", "[verify]") {
    const ScoreSet perfect = scores(matrix_of(10, 0, 0, 90));
    CHECK(perfect.pod.value == 1.0);
    CHECK(perfect.far_paper.value == 0.0);
    CHECK(perfect.far_conventional.value == 0.0);
    CHECK(perfect.ets.value == 1.0);
    CHECK(perfect.hss.value == 1.0);

    const ScoreSet all_alarm = scores(matrix_of(0, 50, 0, 0));
    CHECK_FALSE(all_alarm.pod.defined);       // no observed events
    CHECK_FALSE(all_alarm.far_paper.defined); // no correct outcomes
    REQUIRE(all_alarm.far_conventional.defined);
    CHECK(all_alarm.far_conventional.value == 1.0);
    REQUIRE(all_alarm.ets.defined);
    CHECK(all_alarm.ets.value == 0.0);
    REQUIRE(all_alarm.hss.defined);
    CHECK(all_alarm.hss.value == 0.0);

    const ScoreSet silent = scores(matrix_of(0, 0, 3, 7));
    CHECK_FALSE(silent.far_conventional.defined);  // no positive forecasts
    CHECK(silent.pod.defined);
    CHECK(silent.pod.value == 0.0);

    const ScoreSet empty = scores(matrix_of(0, 0, 0, 0));
    CHECK_FALSE(empty.pod.defined);
    CHECK_FALSE(empty.far_paper.defined);
    CHECK_FALSE(empty.far_conventional.defined);
    CHECK_FALSE(empty.ets.defined);
    CHECK_FALSE(empty.hss.defined);
}

TEST_CASE("every small confusion matrix agrees with rearranged formulas", "[verify]") {
    for (uint64_t a = 0; a <= 6; ++a) {
        for (uint64_t b = 0; b <= 6; ++b) {
            for (uint64_t c = 0; c <= 6; ++c) {
                for (uint64_t d = 0; d <= 6; ++d) {
                    CAPTURE(a, b, c, d);
                    const ScoreSet got = scores(matrix_of(a, b, c, d));
                    const AltScores want = alt_scores(a, b, c, d);
                    check_metric(got.pod, want.pod);
                    check_metric(got.far_paper, want.far_paper);
                    check_metric(got.far_conventional, want.far_conventional);
                    check_metric(got.ets, want.ets);
                    check_metric(got.hss, want.hss);

                    const bool ets_is_one = got.ets.defined && got.ets.value == 1.0;
                    const bool perfect = b == 0 && c == 0 && a > 0 && d > 0;
                    CHECK(ets_is_one == perfect);
                }
            }
        }
    }
}

TEST_CASE("unskillful random forecasts score near zero on average", "[verify]") {
    Rng rng(301);
    double ets_sum = 0.0, hss_sum = 0.0;
    std::size_t ets_n = 0, hss_n = 0;
    for (int trial = 0; trial < 400; ++trial) {
        ConfusionMatrix m;
        for (int i = 0; i < 2000; ++i) {
            m.add(rng.bernoulli(0.3) ? 1 : 0, rng.bernoulli(0.1) ? 1 : 0);
        }
        const ScoreSet s = scores(m);
        if (s.ets.defined) {
            ets_sum += s.ets.value;
            ++ets_n;
        }
        if (s.hss.defined) {
            hss_sum += s.hss.value;
            ++hss_n;
        }
    }
    REQUIRE(ets_n > 300);
    REQUIRE(hss_n > 300);
    CHECK(std::fabs(ets_sum / static_cast<double>(ets_n)) < 0.02);
    CHECK(std::fabs(hss_sum / static_cast<double>(hss_n)) < 0.02);
}

TEST_CASE("lead-time report pools matrices over lead ranges", "[verify]") {
    std::vector<PredictionRecord> recs;
    Rng rng(302);
    for (uint16_t lead : {30, 1, 12, 24, 25}) {  // unsorted on purpose
        for (int i = 0; i < 40; ++i) {
            recs.push_back(record("S1", "2016-02-01T00:00:00Z", lead, 0.5,
                                  rng.bernoulli(0.4) ? 1 : 0,
                                  rng.bernoulli(0.4) ? 1 : 0));
        }
    }
    const LeadtimeReport rep = score_by_leadtime(recs);
    REQUIRE(rep.leads == std::vector<uint16_t>{1, 12, 24, 25, 30});
    REQUIRE(rep.matrices.size() == 5);
    REQUIRE(rep.by_lead.size() == 5);

    ConfusionMatrix sum24, sum60;
    for (std::size_t i = 0; i < rep.leads.size(); ++i) {
        CHECK(rep.matrices[i].n() == 40);
        if (rep.leads[i] <= 24) sum24 += rep.matrices[i];
        sum60 += rep.matrices[i];
    }
    CHECK(rep.pooled_24.a == sum24.a);
    CHECK(rep.pooled_24.b == sum24.b);
    CHECK(rep.pooled_24.c == sum24.c);
    CHECK(rep.pooled_24.d == sum24.d);
    CHECK(rep.pooled_60.n() == 200);
    CHECK(rep.summary_60.pod.defined);

    // Mean aggregation averages per-lead scores instead of pooling counts.
    const LeadtimeReport mean_rep = score_by_leadtime(recs, AggregateMode::kMean);
    double pod_sum = 0.0;
    for (const ScoreSet& s : mean_rep.by_lead) pod_sum += s.pod.value;
    CHECK(std::fabs(mean_rep.summary_60.pod.value - pod_sum / 5.0) < 1e-15);
    CHECK(mean_rep.pooled_60.n() == 200);  // counts stay pooled

    CHECK_THROWS_AS(score_by_leadtime({}), DataError);
    const std::vector<PredictionRecord> bad = {
        record("S1", "2016-02-01T00:00:00Z", 0, 0.5, 1, 1)};
    CHECK_THROWS_AS(score_by_leadtime(bad), InputError);
}

TEST_CASE("dewpoint-spread visibility matches published points", "[verify]") {
    CHECK(std::fabs(fsl_visibility_km(17.0, 15.0, 95.0) - 6.68) <= 0.01);
    CHECK(fsl_visibility_km(12.0, 12.0, 100.0) == 0.0);
    CHECK(std::fabs(fsl_visibility_km(10.0, 10.0 - 0.32756, 100.0) - 1.0) <= 0.001);
    CHECK(fsl_visibility_km(50.0, 0.0, 30.0) == 100.0);  // capped
    CHECK(fsl_visibility_km(20.0, 15.0, 120.0) == fsl_visibility_km(20.0, 15.0, 100.0));
    CHECK(fsl_visibility_km(10.0, 12.0, 90.0) == 0.0);  // supersaturated air
    // Kelvin and Celsius agree because only the depression enters.
    CHECK(fsl_visibility_km(290.15, 288.15, 95.0) == fsl_visibility_km(17.0, 15.0, 95.0));
    CHECK_THROWS_AS(fsl_visibility_km(17.0, 15.0, 0.0), InputError);
    CHECK_THROWS_AS(fsl_visibility_km(17.0, 15.0, -5.0), InputError);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fsl_visibility_km(nan, 15.0, 95.0), InputError);
    CHECK_THROWS_AS(fsl_visibility_km(17.0, 15.0,
                                      std::numeric_limits<double>::infinity()),
                    InputError);
}

TEST_CASE("visibility is strictly monotone in depression and humidity", "[verify]") {
    // Stay below the cap: depression up to 2 degrees, humidity 50..100.
    for (int j = 0; j < 50; ++j) {
        const double rh = 50.0 + j * (50.0 / 49.0);
        double prev = fsl_visibility_km(0.0, 0.0, rh);
        for (int i = 1; i <= 50; ++i) {
            const double dep = 0.04 * i;
            const double vis = fsl_visibility_km(dep, 0.0, rh);
            CHECK(vis > prev);
            prev = vis;
        }
    }
    for (int i = 1; i <= 50; ++i) {
        const double dep = 0.04 * i;
        double prev = fsl_visibility_km(dep, 0.0, 50.0);
        for (int j = 1; j < 50; ++j) {
            const double rh = 50.0 + j * (50.0 / 49.0);
            const double vis = fsl_visibility_km(dep, 0.0, rh);
            CHECK(vis < prev);
            prev = vis;
        }
    }
}

TEST_CASE("prediction files round-trip and accept the pairing layout", "[verify]") {
    std::vector<PredictionRecord> recs = {
        record("S001", "2016-03-01T00:00:00Z", 1, 0.25, 0, 1),
        record("S002", "2016-03-01T12:00:00Z", 24, 0.875, 1, 0),
    };
    std::stringstream first;
    write_predictions(recs, first);
    const std::vector<PredictionRecord> back = read_predictions(first, "mem");
    REQUIRE(back.size() == 2);
    CHECK(back[0].station_id == "S001");
    CHECK(back[0].launch == recs[0].launch);
    CHECK(back[0].lead_hour == 1);
    CHECK(back[0].probability == 0.25);
    CHECK(back[0].forecast_label == 0);
    CHECK(back[0].observed_label == 1);
    std::stringstream second;
    write_predictions(back, second);
    CHECK(first.str() == second.str());

    const std::string pairing =
        kPairingHeader + "\nS001,2016-03-01T00:00:00Z,3,1,0\nS001,2016-03-01T00:00:00Z,4,0,1\n";
    std::istringstream is(pairing);
    const std::vector<PredictionRecord> pr = read_predictions(is, "pairing");
    REQUIRE(pr.size() == 2);
    CHECK(pr[0].probability == 1.0);  // forecast label doubles as probability
    CHECK(pr[1].probability == 0.0);
    CHECK(pr[0].forecast_label == 1);
    CHECK(pr[1].observed_label == 1);

    const auto reject = [](const std::string& body) {
        std::istringstream bad(kPredictionHeader + "\n" + body);
        return read_predictions(bad, "bad");
    };
    CHECK_THROWS_AS(reject("S1,2016-03-01T00:00:00Z,1,1.5,1,0\n"), InputError);
    CHECK_THROWS_AS(reject("S1,2016-03-01T00:00:00Z,0,0.5,1,0\n"), InputError);
    CHECK_THROWS_AS(reject("S1,2016-03-01T00:00:00Z,1,0.5,2,0\n"), InputError);
    CHECK_THROWS_AS(reject("S1,not-a-time,1,0.5,1,0\n"), InputError);
    CHECK_THROWS_AS(reject(",2016-03-01T00:00:00Z,1,0.5,1,0\n"), InputError);
    std::istringstream wrong_header("foo,bar\n");
    CHECK_THROWS_AS(read_predictions(wrong_header, "bad"), InputError);
}

TEST_CASE("joining observations re-derives labels and counts unmatched rows",
          "[verify]") {
    const std::string obs_csv =
        "station_id,lat,lon,time_utc,visibility_km,present_weather\n"
        "S001,30.0,120.0,2016-03-01T06:00:00Z,0.5,45\n"
        "S001,30.0,120.0,2016-03-01T07:00:00Z,0.9,61\n"
        "S001,30.0,120.0,2016-03-01T08:00:00Z,5.0,\n"
        "S001,30.0,120.0,2016-03-01T09:00:00Z,,\n";
    std::istringstream is(obs_csv);
    const ObservationTable obs = parse_observations(is, "obs.csv");

    const std::vector<PredictionRecord> recs = {
        record("S001", "2016-03-01T00:00:00Z", 6, 0.9, 1, 0),   // fog at valid time
        record("S001", "2016-03-01T00:00:00Z", 7, 0.9, 1, 0),   // drizzle code
        record("S001", "2016-03-01T00:00:00Z", 8, 0.1, 0, 1),   // clear
        record("S001", "2016-03-01T00:00:00Z", 9, 0.1, 0, 0),   // missing visibility
        record("S001", "2016-03-01T00:00:00Z", 10, 0.1, 0, 0),  // no row at all
        record("S999", "2016-03-01T00:00:00Z", 6, 0.1, 0, 0),   // unknown station
    };

    LabelPolicy plain;
    std::size_t unmatched = 0;
    const std::vector<PredictionRecord> joined =
        join_observed_labels(recs, obs, plain, unmatched);
    REQUIRE(joined.size() == 3);
    CHECK(unmatched == 3);
    CHECK(joined[0].observed_label == 1);
    CHECK(joined[1].observed_label == 1);  // visibility rules without conjunction
    CHECK(joined[2].observed_label == 0);
    CHECK(joined[0].probability == 0.9);  // forecasts pass through untouched

    LabelPolicy conjunction;
    conjunction.conjunction = true;
    const std::vector<PredictionRecord> strict =
        join_observed_labels(recs, obs, conjunction, unmatched);
    REQUIRE(strict.size() == 2);  // the drizzle row is excluded, not relabeled
    CHECK(unmatched == 4);
    CHECK(strict[0].observed_label == 1);
    CHECK(strict[1].observed_label == 0);
}

TEST_CASE("report files carry counts, scores, and NA for undefined cells",
          "[verify]") {
    std::vector<PredictionRecord> recs;
    // Lead 1 realizes (2,3,1,4); lead 2 has forecasts but no observed events.
    const int f1[] = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    const int o1[] = {1, 1, 0, 0, 0, 1, 0, 0, 0, 0};
    for (int i = 0; i < 10; ++i) {
        recs.push_back(record("S1", "2016-04-01T00:00:00Z", 1, 0.5, f1[i], o1[i]));
    }
    recs.push_back(record("S1", "2016-04-01T00:00:00Z", 2, 0.5, 0, 0));

    std::ostringstream os;
    write_report(score_by_leadtime(recs), os);
    std::istringstream lines(os.str());
    std::string header, row1, row2, sum24, sum60;
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, row1));
    REQUIRE(std::getline(lines, row2));
    REQUIRE(std::getline(lines, sum24));
    REQUIRE(std::getline(lines, sum60));
    CHECK(header == kReportHeader);
    // Cell values were verified against hand arithmetic above; this pins the
    // row layout and the round-trip float rendering.
    const std::string want_row1 = "1,2,3,1,4," + format_double(2.0 / 3.0) + ",0.5," +
                                  format_double(3.0 / 5.0) + "," +
                                  format_double(0.5 / 4.5) + "," +
                                  format_double((0.6 - 0.5) / 0.5);
    CHECK(row1 == want_row1);
    CHECK(row2.rfind("2,0,0,0,1,NA,0,NA,", 0) == 0);
    CHECK(sum24.rfind("pooled_24,2,3,1,5,", 0) == 0);
    CHECK(sum60.rfind("pooled_60,2,3,1,5,", 0) == 0);

    std::ostringstream om;
    write_report(score_by_leadtime(recs, AggregateMode::kMean), om);
    CHECK(om.str().find("mean_24,") != std::string::npos);
    CHECK(om.str().find("mean_60,") != std::string::npos);
}
