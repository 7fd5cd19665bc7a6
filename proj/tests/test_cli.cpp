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

#include <filesystem>
#include <fstream>
#include <string>

#include "helpers.hpp"

using namespace fogcast;
using fogtest::CliResult;
using fogtest::read_file;
using fogtest::run_cli;
using fogtest::TempDir;
using fogtest::write_file;

namespace {

bool file_exists(const std::string& path) {
    return std::filesystem::exists(path);
}

std::string first_line(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

// Value of a "key=value" token in a space-separated status line.
std::string token_after(const std::string& text, const std::string& key) {
    const std::size_t pos = text.find(key);
    if (pos == std::string::npos) return {};
    const std::size_t start = pos + key.size();
    const std::size_t end = text.find_first_of(" \n", start);
    return text.substr(start, end == std::string::npos ? end : end - start);
}

void write_pairing_csv(const std::string& path, int a, int b, int c, int d) {
    std::string text = kPairingHeader + "\n";
    int minute = 0;
    const auto rows = [&](int n, int f, int o) {
        for (int i = 0; i < n; ++i) {
            text += "S001,2015-03-0" + std::to_string(1 + minute % 9) + "T00:00:00Z,6," +
                    std::to_string(f) + "," + std::to_string(o) + "\n";
            ++minute;
        }
    };
    rows(a, 1, 1);
    rows(b, 1, 0);
    rows(c, 0, 1);
    rows(d, 0, 0);
    write_file(path, text);
}

}  // namespace

TEST_CASE("the version flag reports tool and format versions", "[cli]") {
    TempDir td;
    const CliResult r = run_cli("--version", td.dir());
    CHECK(r.status == 0);
    CHECK(r.out.find("fogcast 1.0.0") != std::string::npos);
    CHECK(r.out.find("FOGD 1") != std::string::npos);
}

TEST_CASE("the pipeline runs end to end and reruns are byte-identical", "[cli]") {
    TempDir td;
    const auto run_pipeline = [&](const std::string& name) {
        const std::string dir = td.file(name);
        std::filesystem::create_directories(dir);
        const std::string synth_dir = dir + "/inputs";
        CliResult r = run_cli("synth --out-dir " + synth_dir +
                                  " --seed 5 --stations 4 --launch-days 20",
                              td.dir());
        REQUIRE(r.status == 0);
        CHECK(r.out.find("synthesized") != std::string::npos);
        REQUIRE(file_exists(synth_dir + "/truth.json"));

        r = run_cli("ingest --obs " + synth_dir + "/observations.csv --grid " + synth_dir +
                        "/grid.csv --catalog " + synth_dir + "/catalog.txt --out " + dir +
                        "/data.fogd",
                    td.dir());
        REQUIRE(r.status == 0);
        CHECK(r.out.find("ingested") != std::string::npos);

        r = run_cli("tlca --dataset " + dir + "/data.fogd --out " + dir +
                        "/corr.csv --months all --binary-target",
                    td.dir());
        REQUIRE(r.status == 0);
        REQUIRE(file_exists(dir + "/corr.csv.predictors.csv"));

        r = run_cli("featurize --dataset " + dir + "/data.fogd --predictors " + dir +
                        "/corr.csv.predictors.csv --out " + dir + "/features.fogf",
                    td.dir());
        REQUIRE(r.status == 0);

        r = run_cli("train --features " + dir + "/features.fogf --train-years 2015 --out " +
                        dir + "/model.fogm --objective focal:0.2:2 --rounds 25 --seed 3",
                    td.dir());
        REQUIRE(r.status == 0);
        CHECK(r.out.find("trained") != std::string::npos);

        r = run_cli("predict --model " + dir + "/model.fogm --features " + dir +
                        "/features.fogf --out " + dir + "/predictions.csv",
                    td.dir());
        REQUIRE(r.status == 0);

        r = run_cli("evaluate --pred " + dir + "/predictions.csv --out " + dir +
                        "/report.csv --obs " + synth_dir + "/observations.csv",
                    td.dir());
        REQUIRE(r.status == 0);
        CHECK(r.out.find("pooled_60:") != std::string::npos);
        CHECK(r.out.find("pod=") != std::string::npos);
        return dir;
    };

    const std::string a = run_pipeline("runA");
    const std::string b = run_pipeline("runB");

    CHECK(first_line(read_file(a + "/report.csv")) == kReportHeader);
    const std::string cfg = read_file(a + "/data.fogd.run.cfg");
    CHECK(cfg.find("command=ingest") != std::string::npos);

    for (const char* name : {"/data.fogd", "/corr.csv", "/corr.csv.predictors.csv",
                             "/features.fogf", "/model.fogm", "/predictions.csv",
                             "/report.csv"}) {
        CAPTURE(name);
        CHECK(read_file(a + name) == read_file(b + name));
    }
}

TEST_CASE("failures emit a machine-readable error and leave no output behind", "[cli]") {
    TempDir td;

    SECTION("a missing input reports an io error") {
        const CliResult r = run_cli(
            "tlca --dataset " + td.file("absent.fogd") + " --out " + td.file("corr.csv"),
            td.dir());
        CHECK(r.status == 1);
        CHECK(r.err.find("\"error\": \"io\"") != std::string::npos);
        CHECK_FALSE(file_exists(td.file("corr.csv")));
    }

    SECTION("a bad objective descriptor reports a config error") {
        write_features_file(fogtest::make_rule_matrix(60, 0.7, 1), td.file("f.fogf"));
        const CliResult r = run_cli("train --features " + td.file("f.fogf") + " --out " +
                                        td.file("m.fogm") + " --objective bogus",
                                    td.dir());
        CHECK(r.status == 1);
        CHECK(r.err.find("\"error\": \"config\"") != std::string::npos);
        CHECK_FALSE(file_exists(td.file("m.fogm")));
    }

    SECTION("an evaluation with no usable rows reports a data error") {
        write_file(td.file("obs.csv"),
                   "station_id,lat,lon,time_utc,visibility_km,present_weather\n"
                   "S001,30,120,2015-03-02T06:00:00Z,5.0,\n");
        PredictionRecord rec;
        rec.station_id = "S999";
        rec.launch = UtcTime::from_civil(2015, 3, 2, 0, 0, 0);
        rec.lead_hour = 6;
        rec.probability = 0.9;
        rec.forecast_label = 1;
        rec.observed_label = 0;
        std::ofstream os(td.file("pred.csv"), std::ios::binary);
        write_predictions({rec}, os);
        REQUIRE(os.flush());
        os.close();
        const CliResult r = run_cli("evaluate --pred " + td.file("pred.csv") + " --out " +
                                        td.file("report.csv") + " --obs " + td.file("obs.csv"),
                                    td.dir());
        CHECK(r.status == 1);
        CHECK(r.err.find("\"error\": \"data\"") != std::string::npos);
        CHECK_FALSE(file_exists(td.file("report.csv")));
    }
}

TEST_CASE("both false-alarm conventions are reported from the same counts", "[cli]") {
    TempDir td;
    write_pairing_csv(td.file("pairing.csv"), 2, 3, 1, 4);

    const CliResult paper = run_cli("evaluate --pred " + td.file("pairing.csv") + " --out " +
                                        td.file("r1.csv") + " --far paper",
                                    td.dir());
    REQUIRE(paper.status == 0);
    CHECK(token_after(paper.out, "pod=") == "0.666667");
    CHECK(token_after(paper.out, "far=") == "0.5");
    CHECK(token_after(paper.out, "ets=") == "0.111111");
    CHECK(token_after(paper.out, "hss=") == "0.2");

    const CliResult conv = run_cli("evaluate --pred " + td.file("pairing.csv") + " --out " +
                                       td.file("r2.csv") + " --far conventional",
                                   td.dir());
    REQUIRE(conv.status == 0);
    CHECK(token_after(conv.out, "far=") == "0.6");
    CHECK(token_after(conv.out, "pod=") == token_after(paper.out, "pod="));

    // The convention only selects the summary line; the report carries both.
    CHECK(read_file(td.file("r1.csv")) == read_file(td.file("r2.csv")));

    const CliResult bad = run_cli("evaluate --pred " + td.file("pairing.csv") + " --out " +
                                      td.file("r3.csv") + " --far sideways",
                                  td.dir());
    CHECK(bad.status == 1);
    CHECK(bad.err.find("\"error\": \"config\"") != std::string::npos);
}

TEST_CASE("baseline forecasts evaluate identically with embedded or re-derived labels",
          "[cli]") {
    TempDir td;
    const std::string synth_dir = td.file("inputs");
    CliResult r = run_cli("synth --out-dir " + synth_dir +
                              " --seed 7 --stations 3 --launch-days 10 --grid-lat 2 "
                              "--grid-lon 2 --horizon 12",
                          td.dir());
    REQUIRE(r.status == 0);
    r = run_cli("ingest --obs " + synth_dir + "/observations.csv --grid " + synth_dir +
                    "/grid.csv --catalog " + synth_dir + "/catalog.txt --out " +
                    td.file("data.fogd"),
                td.dir());
    REQUIRE(r.status == 0);

    r = run_cli("baseline fsl --dataset " + td.file("data.fogd") + " --out " +
                    td.file("base.csv"),
                td.dir());
    REQUIRE(r.status == 0);
    CHECK(r.out.find("baseline forecast") != std::string::npos);

    const CliResult own = run_cli("evaluate --pred " + td.file("base.csv") + " --out " +
                                      td.file("own.csv"),
                                  td.dir());
    REQUIRE(own.status == 0);
    const CliResult joined = run_cli("evaluate --pred " + td.file("base.csv") + " --out " +
                                         td.file("joined.csv") + " --obs " + synth_dir +
                                         "/observations.csv",
                                     td.dir());
    REQUIRE(joined.status == 0);
    CHECK(read_file(td.file("own.csv")) == read_file(td.file("joined.csv")));
}

TEST_CASE("the ablation grid labels objectives and strategies", "[cli]") {
    TempDir td;
    write_features_file(fogtest::make_rule_matrix(800, 0.8, 11), td.file("train.fogf"));
    write_features_file(fogtest::make_rule_matrix(300, 0.8, 12), td.file("test.fogf"));
    write_file(td.file("plan.json"),
               "{\n"
               "  \"train\": \"" + td.file("train.fogf") + "\",\n"
               "  \"test\": \"" + td.file("test.fogf") + "\",\n"
               "  \"objectives\": [\"ce\", \"focal:0.2:2\"],\n"
               "  \"strategies\": [{\"members\": 0},\n"
               "                   {\"members\": 2, \"strategy\": \"undersample\","
               " \"ratio\": 0.5}]\n"
               "}\n");

    const CliResult r = run_cli("ablate --plan " + td.file("plan.json") + " --out " +
                                    td.file("grid.csv") +
                                    " --rounds 5 --min-samples-leaf 5",
                                td.dir());
    REQUIRE(r.status == 0);
    CHECK(r.out.find("4 variants") != std::string::npos);
    const std::string csv = read_file(td.file("grid.csv"));
    CHECK(first_line(csv) ==
          "label,predictor_set,objective,strategy,members,ratio,trees,"
          "pod,far_paper,far_conventional,ets,hss");
    CHECK(csv.find("Cross Entropy") != std::string::npos);
    CHECK(csv.find("Focal Loss (0.2, 2)") != std::string::npos);
    CHECK(csv.find("Easy-ensemble & under-sample") != std::string::npos);

    const CliResult conflict = run_cli("ablate --plan " + td.file("plan.json") +
                                           " --objectives ce --train " + td.file("train.fogf") +
                                           " --test " + td.file("test.fogf") + " --out " +
                                           td.file("x.csv"),
                                       td.dir());
    CHECK(conflict.status == 1);
    CHECK(conflict.err.find("\"error\": \"config\"") != std::string::npos);
}

TEST_CASE("month lists and month ranges select the same analysis window", "[cli]") {
    TempDir td;
    const std::string synth_dir = td.file("inputs");
    CliResult r = run_cli("synth --out-dir " + synth_dir +
                              " --seed 21 --stations 2 --launch-days 70 --grid-lat 2 "
                              "--grid-lon 2 --horizon 12",
                          td.dir());
    REQUIRE(r.status == 0);
    r = run_cli("ingest --obs " + synth_dir + "/observations.csv --grid " + synth_dir +
                    "/grid.csv --catalog " + synth_dir + "/catalog.txt --out " +
                    td.file("data.fogd"),
                td.dir());
    REQUIRE(r.status == 0);

    const CliResult range = run_cli("tlca --dataset " + td.file("data.fogd") + " --out " +
                                        td.file("c1.csv") + " --months 3-7",
                                    td.dir());
    REQUIRE(range.status == 0);
    const CliResult list = run_cli("tlca --dataset " + td.file("data.fogd") + " --out " +
                                       td.file("c2.csv") + " --months 3,4,5,6,7",
                                   td.dir());
    REQUIRE(list.status == 0);
    CHECK(read_file(td.file("c1.csv")) == read_file(td.file("c2.csv")));
    CHECK(read_file(td.file("c1.csv.predictors.csv")) ==
          read_file(td.file("c2.csv.predictors.csv")));
}

TEST_CASE("config files supply subcommand defaults", "[cli]") {
    TempDir td;
    const std::string out_dir = td.file("generated");
    write_file(td.file("run.ini"),
               "[synth]\n"
               "out-dir=" + out_dir + "\n"
               "seed=9\n"
               "stations=2\n"
               "launch-days=3\n"
               "grid-lat=2\n"
               "grid-lon=2\n"
               "horizon=12\n");
    const CliResult r = run_cli("--config " + td.file("run.ini") + " synth", td.dir());
    REQUIRE(r.status == 0);
    REQUIRE(file_exists(out_dir + "/truth.json"));
    CHECK(read_file(out_dir + "/truth.json").find("\"seed\": 9") != std::string::npos);
}
