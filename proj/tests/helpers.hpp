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
#ifndef FOGCAST_TESTS_HELPERS_HPP
#define FOGCAST_TESTS_HELPERS_HPP

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogcast/fogcast.hpp"

namespace fogtest {

// Unique scratch directory, removed on destruction.
class TempDir {
  public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("fogcast-test-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string dir() const { return path_.string(); }

  private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path + "'");
    os << content;
    if (!os.flush()) throw std::runtime_error("cannot flush '" + path + "'");
}

struct CliResult {
    int status = -1;
    std::string out;
    std::string err;
};

// Runs the installed CLI binary with shell-level redirection; args must
// already be quoted where needed.
inline CliResult run_cli(const std::string& args, const std::string& workdir) {
    const std::string out_path = workdir + "/.cli_stdout";
    const std::string err_path = workdir + "/.cli_stderr";
    const std::string cmd = std::string(FOGCAST_CLI_PATH) + " " + args + " >" +
                            out_path + " 2>" + err_path;
    const int rc = std::system(cmd.c_str());
    CliResult r;
    if (rc == -1) {
        r.status = -1;
    } else if (WIFEXITED(rc)) {
        r.status = WEXITSTATUS(rc);
    } else {
        r.status = -2;
    }
    r.out = read_file(out_path);
    r.err = read_file(err_path);
    return r;
}

// Dataset skeleton: stations on a short diagonal, launches every 12 hours
// starting 2015-03-02T00Z (inside the default month filter), X/Y all missing
// until the caller fills them.
inline fogcast::Dataset make_dataset(unsigned n_stations, unsigned samples_per_station,
                                     uint16_t horizon,
                                     std::vector<fogcast::Channel> channels) {
    fogcast::Dataset ds;
    ds.catalog = fogcast::VariableCatalog(std::move(channels));
    ds.horizon = horizon;
    for (unsigned s = 0; s < n_stations; ++s) {
        char id[8];
        std::snprintf(id, sizeof(id), "S%03u", s + 1);
        ds.stations.push_back({id, 30.0 + 0.1 * s, 120.0 + 0.1 * s});
    }
    const fogcast::UtcTime start = fogcast::UtcTime::from_civil(2015, 3, 2, 0, 0, 0);
    for (unsigned s = 0; s < n_stations; ++s) {
        for (unsigned i = 0; i < samples_per_station; ++i) {
            fogcast::SampleMeta m;
            m.station = s;
            m.launch = start.plus_hours(12 * i);
            ds.samples.push_back(m);
        }
    }
    ds.allocate();
    return ds;
}

// Feature matrix with one station and distinct launch times per row.
inline fogcast::FeatureMatrix make_matrix(std::vector<std::string> manifest) {
    fogcast::FeatureMatrix fm;
    fm.manifest = std::move(manifest);
    fm.station_ids = {"S001"};
    return fm;
}

inline void add_row(fogcast::FeatureMatrix& fm, const std::vector<float>& vals,
                    int label, float weight = 1.0f) {
    if (vals.size() != fm.cols()) throw std::runtime_error("add_row: width mismatch");
    fm.values.insert(fm.values.end(), vals.begin(), vals.end());
    fm.labels.push_back(static_cast<uint8_t>(label));
    fm.weights.push_back(weight);
    fogcast::RowMeta m;
    m.station = 0;
    m.launch = fogcast::UtcTime::from_civil(2015, 3, 2, 0, 0, 0)
                   .plus_hours(static_cast<std::int64_t>(fm.meta.size()) * 12);
    m.lead = 1;
    fm.meta.push_back(m);
}

// Two-feature matrix: x0 separates the classes at `boundary`, x1 is noise.
inline fogcast::FeatureMatrix make_rule_matrix(std::size_t rows, double boundary,
                                               uint64_t seed) {
    fogcast::FeatureMatrix fm = make_matrix({"x0", "x1"});
    fogcast::Rng rng(seed);
    for (std::size_t i = 0; i < rows; ++i) {
        const float x0 = static_cast<float>(rng.uniform_real());
        const float x1 = static_cast<float>(rng.uniform_real());
        add_row(fm, {x0, x1}, x0 >= boundary ? 1 : 0);
    }
    return fm;
}

}  // namespace fogtest

#endif  // FOGCAST_TESTS_HELPERS_HPP
