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
#ifndef FOGCAST_ENSEMBLE_HPP
#define FOGCAST_ENSEMBLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fogcast/binio.hpp"
#include "fogcast/common.hpp"
#include "fogcast/featurize.hpp"
#include "fogcast/gbdt.hpp"
#include "fogcast/rng.hpp"

namespace fogcast {

enum class BalanceMode : uint8_t { kNone = 0, kUndersample = 1, kOversample = 2 };

inline std::string balance_mode_name(BalanceMode mode) {
    switch (mode) {
        case BalanceMode::kNone: return "none";
        case BalanceMode::kUndersample: return "undersample";
        case BalanceMode::kOversample: return "oversample";
    }
    throw ConfigError("unknown balance mode");
}

inline BalanceMode parse_balance_mode(const std::string& name) {
    if (name == "none") return BalanceMode::kNone;
    if (name == "undersample") return BalanceMode::kUndersample;
    if (name == "oversample") return BalanceMode::kOversample;
    throw ConfigError("unknown balance mode '" + name + "'");
}

struct EnsembleConfig {
    unsigned n_members = 10;
    BalanceMode balance = BalanceMode::kUndersample;
    double target_fog_ratio = 0.1;
    double threshold = 0.5;
    uint64_t seed = 0;

    void validate() const {
        if (n_members < 1) throw ConfigError("ensemble: member count must be >= 1");
        if (balance != BalanceMode::kNone &&
            !(target_fog_ratio > 0.0 && target_fog_ratio < 1.0)) {
            throw ConfigError("ensemble: target fog ratio must be in (0, 1)");
        }
        if (!(threshold >= 0.0 && threshold <= 1.0)) {
            throw ConfigError("ensemble: decision threshold must be in [0, 1]");
        }
    }
};

// Training rows for one member: its round-robin shard of the fog-free rows
// (positions i, i+N, i+2N, ... in row order) plus all fog rows, then any
// oversampling duplicates. Rebalancing only ever moves the fog fraction up
// toward the target; subsets whose natural fraction already meets it are
// left alone. Indices come back sorted ascending (duplicates adjacent), so
// a single member with no resampling reproduces the input row order.
inline std::vector<std::size_t> member_rows(const FeatureMatrix& fm, unsigned member,
                                            const EnsembleConfig& cfg) {
    cfg.validate();
    if (member >= cfg.n_members) throw ConfigError("ensemble: member index out of range");
    std::vector<std::size_t> fog, ff;
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        (fm.labels[i] ? fog : ff).push_back(i);
    }
    std::vector<std::size_t> shard;
    for (std::size_t j = member; j < ff.size(); j += cfg.n_members) shard.push_back(ff[j]);

    const double f = static_cast<double>(fog.size());
    const double r = cfg.target_fog_ratio;
    Rng rng(cfg.seed ^ static_cast<uint64_t>(member));

    std::vector<std::size_t> rows;
    if (cfg.balance == BalanceMode::kUndersample && !fog.empty() &&
        f / (f + static_cast<double>(shard.size())) < r) {
        const auto keep = static_cast<std::size_t>(std::floor(f * (1.0 - r) / r));
        const std::vector<uint64_t> picks =
            rng.sample_without_replacement(shard.size(), keep);
        rows.reserve(keep + fog.size());
        for (uint64_t p : picks) rows.push_back(shard[p]);
        rows.insert(rows.end(), fog.begin(), fog.end());
    } else {
        rows.reserve(shard.size() + fog.size());
        rows.insert(rows.end(), shard.begin(), shard.end());
        rows.insert(rows.end(), fog.begin(), fog.end());
        if (cfg.balance == BalanceMode::kOversample && !fog.empty() && !shard.empty() &&
            f / (f + static_cast<double>(shard.size())) < r) {
            const auto want = static_cast<std::size_t>(
                std::ceil(static_cast<double>(shard.size()) * r / (1.0 - r)));
            for (std::size_t k = fog.size(); k < want; ++k) {
                rows.push_back(fog[rng.uniform(fog.size())]);
            }
        }
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

struct EnsembleModel {
    EnsembleConfig config;
    std::vector<BoostedModel> members;

    const std::vector<std::string>& manifest() const {
        if (members.empty()) throw DataError("ensemble has no members");
        return members.front().manifest;
    }

    double predict_proba(const float* row) const {
        if (members.empty()) throw DataError("ensemble has no members");
        double sum = 0.0;
        for (const BoostedModel& m : members) sum += m.predict_proba(row);
        return sum / static_cast<double>(members.size());
    }
};

inline int classify(double probability, double threshold = 0.5) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw ConfigError("classification threshold must be in [0, 1]");
    }
    if (!(probability >= 0.0 && probability <= 1.0)) {
        throw InputError("classify: probability must be in [0, 1]");
    }
    return probability >= threshold ? 1 : 0;
}

inline EnsembleModel train_ensemble(const FeatureMatrix& train_fm, const FeatureMatrix* val_fm,
                                    const Objective& objective, const GbdtConfig& gbdt_cfg,
                                    const EnsembleConfig& ens_cfg) {
    ens_cfg.validate();
    train_fm.validate();
    EnsembleModel model;
    model.config = ens_cfg;
    for (unsigned m = 0; m < ens_cfg.n_members; ++m) {
        try {
            const std::vector<std::size_t> rows = member_rows(train_fm, m, ens_cfg);
            FeatureMatrix sub;
            sub.manifest = train_fm.manifest;
            sub.station_ids = train_fm.station_ids;
            sub.reserve_rows(rows.size());
            for (std::size_t r : rows) sub.append_row_from(train_fm, r);
            GbdtConfig member_cfg = gbdt_cfg;
            member_cfg.seed = ens_cfg.seed ^ static_cast<uint64_t>(m);
            model.members.push_back(train(sub, val_fm, objective, member_cfg));
        } catch (const Error& e) {
            throw DataError("ensemble member " + std::to_string(m) + ": " + e.what());
        }
    }
    return model;
}

namespace detail {

inline uint64_t fnv1a64(const std::string& bytes) {
    uint64_t hash = 1469598103934665603ULL;
    for (const char c : bytes) {
        hash ^= static_cast<uint8_t>(c);
        hash *= 1099511628211ULL;
    }
    return hash;
}

}  // namespace detail

inline constexpr char kFogeMagic[4] = {'F', 'O', 'G', 'E'};
inline constexpr uint16_t kFogeVersion = 1;

// Container: header, then one length-prefixed model-file block per member
// with an FNV-1a fingerprint so corruption is detected before parsing.
inline void write_ensemble(const EnsembleModel& model, std::ostream& os) {
    if (model.members.empty()) throw DataError("ensemble has no members");
    binio::write_magic(os, kFogeMagic);
    binio::write_le<uint16_t>(os, kFogeVersion);
    binio::write_le<uint16_t>(os, static_cast<uint16_t>(model.members.size()));
    binio::write_le<uint8_t>(os, static_cast<uint8_t>(model.config.balance));
    binio::write_le<double>(os, model.config.target_fog_ratio);
    binio::write_le<double>(os, model.config.threshold);
    binio::write_le<uint64_t>(os, model.config.seed);
    for (const BoostedModel& member : model.members) {
        std::ostringstream block;
        save_model(member, block);
        const std::string bytes = block.str();
        binio::write_le<uint64_t>(os, bytes.size());
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        binio::write_le<uint64_t>(os, detail::fnv1a64(bytes));
    }
    if (!os) throw IoError("failed to write ensemble");
}

inline EnsembleModel read_ensemble(std::istream& is) {
    binio::expect_magic(is, kFogeMagic, "FOGE");
    binio::expect_version(is, kFogeVersion, "FOGE");
    EnsembleModel model;
    const auto count = binio::read_le<uint16_t>(is, "member count");
    if (count == 0) throw FormatError("ensemble file has no members");
    const auto mode = binio::read_le<uint8_t>(is, "balance mode");
    if (mode > 2) throw FormatError("ensemble file: bad balance mode");
    model.config.balance = static_cast<BalanceMode>(mode);
    model.config.target_fog_ratio = binio::read_le<double>(is, "target ratio");
    model.config.threshold = binio::read_le<double>(is, "threshold");
    model.config.seed = binio::read_le<uint64_t>(is, "seed");
    model.config.n_members = count;
    for (uint16_t m = 0; m < count; ++m) {
        const auto len = binio::read_le<uint64_t>(is, "member length");
        std::string bytes(static_cast<std::size_t>(len), '\0');
        is.read(bytes.data(), static_cast<std::streamsize>(len));
        if (is.gcount() != static_cast<std::streamsize>(len)) {
            throw FormatError("truncated file while reading ensemble member");
        }
        const auto want = binio::read_le<uint64_t>(is, "member fingerprint");
        if (detail::fnv1a64(bytes) != want) {
            throw FormatError("ensemble member " + std::to_string(m) +
                              " is corrupt (fingerprint mismatch)");
        }
        std::istringstream block(bytes);
        model.members.push_back(load_model(block));
        if (model.members.back().manifest != model.members.front().manifest) {
            throw FormatError("ensemble members disagree on the feature manifest");
        }
    }
    return model;
}

inline void write_ensemble_file(const EnsembleModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_ensemble(model, os);
    if (!os.flush()) throw IoError("failed to flush '" + path + "'");
}

inline EnsembleModel read_ensemble_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    return read_ensemble(is);
}

}  // namespace fogcast

#endif  // FOGCAST_ENSEMBLE_HPP
