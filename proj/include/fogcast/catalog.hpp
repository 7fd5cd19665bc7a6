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
#ifndef FOGCAST_CATALOG_HPP
#define FOGCAST_CATALOG_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fogcast/common.hpp"

namespace fogcast {

// Raw NWP channel registry. Catalog entries of kind raw must use these names.
inline constexpr std::array<const char*, 26> kRawVariables = {
    "DPT_GDS3_HTGL",  "HGT_GDS3_0DEG",  "HGT_GDS3_CEIL",  "HGT_GDS3_HTFL",
    "HGT_GDS3_SFC",   "T_CDC_GDS3_EATM", "H_CDC_GDS3_HCY", "M_CDC_GDS3_MCY",
    "L_CDC_GDS3_MCY", "PLI_GDS3_SPDY",  "LFT_X_GDS3_ISBY", "PRES_GDS3_SFC",
    "PRMSL_GDS3_MSL", "MSLET_GDS3_MSL", "P_WAT_GDS3_EATM", "POP_GDS3_SFC",
    "R_H_GDS3_HTGL",  "R_H_GDS3_HYBL",  "SPF_H_GDS3_HTGL", "SPF_H_GDS3_SPDY",
    "TMP_GDS3_HTGL",  "TMP_GDS3_SFC",   "U_GRD_GDS3_HTGL", "U_GRD_GDS3_SPDY",
    "V_GRD_GDS3_HTGL", "V_GRD_GDS3_SPDY"};

inline bool is_raw_variable(const std::string& name) {
    return std::any_of(kRawVariables.begin(), kRawVariables.end(),
                       [&](const char* v) { return name == v; });
}

// A derived channel is a named composition of raw channels, evaluated
// pointwise after spatial interpolation. Missing input propagates missing.
struct DerivedFormula {
    std::string name;
    std::vector<std::string> inputs;
    double (*eval)(const double*);
};

inline const std::vector<DerivedFormula>& derived_formulas() {
    static const std::vector<DerivedFormula> kFormulas = {
        {"wind_speed",
         {"U_GRD_GDS3_HTGL", "V_GRD_GDS3_HTGL"},
         [](const double* v) { return std::sqrt(v[0] * v[0] + v[1] * v[1]); }},
        {"air_sea_temp_diff",
         {"TMP_GDS3_HTGL", "TMP_GDS3_SFC"},
         [](const double* v) { return v[0] - v[1]; }},
    };
    return kFormulas;
}

inline const DerivedFormula& find_formula(const std::string& name) {
    for (const auto& f : derived_formulas()) {
        if (f.name == name) return f;
    }
    throw ConfigError("unknown derived-channel formula '" + name + "'");
}

// Evaluates a derived channel at one (sample, lead) point. `inputs` must be
// ordered as the formula declares them.
inline double derive_channel(const std::string& formula,
                             const std::vector<double>& inputs) {
    const DerivedFormula& f = find_formula(formula);
    if (inputs.size() != f.inputs.size()) {
        throw ConfigError("derive_channel '" + formula + "': expected " +
                          std::to_string(f.inputs.size()) + " inputs, got " +
                          std::to_string(inputs.size()));
    }
    for (double v : inputs) {
        if (is_missing(v)) return kMissing;
    }
    return f.eval(inputs.data());
}

enum class ChannelKind : uint8_t { kRaw = 0, kDerived = 1 };

struct Channel {
    std::string name;
    ChannelKind kind = ChannelKind::kRaw;
};

// Ordered channel list fixing the variable axis of the dataset tensor.
// Raw names must come from the registry; derived names must be registered
// formulas whose raw inputs are present in the catalog.
class VariableCatalog {
  public:
    VariableCatalog() = default;

    explicit VariableCatalog(std::vector<Channel> channels)
        : channels_(std::move(channels)) {
        for (std::size_t i = 0; i < channels_.size(); ++i) {
            const Channel& c = channels_[i];
            if (c.name.empty()) throw ConfigError("catalog: empty channel name");
            if (index_.count(c.name)) {
                throw ConfigError("catalog: duplicate channel '" + c.name + "'");
            }
            index_.emplace(c.name, i);
            if (c.kind == ChannelKind::kRaw) {
                if (!is_raw_variable(c.name)) {
                    throw ConfigError("catalog: '" + c.name +
                                      "' is not a known raw variable");
                }
            } else {
                find_formula(c.name);
            }
        }
        for (const Channel& c : channels_) {
            if (c.kind != ChannelKind::kDerived) continue;
            for (const std::string& in : find_formula(c.name).inputs) {
                auto it = index_.find(in);
                if (it == index_.end() ||
                    channels_[it->second].kind != ChannelKind::kRaw) {
                    throw ConfigError("catalog: derived channel '" + c.name +
                                      "' requires raw channel '" + in + "'");
                }
            }
        }
    }

    std::size_t size() const { return channels_.size(); }
    const Channel& at(std::size_t m) const { return channels_.at(m); }
    const std::vector<Channel>& channels() const { return channels_; }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    std::size_t index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) {
            throw ConfigError("catalog: unknown channel '" + name + "'");
        }
        return it->second;
    }

    std::vector<std::string> raw_names() const {
        std::vector<std::string> out;
        for (const Channel& c : channels_) {
            if (c.kind == ChannelKind::kRaw) out.push_back(c.name);
        }
        return out;
    }

  private:
    std::vector<Channel> channels_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Catalog file: one channel per line, "raw <name>" or "derived <name>",
// in dataset channel order. Blank lines are ignored.
inline void write_catalog(const VariableCatalog& catalog, std::ostream& os) {
    for (const Channel& c : catalog.channels()) {
        os << (c.kind == ChannelKind::kRaw ? "raw " : "derived ") << c.name << '\n';
    }
    if (!os) throw IoError("failed to write catalog");
}

inline VariableCatalog read_catalog(std::istream& is, const std::string& source = "catalog") {
    std::vector<Channel> channels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t sp = line.find(' ');
        const std::string kind = line.substr(0, sp);
        if (sp == std::string::npos || (kind != "raw" && kind != "derived")) {
            throw InputError(source + ":" + std::to_string(line_no) +
                             ": expected 'raw <name>' or 'derived <name>'");
        }
        channels.push_back(
            {line.substr(sp + 1), kind == "raw" ? ChannelKind::kRaw : ChannelKind::kDerived});
    }
    if (channels.empty()) throw InputError(source + ": no channels");
    return VariableCatalog(std::move(channels));
}

inline void write_catalog_file(const VariableCatalog& catalog, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_catalog(catalog, os);
    if (!os.flush()) throw IoError("failed to flush '" + path + "'");
}

inline VariableCatalog read_catalog_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    return read_catalog(is, path);
}

// 1 iff visibility is at or below the fog threshold (inclusive boundary).
inline int label_from_visibility(double vis_km, double threshold_km = 1.0) {
    if (!std::isfinite(vis_km) || vis_km < 0.0) {
        throw InputError("label_from_visibility: visibility must be finite and >= 0");
    }
    return vis_km <= threshold_km ? 1 : 0;
}

// Labeling policy. In conjunction mode an observation whose visibility is at
// or below the threshold but whose present-weather code falls outside the fog
// code range is excluded (treated as missing), not relabeled fog-free.
struct LabelPolicy {
    double threshold_km = 1.0;
    bool conjunction = false;
    int fog_code_lo = 40;
    int fog_code_hi = 49;

    bool excludes(double vis_km, bool has_code, int code) const {
        if (!conjunction || !has_code) return false;
        if (vis_km > threshold_km) return false;
        return code < fog_code_lo || code > fog_code_hi;
    }
};

}  // namespace fogcast

#endif  // FOGCAST_CATALOG_HPP
