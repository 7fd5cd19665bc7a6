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
#ifndef FOGCAST_IDW_HPP
#define FOGCAST_IDW_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "fogcast/common.hpp"
#include "fogcast/geo.hpp"

namespace fogcast {

struct IdwConfig {
    double power = 2.0;        // weight = distance^(-power)
    unsigned neighbors = 4;    // k nearest non-missing nodes
    double zero_epsilon_m = 1e-6;  // below this distance the node value is exact

    void validate() const {
        if (!(power > 0.0)) throw ConfigError("idw: power must be > 0");
        if (neighbors < 1) throw ConfigError("idw: neighbors must be >= 1");
        if (!(zero_epsilon_m > 0.0)) throw ConfigError("idw: epsilon must be > 0");
    }
};

// Node visitation order for one fixed target over a fixed node set: indices
// sorted by (great-circle distance, node index). Reused across many fields
// sharing the same geometry.
class IdwPlan {
  public:
    IdwPlan(const std::vector<double>& node_lats, const std::vector<double>& node_lons,
            double target_lat, double target_lon) {
        const std::size_t n = node_lats.size();
        dist_km_.resize(n);
        order_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            dist_km_[i] = great_circle_km(target_lat, target_lon, node_lats[i], node_lons[i]);
            order_[i] = i;
        }
        std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            if (dist_km_[a] != dist_km_[b]) return dist_km_[a] < dist_km_[b];
            return a < b;
        });
    }

    const std::vector<std::size_t>& order() const { return order_; }
    double distance_km(std::size_t node) const { return dist_km_[node]; }

  private:
    std::vector<double> dist_km_;
    std::vector<std::size_t> order_;
};

// Inverse-distance-weighted value at the plan's target. `values` is indexed
// by node; missing nodes are skipped. Requires at least cfg.neighbors
// non-missing nodes.
template <typename ValueAt>
inline double idw_from_plan(const IdwPlan& plan, ValueAt&& value_at, const IdwConfig& cfg) {
    const double eps_km = cfg.zero_epsilon_m / 1000.0;
    double num = 0.0;
    double den = 0.0;
    unsigned used = 0;
    for (std::size_t node : plan.order()) {
        const double v = value_at(node);
        if (is_missing(v)) continue;
        const double d = plan.distance_km(node);
        if (d < eps_km) return v;
        const double w = std::pow(d, -cfg.power);
        num += w * v;
        den += w;
        if (++used == cfg.neighbors) break;
    }
    if (used < cfg.neighbors) {
        throw DataError("idw: fewer than " + std::to_string(cfg.neighbors) +
                        " non-missing nodes available");
    }
    return num / den;
}

// One-shot interpolation over explicit node arrays.
inline double idw_interpolate(const std::vector<double>& node_lats,
                              const std::vector<double>& node_lons,
                              const std::vector<double>& values,
                              double target_lat, double target_lon,
                              const IdwConfig& cfg) {
    cfg.validate();
    if (node_lats.size() != node_lons.size() || node_lats.size() != values.size()) {
        throw InputError("idw: node arrays must have equal lengths");
    }
    IdwPlan plan(node_lats, node_lons, target_lat, target_lon);
    return idw_from_plan(plan, [&](std::size_t i) { return values[i]; }, cfg);
}

}  // namespace fogcast

#endif  // FOGCAST_IDW_HPP
