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
#ifndef FOGCAST_COMMON_HPP
#define FOGCAST_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fogcast {

// Error taxonomy. Every failure surfaced by the library carries a stable
// kind string so callers (the CLI in particular) can report machine-readable
// diagnostics.
class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

  private:
    std::string kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config", msg) {}
};
struct InputError : Error {
    explicit InputError(const std::string& msg) : Error("input", msg) {}
};
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error("data", msg) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error("numeric", msg) {}
};
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("io", msg) {}
};
// Container/model files with a bad magic, version or truncated body.
struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error("format", msg) {}
};

// Missing-value sentinel. Missing data is always an explicit quiet NaN that
// code must test for with is_missing(); it is never folded into arithmetic.
inline constexpr float kMissing = std::numeric_limits<float>::quiet_NaN();

inline bool is_missing(float v) { return std::isnan(v); }
inline bool is_missing(double v) { return std::isnan(v); }

// A finite, non-missing value. Infinities are rejected everywhere; NaN is
// reserved for the missing sentinel.
inline bool is_valid_value(float v) { return !std::isinf(v); }

// Locale-independent float formatting that round-trips doubles exactly
// (17 significant digits). Used by every textual artifact so that repeated
// runs with the same seed produce byte-identical files.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_double(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

// Runs fn(i) for i in [0, n). Tasks must be independent and write disjoint
// state; results are then identical for any worker count. workers <= 1 runs
// inline and is the reference mode. If tasks throw, the exception of the
// lowest-indexed failing task is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::size_t> error_index(count, n);
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (unsigned w = 0; w < count; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += count) {
                try {
                    fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    error_index[w] = i;
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    std::size_t best = n;
    unsigned best_w = count;
    for (unsigned w = 0; w < count; ++w) {
        if (errors[w] && error_index[w] < best) {
            best = error_index[w];
            best_w = w;
        }
    }
    if (best_w != count) std::rethrow_exception(errors[best_w]);
}

}  // namespace fogcast

#endif  // FOGCAST_COMMON_HPP
