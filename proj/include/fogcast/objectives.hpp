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
#ifndef FOGCAST_OBJECTIVES_HPP
#define FOGCAST_OBJECTIVES_HPP

#include <cmath>
#include <cstdlib>
#include <string>

#include "fogcast/common.hpp"

namespace fogcast {

inline constexpr double kProbClampLo = 1e-7;
inline constexpr double kProbClampHi = 1.0 - 1e-7;
inline constexpr double kHessianFloor = 1e-16;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Sigmoid clamped away from {0, 1} so log terms stay finite.
inline double sigmoid_clamped(double z) {
    const double p = sigmoid(z);
    if (p < kProbClampLo) return kProbClampLo;
    if (p > kProbClampHi) return kProbClampHi;
    return p;
}

// -[y ln p + (1-y) ln(1-p)], natural log.
inline double cross_entropy(int y, double p) {
    if (!(p > 0.0 && p < 1.0)) throw NumericError("cross_entropy: p outside (0,1)");
    return y == 1 ? -std::log(p) : -std::log1p(-p);
}

// Focal loss for binary classification with class-balance weight alpha and
// focusing exponent gamma. The y=0 branch comes in two variants:
//   standard: -(1-alpha) * p^gamma   * ln(1-p)
//   printed:  -(1-alpha) * p         * ln(1-p)
// The standard variant reduces to an alpha-weighted cross-entropy at gamma=0;
// the printed one keeps a linear p factor regardless of gamma.
enum class FocalForm { kStandard, kPrinted };

struct FocalParams {
    double alpha = 0.2;
    double gamma = 2.0;
    FocalForm form = FocalForm::kStandard;
};

inline double focal_loss(int y, double p, const FocalParams& fp) {
    if (!(p > 0.0 && p < 1.0)) throw NumericError("focal_loss: p outside (0,1)");
    if (y == 1) {
        return fp.alpha * std::pow(1.0 - p, fp.gamma) * -std::log(p);
    }
    const double mod = fp.form == FocalForm::kStandard ? std::pow(p, fp.gamma) : p;
    return (1.0 - fp.alpha) * mod * -std::log1p(-p);
}

struct GradHess {
    double g;
    double h;
};

namespace detail {

inline GradHess ce_grad_hess(int y, double p) {
    const double h = std::max(p * (1.0 - p), kHessianFloor);
    return {p - static_cast<double>(y), h};
}

// d/dz and d2/dz2 of the focal loss at p = sigmoid(z). Derived by chain rule
// with dp/dz = p(1-p); see the finite-difference suite for the check.
inline GradHess focal_grad_hess(int y, double p, const FocalParams& fp) {
    const double a = fp.alpha;
    const double g = fp.gamma;
    const double q = 1.0 - p;
    double grad, hess;
    if (y == 1) {
        const double qg = std::pow(q, g);
        const double lnp = std::log(p);
        // grad = a (1-p)^g [ g p ln p - (1-p) ]
        grad = a * qg * (g * p * lnp - q);
        // hess = a (1-p)^g [ -g p (g p ln p - (1-p)) + p(1-p)(g ln p + g + 1) ]
        hess = a * qg * (-g * p * (g * p * lnp - q) + p * q * (g * lnp + g + 1.0));
    } else if (fp.form == FocalForm::kStandard) {
        const double pg = std::pow(p, g);
        const double lnq = std::log1p(-p);
        // grad = (1-a) p^g [ p - g (1-p) ln(1-p) ]
        const double w = p - g * q * lnq;
        grad = (1.0 - a) * pg * w;
        // hess = (1-a) p^g [ g (1-p) w + p(1-p)(1 + g + g ln(1-p)) ]
        hess = (1.0 - a) * pg * (g * q * w + p * q * (1.0 + g + g * lnq));
    } else {
        const double lnq = std::log1p(-p);
        // grad = (1-a) p [ p - (1-p) ln(1-p) ]
        grad = (1.0 - a) * p * (p - q * lnq);
        // hess = (1-a) p(1-p) [ 3p - (1-2p) ln(1-p) ]
        hess = (1.0 - a) * p * q * (3.0 * p - (1.0 - 2.0 * p) * lnq);
    }
    return {grad, std::max(hess, kHessianFloor)};
}

}  // namespace detail

// Boosting objective: per-sample loss plus first/second derivatives of the
// loss with respect to the raw score (logit).
class Objective {
  public:
    static Objective cross_entropy_objective() { return Objective(Kind::kCe, FocalParams{}); }
    static Objective focal_objective(FocalParams fp) { return Objective(Kind::kFocal, fp); }

    // Config strings: "ce" or "focal:<alpha>:<gamma>[:printed]".
    static Objective parse(const std::string& desc) {
        if (desc == "ce") return cross_entropy_objective();
        if (desc.rfind("focal:", 0) == 0) {
            const std::string rest = desc.substr(6);
            const std::size_t c1 = rest.find(':');
            if (c1 != std::string::npos) {
                FocalParams fp;
                char* end = nullptr;
                fp.alpha = std::strtod(rest.substr(0, c1).c_str(), &end);
                std::string tail = rest.substr(c1 + 1);
                const std::size_t c2 = tail.find(':');
                std::string gamma_str = c2 == std::string::npos ? tail : tail.substr(0, c2);
                fp.gamma = std::strtod(gamma_str.c_str(), &end);
                if (c2 != std::string::npos) {
                    const std::string form = tail.substr(c2 + 1);
                    if (form != "printed") {
                        throw ConfigError("objective '" + desc + "': unknown form '" + form + "'");
                    }
                    fp.form = FocalForm::kPrinted;
                }
                if (!(fp.alpha > 0.0 && fp.alpha < 1.0)) {
                    throw ConfigError("objective '" + desc + "': alpha must be in (0,1)");
                }
                if (fp.gamma < 0.0) {
                    throw ConfigError("objective '" + desc + "': gamma must be >= 0");
                }
                return focal_objective(fp);
            }
        }
        throw ConfigError("unknown objective '" + desc +
                          "', expected 'ce' or 'focal:<alpha>:<gamma>[:printed]'");
    }

    double loss(int y, double p) const {
        return kind_ == Kind::kCe ? cross_entropy(y, p) : focal_loss(y, p, fp_);
    }

    double loss_at_logit(int y, double z) const { return loss(y, sigmoid_clamped(z)); }

    GradHess grad_hess(int y, double z) const {
        const double p = sigmoid_clamped(z);
        return kind_ == Kind::kCe ? detail::ce_grad_hess(y, p)
                                  : detail::focal_grad_hess(y, p, fp_);
    }

    std::string descriptor() const {
        if (kind_ == Kind::kCe) return "ce";
        std::string d = "focal:" + format_double(fp_.alpha, 12) + ":" + format_double(fp_.gamma, 12);
        if (fp_.form == FocalForm::kPrinted) d += ":printed";
        return d;
    }

    const FocalParams& focal_params() const { return fp_; }
    bool is_cross_entropy() const { return kind_ == Kind::kCe; }

  private:
    enum class Kind { kCe, kFocal };
    Objective(Kind k, FocalParams fp) : kind_(k), fp_(fp) {}

    Kind kind_;
    FocalParams fp_;
};

}  // namespace fogcast

#endif  // FOGCAST_OBJECTIVES_HPP
