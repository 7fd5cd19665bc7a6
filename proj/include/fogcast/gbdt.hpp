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
#ifndef FOGCAST_GBDT_HPP
#define FOGCAST_GBDT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fogcast/common.hpp"
#include "fogcast/featurize.hpp"
#include "fogcast/objectives.hpp"

namespace fogcast {

struct GbdtConfig {
    unsigned rounds = 200;
    double learning_rate = 0.05;
    unsigned max_leaves = 31;
    unsigned max_bins = 255;
    unsigned min_samples_leaf = 20;
    double min_hessian_leaf = 1e-3;
    double lambda = 1.0;          // L2 regularization on leaf values
    unsigned patience = 20;       // early-stopping rounds on validation loss
    uint64_t seed = 0;
    unsigned workers = 1;

    void validate() const {
        if (rounds < 1) throw ConfigError("gbdt: rounds must be >= 1");
        if (!(learning_rate > 0.0)) throw ConfigError("gbdt: learning rate must be > 0");
        if (max_leaves < 2) throw ConfigError("gbdt: max leaves must be >= 2");
        if (max_bins < 2 || max_bins > 65534) {
            throw ConfigError("gbdt: max bins must be in [2, 65534]");
        }
        if (min_samples_leaf < 1) throw ConfigError("gbdt: min samples per leaf must be >= 1");
        if (!(min_hessian_leaf > 0.0)) throw ConfigError("gbdt: min hessian must be > 0");
        if (!(lambda > 0.0)) throw ConfigError("gbdt: lambda must be > 0");
        if (patience < 1) throw ConfigError("gbdt: patience must be >= 1");
    }
};

// Split node: rows with feature value <= threshold go left; missing values
// follow the stored direction. Leaves carry the logit increment.
struct TreeNode {
    bool is_leaf = true;
    double value = 0.0;
    uint32_t feature = 0;
    double threshold = 0.0;
    bool missing_left = false;
    int32_t left = -1;
    int32_t right = -1;
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // index 0 is the root

    double predict(const float* row) const {
        int32_t id = 0;
        while (!nodes[id].is_leaf) {
            const TreeNode& nd = nodes[id];
            const float v = row[nd.feature];
            if (std::isnan(v)) {
                id = nd.missing_left ? nd.left : nd.right;
            } else {
                id = v <= nd.threshold ? nd.left : nd.right;
            }
        }
        return nodes[id].value;
    }

    std::size_t leaf_count() const {
        std::size_t k = 0;
        for (const TreeNode& nd : nodes) k += nd.is_leaf ? 1 : 0;
        return k;
    }
};

namespace detail {

inline constexpr uint16_t kMissingBin = 0xFFFF;

// Per-feature bin upper boundaries from training values. Every distinct value
// gets its own bin when there are few; otherwise boundaries sit at evenly
// spaced ranks of the sorted sample (quantile binning).
struct FeatureBins {
    std::vector<double> uppers;  // ascending; bin b holds values <= uppers[b]

    uint16_t bin_of(double v) const {
        const auto it = std::lower_bound(uppers.begin(), uppers.end(), v);
        const std::size_t idx = static_cast<std::size_t>(it - uppers.begin());
        return static_cast<uint16_t>(std::min(idx, uppers.size() - 1));
    }
};

inline FeatureBins build_bins(std::vector<double>& values, unsigned max_bins) {
    FeatureBins fb;
    if (values.empty()) return fb;
    std::sort(values.begin(), values.end());
    std::vector<double> distinct;
    distinct.reserve(values.size());
    for (double v : values) {
        if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
    }
    if (distinct.size() <= max_bins) {
        fb.uppers = std::move(distinct);
        return fb;
    }
    const std::size_t n = values.size();
    for (unsigned b = 1; b < max_bins; ++b) {
        const std::size_t rank = static_cast<std::size_t>(
            (static_cast<unsigned long long>(b) * n) / max_bins);
        const double upper = values[rank - 1];
        if (fb.uppers.empty() || upper != fb.uppers.back()) fb.uppers.push_back(upper);
    }
    if (fb.uppers.empty() || fb.uppers.back() != values[n - 1]) {
        fb.uppers.push_back(values[n - 1]);
    }
    return fb;
}

struct SplitCandidate {
    double gain = 0.0;
    uint32_t feature = 0;
    uint16_t bin = 0;
    bool missing_left = false;
    bool valid = false;
};

struct BinAccum {
    double g = 0.0;
    double h = 0.0;
    uint32_t count = 0;
};

// Leaf-wise tree grower over pre-binned features. Histograms accumulate in
// row order per feature and prefix sums run in ascending bin order; the
// exhaustive-search equivalence tests rely on this exact summation order.
class TreeGrower {
  public:
    TreeGrower(const std::vector<uint16_t>& codes, std::size_t n_rows,
               const std::vector<FeatureBins>& bins, const GbdtConfig& cfg)
        : codes_(codes), n_rows_(n_rows), bins_(bins), cfg_(cfg),
          n_features_(bins.size()) {
        scratch_.resize(n_features_);
    }

    // Grows one tree for the given per-row gradients/Hessians. Returns the
    // tree plus per-row leaf values in `row_delta` (scaled by the learning
    // rate). A tree with a single leaf signals "no positive-gain split".
    TreeModel grow(const std::vector<double>& g, const std::vector<double>& h,
                   std::vector<double>& row_delta) {
        rows_.resize(n_rows_);
        for (std::size_t i = 0; i < n_rows_; ++i) rows_[i] = static_cast<uint32_t>(i);

        TreeModel tree;
        tree.nodes.push_back(TreeNode{});
        std::vector<GrowNode> leaves;
        leaves.push_back(make_node(0, 0, static_cast<uint32_t>(n_rows_), g, h));

        while (leaves.size() < cfg_.max_leaves) {
            std::size_t pick = leaves.size();
            double best_gain = 0.0;
            for (std::size_t i = 0; i < leaves.size(); ++i) {
                if (leaves[i].best.valid && leaves[i].best.gain > best_gain) {
                    best_gain = leaves[i].best.gain;
                    pick = i;
                }
            }
            if (pick == leaves.size()) break;

            GrowNode node = leaves[pick];
            leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
            const SplitCandidate& sc = node.best;

            const auto goes_left = [&](uint32_t row) {
                const uint16_t code = codes_[row * n_features_ + sc.feature];
                if (code == kMissingBin) return sc.missing_left;
                return code <= sc.bin;
            };
            const auto mid_it = std::stable_partition(
                rows_.begin() + node.begin, rows_.begin() + node.end, goes_left);
            const uint32_t mid =
                static_cast<uint32_t>(mid_it - rows_.begin());

            // push_back may reallocate, so bind the node only afterwards.
            const int32_t left = static_cast<int32_t>(tree.nodes.size());
            const int32_t right = left + 1;
            tree.nodes.push_back(TreeNode{});
            tree.nodes.push_back(TreeNode{});
            TreeNode& out = tree.nodes[node.out_node];
            out.is_leaf = false;
            out.feature = sc.feature;
            out.threshold = bins_[sc.feature].uppers[sc.bin];
            out.missing_left = sc.missing_left;
            out.left = left;
            out.right = right;

            leaves.push_back(make_node(left, node.begin, mid, g, h));
            leaves.push_back(make_node(right, mid, node.end, g, h));
        }

        row_delta.assign(n_rows_, 0.0);
        for (const GrowNode& leaf : leaves) {
            const double value =
                -leaf.G / (leaf.H + cfg_.lambda) * cfg_.learning_rate;
            tree.nodes[leaf.out_node].value = value;
            for (uint32_t i = leaf.begin; i < leaf.end; ++i) {
                row_delta[rows_[i]] = value;
            }
        }
        return tree;
    }

  private:
    struct GrowNode {
        int32_t out_node = 0;
        uint32_t begin = 0;
        uint32_t end = 0;
        double G = 0.0;
        double H = 0.0;
        SplitCandidate best;
    };

    GrowNode make_node(int32_t out_node, uint32_t begin, uint32_t end,
                       const std::vector<double>& g, const std::vector<double>& h) {
        GrowNode node;
        node.out_node = out_node;
        node.begin = begin;
        node.end = end;
        for (uint32_t i = begin; i < end; ++i) {
            node.G += g[rows_[i]];
            node.H += h[rows_[i]];
        }
        node.best = best_split(node, g, h);
        return node;
    }

    SplitCandidate best_split(const GrowNode& node, const std::vector<double>& g,
                              const std::vector<double>& h) {
        const uint64_t count = node.end - node.begin;
        if (count < 2 * cfg_.min_samples_leaf) return SplitCandidate{};
        const double parent = node.G * node.G / (node.H + cfg_.lambda);

        std::vector<SplitCandidate> per_feature(n_features_);
        parallel_for(n_features_, cfg_.workers, [&](std::size_t f) {
            per_feature[f] = best_split_for_feature(node, static_cast<uint32_t>(f),
                                                    g, h, parent, count);
        });

        SplitCandidate best;
        for (const SplitCandidate& sc : per_feature) {
            if (sc.valid && (!best.valid || sc.gain > best.gain)) best = sc;
        }
        return best;
    }

    SplitCandidate best_split_for_feature(const GrowNode& node, uint32_t f,
                                          const std::vector<double>& g,
                                          const std::vector<double>& h, double parent,
                                          uint64_t count) {
        const std::size_t n_bins = bins_[f].uppers.size();
        if (n_bins < 2) return SplitCandidate{};
        std::vector<BinAccum>& hist = scratch_[f];
        hist.assign(n_bins, BinAccum{});
        BinAccum miss;
        for (uint32_t i = node.begin; i < node.end; ++i) {
            const uint32_t row = rows_[i];
            const uint16_t code = codes_[row * n_features_ + f];
            BinAccum& acc = code == kMissingBin ? miss : hist[code];
            acc.g += g[row];
            acc.h += h[row];
            acc.count += 1;
        }

        SplitCandidate best;
        best.feature = f;
        double cg = 0.0, ch = 0.0;
        uint64_t cc = 0;
        for (std::size_t b = 0; b + 1 < n_bins; ++b) {
            cg += hist[b].g;
            ch += hist[b].h;
            cc += hist[b].count;
            for (int with_missing = 0; with_missing < 2; ++with_missing) {
                const double gl = with_missing ? cg + miss.g : cg;
                const double hl = with_missing ? ch + miss.h : ch;
                const uint64_t cl = with_missing ? cc + miss.count : cc;
                const double gr = node.G - gl;
                const double hr = node.H - hl;
                const uint64_t cr = count - cl;
                if (cl < cfg_.min_samples_leaf || cr < cfg_.min_samples_leaf) continue;
                if (hl < cfg_.min_hessian_leaf || hr < cfg_.min_hessian_leaf) continue;
                const double gain = gl * gl / (hl + cfg_.lambda) +
                                    gr * gr / (hr + cfg_.lambda) - parent;
                if (gain > 0.0 && (!best.valid || gain > best.gain)) {
                    best.valid = true;
                    best.gain = gain;
                    best.bin = static_cast<uint16_t>(b);
                    best.missing_left = with_missing != 0;
                }
            }
        }
        return best;
    }

    const std::vector<uint16_t>& codes_;
    std::size_t n_rows_;
    const std::vector<FeatureBins>& bins_;
    const GbdtConfig& cfg_;
    std::size_t n_features_;
    std::vector<uint32_t> rows_;
    std::vector<std::vector<BinAccum>> scratch_;
};

}  // namespace detail

struct BoostedModel {
    std::vector<std::string> manifest;
    std::string objective_desc = "ce";
    double base_score = 0.0;  // logit
    uint64_t seed = 0;
    GbdtConfig config;
    std::vector<TreeModel> trees;

    // Filled by train(), not serialized.
    std::vector<double> train_loss_history;
    std::vector<double> val_loss_history;

    double predict_logit(const float* row) const {
        double z = base_score;
        for (const TreeModel& t : trees) z += t.predict(row);
        return z;
    }

    double predict_proba(const float* row) const { return sigmoid_clamped(predict_logit(row)); }

    void check_manifest(const std::vector<std::string>& other) const {
        if (other != manifest) {
            throw InputError("feature manifest does not match the model's manifest");
        }
    }
};

namespace detail {

inline double weighted_mean_loss(const Objective& obj, const FeatureMatrix& fm,
                                 const std::vector<double>& scores) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        num += fm.weights[i] * obj.loss_at_logit(fm.labels[i], scores[i]);
        den += fm.weights[i];
    }
    return num / den;
}

}  // namespace detail

// Newton boosting: per round, fit one leaf-wise tree to the per-sample
// gradients and Hessians of the objective at the current scores. With a
// validation matrix, stops after `patience` rounds without improvement and
// truncates to the best round. Stops outright when no split has positive
// gain.
inline BoostedModel train(const FeatureMatrix& train_fm, const FeatureMatrix* val_fm,
                          const Objective& objective, const GbdtConfig& cfg) {
    cfg.validate();
    train_fm.validate();
    if (train_fm.rows() == 0) throw DataError("gbdt: empty training matrix");
    if (val_fm) {
        val_fm->validate();
        if (val_fm->manifest != train_fm.manifest) {
            throw InputError("gbdt: validation manifest does not match training manifest");
        }
    }
    const std::size_t n = train_fm.rows();
    const std::size_t n_features = train_fm.cols();

    double wpos = 0.0, wtot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(train_fm.weights[i] >= 0.0)) throw DataError("gbdt: negative sample weight");
        wpos += train_fm.labels[i] ? train_fm.weights[i] : 0.0;
        wtot += train_fm.weights[i];
    }
    if (wpos <= 0.0 || wpos >= wtot) {
        throw DataError("gbdt: training set must contain both classes");
    }

    for (float v : train_fm.values) {
        if (std::isinf(v)) {
            throw InputError("gbdt: non-finite feature value (only NaN means missing)");
        }
    }

    BoostedModel model;
    model.manifest = train_fm.manifest;
    model.objective_desc = objective.descriptor();
    model.seed = cfg.seed;
    model.config = cfg;
    const double rate = wpos / wtot;
    model.base_score = std::log(rate) - std::log1p(-rate);

    // Quantile bins per feature from the training values, then the whole
    // matrix as bin codes (0xFFFF = missing).
    std::vector<detail::FeatureBins> bins(n_features);
    parallel_for(n_features, cfg.workers, [&](std::size_t f) {
        std::vector<double> vals;
        vals.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const float v = train_fm.values[i * n_features + f];
            if (!std::isnan(v)) vals.push_back(v);
        }
        bins[f] = detail::build_bins(vals, cfg.max_bins);
    });
    std::vector<uint16_t> codes(n * n_features);
    parallel_for(n, cfg.workers, [&](std::size_t i) {
        for (std::size_t f = 0; f < n_features; ++f) {
            const float v = train_fm.values[i * n_features + f];
            codes[i * n_features + f] =
                std::isnan(v) || bins[f].uppers.empty() ? detail::kMissingBin
                                                        : bins[f].bin_of(v);
        }
    });

    std::vector<double> scores(n, model.base_score);
    std::vector<double> val_scores;
    if (val_fm) val_scores.assign(val_fm->rows(), model.base_score);

    detail::TreeGrower grower(codes, n, bins, cfg);
    std::vector<double> g(n), h(n), row_delta;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_round = 0;
    unsigned since_best = 0;

    for (unsigned round = 0; round < cfg.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const GradHess gh = objective.grad_hess(train_fm.labels[i], scores[i]);
            g[i] = gh.g * train_fm.weights[i];
            h[i] = gh.h * train_fm.weights[i];
        }
        TreeModel tree = grower.grow(g, h, row_delta);
        if (tree.nodes.size() == 1) break;  // no positive-gain split anywhere
        for (std::size_t i = 0; i < n; ++i) scores[i] += row_delta[i];
        model.trees.push_back(std::move(tree));
        model.train_loss_history.push_back(
            detail::weighted_mean_loss(objective, train_fm, scores));

        if (val_fm) {
            const TreeModel& t = model.trees.back();
            for (std::size_t i = 0; i < val_fm->rows(); ++i) {
                val_scores[i] += t.predict(val_fm->row(i));
            }
            const double vloss = detail::weighted_mean_loss(objective, *val_fm, val_scores);
            model.val_loss_history.push_back(vloss);
            if (vloss < best_val) {
                best_val = vloss;
                best_round = model.trees.size();
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                break;
            }
        }
    }
    if (val_fm && model.trees.size() > best_round) {
        model.trees.resize(best_round);
    }
    return model;
}

inline double predict_proba(const BoostedModel& model, const FeatureMatrix& fm, std::size_t i) {
    model.check_manifest(fm.manifest);
    return model.predict_proba(fm.row(i));
}

// Model file: UTF-8 text, line oriented, doubles at 17 significant digits so
// a save/load/save cycle is byte-identical.
inline void save_model(const BoostedModel& model, std::ostream& os) {
    os << "FOGM 1\n";
    os << "manifest " << model.manifest.size() << '\n';
    for (const std::string& name : model.manifest) os << name << '\n';
    os << "objective " << model.objective_desc << '\n';
    os << "base " << format_double(model.base_score) << '\n';
    os << "seed " << model.seed << '\n';
    const GbdtConfig& c = model.config;
    os << "config rounds=" << c.rounds << " learning_rate=" << format_double(c.learning_rate)
       << " max_leaves=" << c.max_leaves << " max_bins=" << c.max_bins
       << " min_samples_leaf=" << c.min_samples_leaf
       << " min_hessian_leaf=" << format_double(c.min_hessian_leaf)
       << " lambda=" << format_double(c.lambda) << " patience=" << c.patience
       << " workers=1\n";
    os << "trees " << model.trees.size() << '\n';
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const TreeModel& tree = model.trees[t];
        os << "tree " << t << " nodes " << tree.nodes.size() << '\n';
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            const TreeNode& nd = tree.nodes[i];
            if (nd.is_leaf) {
                os << "l " << i << " v " << format_double(nd.value) << '\n';
            } else {
                os << "n " << i << " f " << nd.feature << " t " << format_double(nd.threshold)
                   << " m " << (nd.missing_left ? 1 : 0) << " l " << nd.left << " r " << nd.right
                   << '\n';
            }
        }
    }
    os << "end\n";
    if (!os) throw IoError("failed to write model");
}

namespace detail {

inline std::string read_line(std::istream& is, const char* what) {
    std::string line;
    if (!std::getline(is, line)) {
        throw FormatError(std::string("model file truncated, expected ") + what);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

inline std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

inline double parse_double_token(const std::string& s, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw FormatError(std::string("model file: bad ") + what + " '" + s + "'");
    }
    return v;
}

inline unsigned long long parse_u64_token(const std::string& s, const char* what) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') {
        throw FormatError(std::string("model file: bad ") + what + " '" + s + "'");
    }
    return v;
}

inline void apply_config_entry(GbdtConfig& cfg, const std::string& kv) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
        throw FormatError("model file: bad config entry '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (key == "rounds") {
        cfg.rounds = static_cast<unsigned>(parse_u64_token(value, "rounds"));
    } else if (key == "learning_rate") {
        cfg.learning_rate = parse_double_token(value, "learning_rate");
    } else if (key == "max_leaves") {
        cfg.max_leaves = static_cast<unsigned>(parse_u64_token(value, "max_leaves"));
    } else if (key == "max_bins") {
        cfg.max_bins = static_cast<unsigned>(parse_u64_token(value, "max_bins"));
    } else if (key == "min_samples_leaf") {
        cfg.min_samples_leaf = static_cast<unsigned>(parse_u64_token(value, "min_samples_leaf"));
    } else if (key == "min_hessian_leaf") {
        cfg.min_hessian_leaf = parse_double_token(value, "min_hessian_leaf");
    } else if (key == "lambda") {
        cfg.lambda = parse_double_token(value, "lambda");
    } else if (key == "patience") {
        cfg.patience = static_cast<unsigned>(parse_u64_token(value, "patience"));
    } else if (key == "workers") {
        cfg.workers = static_cast<unsigned>(parse_u64_token(value, "workers"));
    } else {
        throw FormatError("model file: unknown config key '" + key + "'");
    }
}

}  // namespace detail

inline BoostedModel load_model(std::istream& is) {
    using detail::parse_double_token;
    using detail::parse_u64_token;
    using detail::read_line;
    using detail::tokens_of;

    const std::string header = read_line(is, "header");
    if (header != "FOGM 1") {
        if (header.rfind("FOGM ", 0) == 0) {
            throw FormatError("model file: unsupported format version '" + header + "'");
        }
        throw FormatError("not a model file (bad header)");
    }
    BoostedModel model;
    {
        const auto toks = tokens_of(read_line(is, "manifest"));
        if (toks.size() != 2 || toks[0] != "manifest") {
            throw FormatError("model file: expected 'manifest <count>'");
        }
        const auto count = parse_u64_token(toks[1], "manifest count");
        for (unsigned long long i = 0; i < count; ++i) {
            model.manifest.push_back(read_line(is, "manifest name"));
        }
    }
    {
        const std::string line = read_line(is, "objective");
        if (line.rfind("objective ", 0) != 0) {
            throw FormatError("model file: expected 'objective <descriptor>'");
        }
        model.objective_desc = line.substr(10);
        Objective::parse(model.objective_desc);  // validates
    }
    {
        const auto toks = tokens_of(read_line(is, "base"));
        if (toks.size() != 2 || toks[0] != "base") {
            throw FormatError("model file: expected 'base <value>'");
        }
        model.base_score = parse_double_token(toks[1], "base");
    }
    {
        const auto toks = tokens_of(read_line(is, "seed"));
        if (toks.size() != 2 || toks[0] != "seed") {
            throw FormatError("model file: expected 'seed <value>'");
        }
        model.seed = parse_u64_token(toks[1], "seed");
    }
    {
        const auto toks = tokens_of(read_line(is, "config"));
        if (toks.empty() || toks[0] != "config") {
            throw FormatError("model file: expected 'config ...'");
        }
        for (std::size_t i = 1; i < toks.size(); ++i) {
            detail::apply_config_entry(model.config, toks[i]);
        }
        model.config.seed = model.seed;
    }
    unsigned long long n_trees = 0;
    {
        const auto toks = tokens_of(read_line(is, "trees"));
        if (toks.size() != 2 || toks[0] != "trees") {
            throw FormatError("model file: expected 'trees <count>'");
        }
        n_trees = parse_u64_token(toks[1], "tree count");
    }
    for (unsigned long long t = 0; t < n_trees; ++t) {
        const auto toks = tokens_of(read_line(is, "tree header"));
        if (toks.size() != 4 || toks[0] != "tree" || toks[2] != "nodes" ||
            parse_u64_token(toks[1], "tree index") != t) {
            throw FormatError("model file: expected 'tree <index> nodes <count>'");
        }
        const auto n_nodes = parse_u64_token(toks[3], "node count");
        if (n_nodes == 0) throw FormatError("model file: empty tree");
        TreeModel tree;
        tree.nodes.resize(n_nodes);
        for (unsigned long long i = 0; i < n_nodes; ++i) {
            const auto nt = tokens_of(read_line(is, "node record"));
            if (nt.size() == 4 && nt[0] == "l" && nt[2] == "v") {
                const auto id = parse_u64_token(nt[1], "node id");
                if (id >= n_nodes) throw FormatError("model file: node id out of range");
                tree.nodes[id].is_leaf = true;
                tree.nodes[id].value = parse_double_token(nt[3], "leaf value");
            } else if (nt.size() == 12 && nt[0] == "n" && nt[2] == "f" && nt[4] == "t" &&
                       nt[6] == "m" && nt[8] == "l" && nt[10] == "r") {
                const auto id = parse_u64_token(nt[1], "node id");
                if (id >= n_nodes) throw FormatError("model file: node id out of range");
                TreeNode& nd = tree.nodes[id];
                nd.is_leaf = false;
                nd.feature = static_cast<uint32_t>(parse_u64_token(nt[3], "feature"));
                if (nd.feature >= model.manifest.size()) {
                    throw FormatError("model file: feature index out of range");
                }
                nd.threshold = parse_double_token(nt[5], "threshold");
                const auto m = parse_u64_token(nt[7], "missing flag");
                if (m > 1) throw FormatError("model file: missing flag must be 0 or 1");
                nd.missing_left = m == 1;
                nd.left = static_cast<int32_t>(parse_u64_token(nt[9], "left child"));
                nd.right = static_cast<int32_t>(parse_u64_token(nt[11], "right child"));
                if (nd.left <= 0 || nd.right <= 0 ||
                    static_cast<unsigned long long>(nd.left) >= n_nodes ||
                    static_cast<unsigned long long>(nd.right) >= n_nodes) {
                    throw FormatError("model file: child id out of range");
                }
            } else {
                throw FormatError("model file: bad node record");
            }
        }
        model.trees.push_back(std::move(tree));
    }
    if (read_line(is, "end marker") != "end") {
        throw FormatError("model file: missing end marker");
    }
    return model;
}

inline void save_model_file(const BoostedModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    save_model(model, os);
    if (!os.flush()) throw IoError("failed to flush '" + path + "'");
}

inline BoostedModel load_model_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    return load_model(is);
}

}  // namespace fogcast

#endif  // FOGCAST_GBDT_HPP
