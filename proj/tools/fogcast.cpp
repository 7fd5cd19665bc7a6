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

// Command-line pipeline driver. Every subcommand reads explicit inputs and
// writes explicit outputs; nothing depends on the clock, the environment, or
// the worker count, so a rerun with the same flags is byte-identical.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fogcast/fogcast.hpp"

namespace {

using namespace fogcast;

constexpr const char* kVersionLine =
    "fogcast 1.0.0 (formats: FOGD 1, FOGF 1, FOGM 1, FOGE 1)";

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

void emit_error(const std::string& kind, const std::string& message) {
    std::cerr << "{\"error\": \"" << json_escape(kind) << "\", \"message\": \""
              << json_escape(message) << "\"}\n";
}

// Writes through a temporary path and renames on success, so a failed run
// never leaves a partial output behind.
template <typename Fn>
void write_atomic(const std::string& path, Fn&& fn) {
    const std::string tmp = path + ".tmp";
    try {
        fn(tmp);
    } catch (...) {
        std::remove(tmp.c_str());
        throw;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot move '" + tmp + "' into place at '" + path + "'");
    }
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Config echo: every subcommand drops "<out>.run.cfg" describing the exact
// inputs and settings that produced the output.
void write_sidecar(const std::string& out_path, const std::string& command,
                   const KeyValues& kv) {
    write_atomic(out_path + ".run.cfg", [&](const std::string& tmp) {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw IoError("cannot open '" + tmp + "' for writing");
        os << "command=" << command << '\n';
        for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
        if (!os.flush()) throw IoError("failed to flush '" + tmp + "'");
    });
}

// Comma-separated values and inclusive ranges: "3,5", "3-7", "2014,2016-2018".
std::set<int> parse_int_set(const std::string& text, long lo, long hi, const char* what) {
    std::set<int> out;
    if (text.empty()) return out;
    std::istringstream ss(text);
    std::string tok;
    const auto parse_one = [&](const std::string& s) {
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (s.empty() || end == s.c_str() || *end != '\0' || v < lo || v > hi) {
            throw ConfigError(std::string("bad ") + what + " '" + s + "' in '" + text + "'");
        }
        return v;
    };
    while (std::getline(ss, tok, ',')) {
        const std::size_t dash = tok.find('-', 1);  // leading '-' would be a sign
        long first, last;
        if (dash == std::string::npos) {
            first = last = parse_one(tok);
        } else {
            first = parse_one(tok.substr(0, dash));
            last = parse_one(tok.substr(dash + 1));
            if (first > last) {
                throw ConfigError(std::string("descending ") + what + " range '" + tok + "'");
            }
        }
        for (long v = first; v <= last; ++v) out.insert(static_cast<int>(v));
    }
    return out;
}

std::set<int> parse_year_set(const std::string& text) {
    return parse_int_set(text, 1, 9999, "year");
}

std::set<int> parse_month_set(const std::string& text) {
    if (text == "all") return parse_int_set("1-12", 1, 12, "month");
    return parse_int_set(text, 1, 12, "month");
}

std::string year_set_string(const std::set<int>& years) {
    std::string out;
    for (int y : years) {
        if (!out.empty()) out += ',';
        out += std::to_string(y);
    }
    return out.empty() ? "(all)" : out;
}

// ---------------------------------------------------------------------------
// Shared option bundles

struct IdwFlags {
    double power = 2.0;
    int neighbors = 4;

    void attach(CLI::App* cmd) {
        cmd->add_option("--idw-power", power, "Inverse-distance weighting exponent");
        cmd->add_option("--idw-neighbors", neighbors, "Nearest grid nodes used per station");
    }

    IdwConfig config() const {
        IdwConfig c;
        c.power = power;
        c.neighbors = static_cast<unsigned>(neighbors);
        return c;
    }

    void echo(KeyValues& kv) const {
        kv.emplace_back("idw_power", format_double(power, 12));
        kv.emplace_back("idw_neighbors", std::to_string(neighbors));
    }
};

struct GbdtFlags {
    unsigned rounds = 200;
    double learning_rate = 0.05;
    unsigned max_leaves = 31;
    unsigned max_bins = 255;
    unsigned min_samples_leaf = 20;
    double min_hessian_leaf = 1e-3;
    double lambda = 1.0;
    unsigned patience = 20;
    uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--rounds", rounds, "Boosting rounds");
        cmd->add_option("--learning-rate", learning_rate, "Shrinkage per round");
        cmd->add_option("--max-leaves", max_leaves, "Leaves per tree");
        cmd->add_option("--max-bins", max_bins, "Histogram bins per feature");
        cmd->add_option("--min-samples-leaf", min_samples_leaf, "Minimum rows per leaf");
        cmd->add_option("--min-hessian-leaf", min_hessian_leaf, "Minimum Hessian mass per leaf");
        cmd->add_option("--lambda", lambda, "L2 regularization on leaf values");
        cmd->add_option("--patience", patience, "Early-stopping rounds without improvement");
        cmd->add_option("--seed", seed, "Random seed");
    }

    GbdtConfig config(unsigned workers) const {
        GbdtConfig c;
        c.rounds = rounds;
        c.learning_rate = learning_rate;
        c.max_leaves = max_leaves;
        c.max_bins = max_bins;
        c.min_samples_leaf = min_samples_leaf;
        c.min_hessian_leaf = min_hessian_leaf;
        c.lambda = lambda;
        c.patience = patience;
        c.seed = seed;
        c.workers = workers;
        return c;
    }

    void echo(KeyValues& kv) const {
        kv.emplace_back("rounds", std::to_string(rounds));
        kv.emplace_back("learning_rate", format_double(learning_rate, 12));
        kv.emplace_back("max_leaves", std::to_string(max_leaves));
        kv.emplace_back("max_bins", std::to_string(max_bins));
        kv.emplace_back("min_samples_leaf", std::to_string(min_samples_leaf));
        kv.emplace_back("min_hessian_leaf", format_double(min_hessian_leaf, 12));
        kv.emplace_back("lambda", format_double(lambda, 12));
        kv.emplace_back("patience", std::to_string(patience));
        kv.emplace_back("seed", std::to_string(seed));
    }
};

// ---------------------------------------------------------------------------
// Subcommand option structs

struct IngestOpts {
    std::string obs_path, grid_path, catalog_path, out_path;
    unsigned horizon = 0;
    double threshold_km = 1.0;
    bool conjunction = false;
    IdwFlags idw;
    unsigned workers = 1;
};

struct TlcaOpts {
    std::string data_path, out_path, predictors_out;
    unsigned max_lag = 5;
    double alpha = 0.05;
    std::string months = "3,4,5,6,7";
    bool binary_target = false;
    double threshold_km = 1.0;
    unsigned workers = 1;
};

struct FeaturizeOpts {
    std::string data_path, predictors_path, out_path, csv_out;
    bool no_location = false, no_calendar = false, no_recent = false, no_lead = false;
    bool calendar_from_launch = false;
    double threshold_km = 1.0;
};

struct TrainOpts {
    std::string features_path, val_features_path, out_path;
    std::string train_years, val_years;
    std::string objective = "ce";
    GbdtFlags gbdt;
    unsigned ensemble = 0;
    std::string strategy = "undersample";
    double ratio = 0.1;
    double threshold = 0.5;
    unsigned workers = 1;
};

struct PredictOpts {
    std::string model_path, features_path, out_path;
    std::string years;
    double threshold = 0.5;
    bool threshold_given = false;
};

struct EvaluateOpts {
    std::string pred_path, out_path, obs_path;
    double obs_threshold_km = 1.0;
    bool conjunction = false;
    std::string far = "paper";
    std::string aggregate = "pooled";
};

struct BaselineOpts {
    std::string method = "fsl";
    std::string data_path, out_path;
    double fog_vis_km = 1.0;
};

struct SynthOpts {
    std::string out_dir;
    uint64_t seed = 1;
    unsigned stations = 5;
    unsigned grid_lat = 3, grid_lon = 3;
    int start_year = 2015;
    unsigned launch_days = 30;
    unsigned stride = 1;
    unsigned horizon = 24;
    double rh_threshold = 90.0;
    double wind_threshold = 5.0;
    unsigned planted_lag = 3;
    double fog_frequency = 0.10;
    double label_noise = 0.0;
    bool weather_codes = false;
    IdwFlags idw;
};

struct AblateOpts {
    std::string train_path, val_path, test_path, out_path, plan_path;
    std::vector<std::string> objectives;
    GbdtFlags gbdt;
    double threshold = 0.5;
    unsigned workers = 1;
};

// ---------------------------------------------------------------------------
// Subcommand implementations

void run_ingest(const IngestOpts& o) {
    const ObservationTable obs = parse_observations_file(o.obs_path);
    const ForecastGridSet grids = parse_grid_file(o.grid_path);
    const VariableCatalog catalog = read_catalog_file(o.catalog_path);
    AssembleOptions opt;
    opt.idw = o.idw.config();
    opt.labels.threshold_km = o.threshold_km;
    opt.labels.conjunction = o.conjunction;
    opt.horizon = static_cast<uint16_t>(o.horizon);
    opt.workers = o.workers;
    std::vector<std::string> warnings;
    const Dataset ds = assemble_dataset(obs, grids, catalog, opt, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
    write_atomic(o.out_path, [&](const std::string& tmp) { write_dataset_file(ds, tmp); });

    KeyValues kv{{"observations", o.obs_path},
                 {"grid", o.grid_path},
                 {"catalog", o.catalog_path},
                 {"horizon", std::to_string(ds.horizon)},
                 {"label_threshold_km", format_double(o.threshold_km, 12)},
                 {"conjunction", o.conjunction ? "1" : "0"},
                 {"workers", std::to_string(o.workers)}};
    o.idw.echo(kv);
    write_sidecar(o.out_path, "ingest", kv);
    std::cout << "ingested " << ds.num_samples() << " samples, " << ds.num_variables()
              << " channels, horizon " << ds.horizon << " -> " << o.out_path << '\n';
}

void run_tlca(const TlcaOpts& o) {
    const Dataset ds = read_dataset_file(o.data_path);
    TlcaConfig cfg;
    cfg.max_lag = o.max_lag;
    cfg.alpha = o.alpha;
    cfg.months = parse_month_set(o.months);
    cfg.binary_target = o.binary_target;
    cfg.label_threshold_km = o.threshold_km;
    cfg.workers = o.workers;
    const LaggedCorrelationTable table = lagged_correlations(ds, cfg);
    const PredictorSet predictors = select_predictors(table);
    write_atomic(o.out_path, [&](const std::string& tmp) {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw IoError("cannot open '" + tmp + "' for writing");
        write_correlation_table(table, os);
        if (!os.flush()) throw IoError("failed to flush '" + tmp + "'");
    });
    const std::string pred_path =
        o.predictors_out.empty() ? o.out_path + ".predictors.csv" : o.predictors_out;
    write_atomic(pred_path, [&](const std::string& tmp) {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw IoError("cannot open '" + tmp + "' for writing");
        write_predictor_set(predictors, os);
        if (!os.flush()) throw IoError("failed to flush '" + tmp + "'");
    });

    KeyValues kv{{"dataset", o.data_path},
                 {"max_lag", std::to_string(o.max_lag)},
                 {"alpha", format_double(o.alpha, 12)},
                 {"months", o.months},
                 {"binary_target", o.binary_target ? "1" : "0"},
                 {"label_threshold_km", format_double(o.threshold_km, 12)},
                 {"predictors_out", pred_path},
                 {"workers", std::to_string(o.workers)}};
    write_sidecar(o.out_path, "tlca", kv);
    std::cout << "selected " << predictors.size() << " predictors from "
              << table.variable_names.size() << " variables x " << (table.max_lag + 1)
              << " lags -> " << o.out_path << '\n';
}

void run_featurize(const FeaturizeOpts& o) {
    const Dataset ds = read_dataset_file(o.data_path);
    FeatureSpec spec;
    if (!o.predictors_path.empty()) {
        spec.predictors = read_predictor_set_file(o.predictors_path);
    }
    spec.include_location = !o.no_location;
    spec.include_calendar = !o.no_calendar;
    spec.include_recent_visibility = !o.no_recent;
    spec.include_lead_time = !o.no_lead;
    spec.calendar_from_launch = o.calendar_from_launch;
    spec.label_threshold_km = o.threshold_km;
    const FeatureMatrix fm = build_features(ds, spec);
    write_atomic(o.out_path, [&](const std::string& tmp) { write_features_file(fm, tmp); });
    if (!o.csv_out.empty()) {
        write_atomic(o.csv_out, [&](const std::string& tmp) {
            std::ofstream os(tmp, std::ios::binary);
            if (!os) throw IoError("cannot open '" + tmp + "' for writing");
            write_features_csv(fm, os);
            if (!os.flush()) throw IoError("failed to flush '" + tmp + "'");
        });
    }

    KeyValues kv{{"dataset", o.data_path},
                 {"predictors", o.predictors_path.empty() ? "(all-lag0)" : o.predictors_path},
                 {"location", spec.include_location ? "1" : "0"},
                 {"calendar", spec.include_calendar ? "1" : "0"},
                 {"recent_visibility", spec.include_recent_visibility ? "1" : "0"},
                 {"lead_time", spec.include_lead_time ? "1" : "0"},
                 {"calendar_from_launch", spec.calendar_from_launch ? "1" : "0"},
                 {"label_threshold_km", format_double(o.threshold_km, 12)}};
    write_sidecar(o.out_path, "featurize", kv);
    std::cout << "featurized " << fm.rows() << " rows x " << fm.cols() << " columns -> "
              << o.out_path << '\n';
}

void run_train(const TrainOpts& o) {
    const FeatureMatrix all = read_features_file(o.features_path);
    const std::set<int> train_years = parse_year_set(o.train_years);
    const std::set<int> val_years = parse_year_set(o.val_years);
    for (int y : train_years) {
        if (val_years.count(y)) {
            throw ConfigError("year " + std::to_string(y) + " is in both --train-years and "
                              "--val-years");
        }
    }
    FeatureMatrix train_fm = filter_by_years(all, train_years);
    FeatureMatrix val_fm;
    bool have_val = false;
    if (!o.val_features_path.empty()) {
        if (!val_years.empty()) {
            throw ConfigError("--val-features and --val-years are mutually exclusive");
        }
        val_fm = read_features_file(o.val_features_path);
        have_val = true;
    } else if (!val_years.empty()) {
        val_fm = filter_by_years(all, val_years);
        have_val = val_fm.rows() > 0;
        if (!have_val) throw DataError("--val-years selected no rows");
    }
    if (train_fm.rows() == 0) throw DataError("training selection is empty");

    const Objective objective = Objective::parse(o.objective);
    const GbdtConfig gbdt_cfg = o.gbdt.config(o.workers);

    KeyValues kv{{"features", o.features_path},
                 {"val_features", o.val_features_path.empty() ? "(none)" : o.val_features_path},
                 {"train_years", year_set_string(train_years)},
                 {"val_years", year_set_string(val_years)},
                 {"objective", objective.descriptor()},
                 {"ensemble", std::to_string(o.ensemble)},
                 {"strategy", o.strategy},
                 {"ratio", format_double(o.ratio, 12)},
                 {"threshold", format_double(o.threshold, 12)},
                 {"workers", std::to_string(o.workers)}};
    o.gbdt.echo(kv);

    if (o.ensemble == 0) {
        const BoostedModel model =
            train(train_fm, have_val ? &val_fm : nullptr, objective, gbdt_cfg);
        write_atomic(o.out_path,
                     [&](const std::string& tmp) { save_model_file(model, tmp); });
        write_sidecar(o.out_path, "train", kv);
        std::cout << "trained " << model.trees.size() << " trees on " << train_fm.rows()
                  << " rows -> " << o.out_path << '\n';
    } else {
        EnsembleConfig ens;
        ens.n_members = o.ensemble;
        ens.balance = parse_balance_mode(o.strategy);
        ens.target_fog_ratio = o.ratio;
        ens.threshold = o.threshold;
        ens.seed = o.gbdt.seed;
        const EnsembleModel model =
            train_ensemble(train_fm, have_val ? &val_fm : nullptr, objective, gbdt_cfg, ens);
        write_atomic(o.out_path,
                     [&](const std::string& tmp) { write_ensemble_file(model, tmp); });
        write_sidecar(o.out_path, "train", kv);
        std::cout << "trained ensemble of " << model.members.size() << " members on "
                  << train_fm.rows() << " rows -> " << o.out_path << '\n';
    }
}

void run_predict(const PredictOpts& o) {
    FeatureMatrix fm = read_features_file(o.features_path);
    fm = filter_by_years(fm, parse_year_set(o.years));
    if (fm.rows() == 0) throw DataError("prediction selection is empty");

    // The model container is detected from the leading bytes: the boosted
    // model format is line-oriented text, the ensemble container is binary.
    char magic[4] = {0, 0, 0, 0};
    {
        std::ifstream probe(o.model_path, std::ios::binary);
        if (!probe) throw IoError("cannot open '" + o.model_path + "' for reading");
        probe.read(magic, 4);
        if (probe.gcount() != 4) throw FormatError("model file too short");
    }
    std::vector<PredictionRecord> records;
    records.reserve(fm.rows());
    double threshold = o.threshold;
    const auto emit = [&](auto&& proba_fn, const std::vector<std::string>& manifest) {
        if (manifest != fm.manifest) {
            throw InputError("feature manifest does not match the model's manifest");
        }
        for (std::size_t i = 0; i < fm.rows(); ++i) {
            PredictionRecord r;
            r.station_index = fm.meta[i].station;
            r.station_id = fm.station_ids[fm.meta[i].station];
            r.launch = fm.meta[i].launch;
            r.lead_hour = fm.meta[i].lead;
            r.probability = proba_fn(fm.row(i));
            r.forecast_label = classify(r.probability, threshold);
            r.observed_label = fm.labels[i];
            records.push_back(std::move(r));
        }
    };
    std::string kind;
    if (std::memcmp(magic, kFogeMagic, 4) == 0) {
        const EnsembleModel model = read_ensemble_file(o.model_path);
        if (!o.threshold_given) threshold = model.config.threshold;
        emit([&](const float* row) { return model.predict_proba(row); }, model.manifest());
        kind = "ensemble";
    } else {
        const BoostedModel model = load_model_file(o.model_path);
        emit([&](const float* row) { return model.predict_proba(row); }, model.manifest);
        kind = "model";
    }
    write_atomic(o.out_path, [&](const std::string& tmp) {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw IoError("cannot open '" + tmp + "' for writing");
        write_predictions(records, os);
        if (!os.flush()) throw IoError("failed to flush '" + tmp + "'");
    });

    KeyValues kv{{"model", o.model_path},
                 {"model_kind", kind},
                 {"features", o.features_path},
                 {"years", o.years.empty() ? "(all)" : o.years},
                 {"threshold", format_double(threshold, 12)}};
    write_sidecar(o.out_path, "predict", kv);
    std::cout << "predicted " << records.size() << " rows (" << kind << ") -> " << o.out_path
              << '\n';
}

void run_evaluate(const EvaluateOpts& o) {
    std::vector<PredictionRecord> records = read_predictions_file(o.pred_path);
    std::size_t unmatched = 0;
    if (!o.obs_path.empty()) {
        const ObservationTable obs = parse_observations_file(o.obs_path);
        LabelPolicy policy;
        policy.threshold_km = o.obs_threshold_km;
        policy.conjunction = o.conjunction;
        records = join_observed_labels(records, obs, policy, unmatched);
        if (unmatched > 0) {
            std::cerr << "warning: " << unmatched
                      << " predictions had no matching labelable observation\n";
        }
    }
    const FarConvention far = parse_far_convention(o.far);
    const LeadtimeReport rep = score_by_leadtime(records, parse_aggregate_mode(o.aggregate));
    write_atomic(o.out_path, [&](const std::string& tmp) { write_report_file(rep, tmp); });

    KeyValues kv{{"predictions", o.pred_path},
                 {"observations", o.obs_path.empty() ? "(labels from predictions)" : o.obs_path},
                 {"far", o.far},
                 {"aggregate", o.aggregate},
                 {"unmatched", std::to_string(unmatched)}};
    write_sidecar(o.out_path, "evaluate", kv);

    const auto cell = [](const Metric& m) {
        return m.defined ? format_double(m.value, 6) : std::string("NA");
    };
    const ScoreSet& s = rep.summary_60;
    std::cout << (rep.aggregate == AggregateMode::kPooled ? "pooled_60" : "mean_60")
              << ": pod=" << cell(s.pod) << " far=" << cell(far_of(s, far))
              << " ets=" << cell(s.ets) << " hss=" << cell(s.hss) << " n="
              << rep.pooled_60.n() << '\n';
}

void run_baseline(const BaselineOpts& o) {
    const Dataset ds = read_dataset_file(o.data_path);
    for (const char* name : {"TMP_GDS3_HTGL", "DPT_GDS3_HTGL", "R_H_GDS3_HTGL"}) {
        if (!ds.catalog.contains(name)) {
            throw DataError(std::string("baseline needs catalog channel '") + name + "'");
        }
    }
    const std::size_t ti = ds.catalog.index_of("TMP_GDS3_HTGL");
    const std::size_t di = ds.catalog.index_of("DPT_GDS3_HTGL");
    const std::size_t ri = ds.catalog.index_of("R_H_GDS3_HTGL");
    std::vector<PredictionRecord> records;
    std::size_t skipped = 0;
    for (std::size_t n = 0; n < ds.num_samples(); ++n) {
        for (unsigned lead = 1; lead <= ds.horizon; ++lead) {
            const float vis = ds.y(n, lead);
            if (std::isnan(vis)) continue;
            const float t = ds.x(n, ti, lead);
            const float td = ds.x(n, di, lead);
            const float rh = ds.x(n, ri, lead);
            if (std::isnan(t) || std::isnan(td) || std::isnan(rh)) {
                ++skipped;
                continue;
            }
            const double fsl = fsl_visibility_km(t, td, rh);
            PredictionRecord r;
            r.station_index = ds.samples[n].station;
            r.station_id = ds.station_of(n).id;
            r.launch = ds.samples[n].launch;
            r.lead_hour = static_cast<uint16_t>(lead);
            r.forecast_label = fsl <= o.fog_vis_km ? 1 : 0;
            r.probability = r.forecast_label;
            r.observed_label = label_from_visibility(vis, o.fog_vis_km);
            records.push_back(std::move(r));
        }
    }
    if (records.empty()) throw DataError("baseline produced no forecasts");
    if (skipped > 0) {
        std::cerr << "warning: " << skipped
                  << " labeled rows lacked baseline inputs and were skipped\n";
    }
    write_atomic(o.out_path, [&](const std::string& tmp) {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw IoError("cannot open '" + tmp + "' for writing");
        write_predictions(records, os);
        if (!os.flush()) throw IoError("failed to flush '" + tmp + "'");
    });

    KeyValues kv{{"method", o.method},
                 {"dataset", o.data_path},
                 {"fog_visibility_km", format_double(o.fog_vis_km, 12)},
                 {"skipped_rows", std::to_string(skipped)}};
    write_sidecar(o.out_path, "baseline", kv);
    std::cout << "baseline forecast " << records.size() << " rows -> " << o.out_path << '\n';
}

void run_synth(const SynthOpts& o) {
    SynthConfig cfg;
    cfg.seed = o.seed;
    cfg.n_stations = o.stations;
    cfg.grid_lat = o.grid_lat;
    cfg.grid_lon = o.grid_lon;
    cfg.start_year = o.start_year;
    cfg.n_launch_days = o.launch_days;
    cfg.launch_day_stride = o.stride;
    cfg.horizon = static_cast<uint16_t>(o.horizon);
    cfg.rh_threshold = o.rh_threshold;
    cfg.wind_threshold = o.wind_threshold;
    cfg.planted_lag = o.planted_lag;
    cfg.fog_frequency = o.fog_frequency;
    cfg.label_noise = o.label_noise;
    cfg.emit_weather_codes = o.weather_codes;
    cfg.idw = o.idw.config();
    std::filesystem::create_directories(o.out_dir);
    const SynthBuild build = synth_build(cfg);
    SynthFilePaths paths;
    try {
        paths = synth_write_files(build, o.out_dir);
    } catch (...) {
        for (const char* name :
             {"/observations.csv", "/grid.csv", "/catalog.txt", "/truth.json"}) {
            std::remove((o.out_dir + name).c_str());
        }
        throw;
    }

    KeyValues kv{{"seed", std::to_string(cfg.seed)},
                 {"stations", std::to_string(cfg.n_stations)},
                 {"grid_lat", std::to_string(cfg.grid_lat)},
                 {"grid_lon", std::to_string(cfg.grid_lon)},
                 {"start_year", std::to_string(cfg.start_year)},
                 {"launch_days", std::to_string(cfg.n_launch_days)},
                 {"stride", std::to_string(cfg.launch_day_stride)},
                 {"horizon", std::to_string(cfg.horizon)},
                 {"rh_threshold", format_double(cfg.rh_threshold, 12)},
                 {"wind_threshold", format_double(cfg.wind_threshold, 12)},
                 {"planted_lag", std::to_string(cfg.planted_lag)},
                 {"fog_frequency", format_double(cfg.fog_frequency, 12)},
                 {"label_noise", format_double(cfg.label_noise, 12)},
                 {"weather_codes", cfg.emit_weather_codes ? "1" : "0"}};
    o.idw.echo(kv);
    write_sidecar(paths.truth, "synth", kv);
    std::cout << "synthesized " << build.truth.n_obs_rows << " observations ("
              << build.truth.n_fog_rows << " fog) -> " << o.out_dir << '\n';
}

std::string objective_label(const Objective& obj) {
    if (obj.is_cross_entropy()) return "Cross Entropy";
    const FocalParams p = obj.focal_params();
    std::string label = "Focal Loss (" + format_double(p.alpha, 12) + ", " +
                        format_double(p.gamma, 12);
    if (p.form == FocalForm::kPrinted) label += ", printed";
    return label + ")";
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

// One axis point each for the three ablation dimensions.
struct PredictorSetSpec {
    std::string label = "All features";
    std::vector<std::string> columns;  // empty = every column
};

struct StrategySpec {
    std::string label;
    unsigned members = 0;  // 0 = single model
    BalanceMode balance = BalanceMode::kUndersample;
    double ratio = 0.1;
};

std::string strategy_label(const StrategySpec& s) {
    if (!s.label.empty()) return s.label;
    if (s.members == 0) return "Single model";
    switch (s.balance) {
        case BalanceMode::kNone: return "Easy-ensemble";
        case BalanceMode::kUndersample: return "Easy-ensemble & under-sample";
        case BalanceMode::kOversample: return "Easy-ensemble & over-sample";
    }
    throw ConfigError("unknown balance mode");
}

struct AblationPlan {
    std::string train_path, val_path, test_path;
    std::vector<PredictorSetSpec> predictor_sets{PredictorSetSpec{}};
    std::vector<std::string> objectives{"ce"};
    std::vector<StrategySpec> strategies{StrategySpec{}};
};

AblationPlan load_ablation_plan(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    nlohmann::json doc;
    try {
        is >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("ablation plan '" + path + "': " + e.what());
    }
    if (!doc.is_object()) throw InputError("ablation plan '" + path + "' must be an object");
    const auto fail = [&](const std::string& msg) -> void {
        throw InputError("ablation plan '" + path + "': " + msg);
    };
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (key != "train" && key != "val" && key != "test" && key != "predictor_sets" &&
            key != "objectives" && key != "strategies") {
            fail("unknown key '" + key + "'");
        }
    }
    AblationPlan plan;
    const auto path_of = [&](const char* key) {
        if (!doc.contains(key)) return std::string();
        if (!doc[key].is_string()) fail(std::string("'") + key + "' must be a string");
        return doc[key].get<std::string>();
    };
    plan.train_path = path_of("train");
    plan.val_path = path_of("val");
    plan.test_path = path_of("test");
    if (doc.contains("predictor_sets")) {
        if (!doc["predictor_sets"].is_array() || doc["predictor_sets"].empty()) {
            fail("'predictor_sets' must be a non-empty array");
        }
        plan.predictor_sets.clear();
        for (const auto& entry : doc["predictor_sets"]) {
            PredictorSetSpec spec;
            if (!entry.is_object() || !entry.contains("label") ||
                !entry["label"].is_string()) {
                fail("each predictor set needs a string 'label'");
            }
            spec.label = entry["label"].get<std::string>();
            if (entry.contains("columns")) {
                if (!entry["columns"].is_array() || entry["columns"].empty()) {
                    fail("'columns' must be a non-empty array of names");
                }
                for (const auto& name : entry["columns"]) {
                    if (!name.is_string()) fail("'columns' entries must be strings");
                    spec.columns.push_back(name.get<std::string>());
                }
            }
            plan.predictor_sets.push_back(std::move(spec));
        }
    }
    if (doc.contains("objectives")) {
        if (!doc["objectives"].is_array() || doc["objectives"].empty()) {
            fail("'objectives' must be a non-empty array");
        }
        plan.objectives.clear();
        for (const auto& entry : doc["objectives"]) {
            if (!entry.is_string()) fail("'objectives' entries must be descriptor strings");
            plan.objectives.push_back(entry.get<std::string>());
        }
    }
    if (doc.contains("strategies")) {
        if (!doc["strategies"].is_array() || doc["strategies"].empty()) {
            fail("'strategies' must be a non-empty array");
        }
        plan.strategies.clear();
        for (const auto& entry : doc["strategies"]) {
            if (!entry.is_object()) fail("each strategy must be an object");
            StrategySpec spec;
            if (entry.contains("label")) {
                if (!entry["label"].is_string()) fail("strategy 'label' must be a string");
                spec.label = entry["label"].get<std::string>();
            }
            if (entry.contains("members")) {
                if (!entry["members"].is_number_unsigned() ||
                    entry["members"].get<uint64_t>() > 65535) {
                    fail("strategy 'members' must be an integer in [0, 65535]");
                }
                spec.members = entry["members"].get<unsigned>();
            }
            if (entry.contains("strategy")) {
                if (!entry["strategy"].is_string()) fail("'strategy' must be a string");
                spec.balance = parse_balance_mode(entry["strategy"].get<std::string>());
            }
            if (entry.contains("ratio")) {
                if (!entry["ratio"].is_number()) fail("strategy 'ratio' must be a number");
                spec.ratio = entry["ratio"].get<double>();
            }
            plan.strategies.push_back(std::move(spec));
        }
    }
    return plan;
}

void run_ablate(const AblateOpts& o) {
    AblationPlan plan;
    if (!o.plan_path.empty()) {
        if (!o.objectives.empty()) {
            throw ConfigError("ablate: --plan and --objectives are mutually exclusive");
        }
        plan = load_ablation_plan(o.plan_path);
    } else {
        if (o.objectives.empty()) {
            throw ConfigError("ablate: give --plan or --objectives");
        }
        plan.objectives = o.objectives;
    }
    // Flags win over plan-supplied paths.
    const std::string train_path = o.train_path.empty() ? plan.train_path : o.train_path;
    const std::string val_path = o.val_path.empty() ? plan.val_path : o.val_path;
    const std::string test_path = o.test_path.empty() ? plan.test_path : o.test_path;
    if (train_path.empty()) throw ConfigError("ablate: no training features given");
    if (test_path.empty()) throw ConfigError("ablate: no test features given");

    const FeatureMatrix train_fm = read_features_file(train_path);
    const FeatureMatrix test_fm = read_features_file(test_path);
    FeatureMatrix val_fm;
    bool have_val = false;
    if (!val_path.empty()) {
        val_fm = read_features_file(val_path);
        have_val = true;
    }
    const GbdtConfig gbdt_cfg = o.gbdt.config(o.workers);

    std::ostringstream body;
    body << "label,predictor_set,objective,strategy,members,ratio,trees,"
            "pod,far_paper,far_conventional,ets,hss\n";
    const auto cell = [](const Metric& m) {
        return m.defined ? format_double(m.value) : std::string("NA");
    };
    std::size_t n_rows = 0;
    for (const PredictorSetSpec& ps : plan.predictor_sets) {
        const bool subset = !ps.columns.empty();
        const FeatureMatrix tr = subset ? select_columns(train_fm, ps.columns) : train_fm;
        const FeatureMatrix te = subset ? select_columns(test_fm, ps.columns) : test_fm;
        FeatureMatrix va;
        if (have_val) va = subset ? select_columns(val_fm, ps.columns) : val_fm;
        for (const std::string& desc : plan.objectives) {
            const Objective objective = Objective::parse(desc);
            for (const StrategySpec& strat : plan.strategies) {
                std::size_t trees = 0;
                ConfusionMatrix cm;
                const auto score_with = [&](auto&& proba_fn) {
                    for (std::size_t i = 0; i < te.rows(); ++i) {
                        const double p = proba_fn(te.row(i));
                        cm.add(classify(p, o.threshold), te.labels[i]);
                    }
                };
                if (strat.members == 0) {
                    const BoostedModel model =
                        train(tr, have_val ? &va : nullptr, objective, gbdt_cfg);
                    trees = model.trees.size();
                    score_with([&](const float* row) { return model.predict_proba(row); });
                } else {
                    EnsembleConfig ens;
                    ens.n_members = strat.members;
                    ens.balance = strat.balance;
                    ens.target_fog_ratio = strat.ratio;
                    ens.threshold = o.threshold;
                    ens.seed = o.gbdt.seed;
                    const EnsembleModel model =
                        train_ensemble(tr, have_val ? &va : nullptr, objective, gbdt_cfg, ens);
                    for (const BoostedModel& m : model.members) trees += m.trees.size();
                    score_with([&](const float* row) { return model.predict_proba(row); });
                }
                const ScoreSet s = scores(cm);
                std::string label;
                if (plan.predictor_sets.size() > 1) label = ps.label;
                if (plan.objectives.size() > 1 || (label.empty() &&
                                                   plan.strategies.size() <= 1)) {
                    if (!label.empty()) label += ", ";
                    label += objective_label(objective);
                }
                if (plan.strategies.size() > 1) {
                    if (!label.empty()) label += ", ";
                    label += strategy_label(strat);
                }
                body << csv_quote(label) << ',' << csv_quote(ps.label) << ','
                     << objective.descriptor() << ','
                     << (strat.members == 0 ? std::string("single")
                                            : balance_mode_name(strat.balance))
                     << ',' << strat.members << ','
                     << (strat.members == 0 ? std::string()
                                            : format_double(strat.ratio, 12))
                     << ',' << trees << ',' << cell(s.pod) << ',' << cell(s.far_paper) << ','
                     << cell(s.far_conventional) << ',' << cell(s.ets) << ',' << cell(s.hss)
                     << '\n';
                ++n_rows;
            }
        }
    }
    write_atomic(o.out_path, [&](const std::string& tmp) {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw IoError("cannot open '" + tmp + "' for writing");
        os << body.str();
        if (!os.flush()) throw IoError("failed to flush '" + tmp + "'");
    });

    KeyValues kv{{"plan", o.plan_path.empty() ? "(flags)" : o.plan_path},
                 {"train", train_path},
                 {"val", val_path.empty() ? "(none)" : val_path},
                 {"test", test_path},
                 {"threshold", format_double(o.threshold, 12)},
                 {"workers", std::to_string(o.workers)}};
    for (std::size_t i = 0; i < plan.objectives.size(); ++i) {
        kv.emplace_back("objective_" + std::to_string(i), plan.objectives[i]);
    }
    o.gbdt.echo(kv);
    write_sidecar(o.out_path, "ablate", kv);
    std::cout << "ablation over " << n_rows << " variants -> " << o.out_path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coastal fog probability pipeline"};
    app.set_version_flag("--version", kVersionLine);
    app.require_subcommand(1);
    app.set_config("--config");

    IngestOpts ingest_o;
    auto* c_ingest = app.add_subcommand(
        "ingest", "Assemble a dataset tensor from observation and grid CSVs");
    c_ingest->add_option("--obs", ingest_o.obs_path, "Observations CSV")->required();
    c_ingest->add_option("--grid", ingest_o.grid_path, "Grid forecast CSV")->required();
    c_ingest->add_option("--catalog", ingest_o.catalog_path, "Channel catalog file")->required();
    c_ingest->add_option("--out", ingest_o.out_path, "Output dataset container")->required();
    c_ingest->add_option("--horizon", ingest_o.horizon, "Lead horizon (0 = grid max lead)");
    c_ingest->add_option("--threshold", ingest_o.threshold_km, "Fog visibility threshold (km)");
    c_ingest->add_flag("--conjunction", ingest_o.conjunction,
                       "Exclude low-visibility rows whose weather code is not fog");
    ingest_o.idw.attach(c_ingest);
    c_ingest->add_option("--workers", ingest_o.workers, "Worker threads (1 = reference)");

    TlcaOpts tlca_o;
    auto* c_tlca = app.add_subcommand(
        "tlca", "Lagged correlation analysis between channels and observed visibility");
    c_tlca->add_option("--dataset", tlca_o.data_path, "Dataset container")->required();
    c_tlca->add_option("--out", tlca_o.out_path, "Correlation table CSV")->required();
    c_tlca->add_option("--predictors-out", tlca_o.predictors_out,
                       "Selected predictors CSV (default <out>.predictors.csv)");
    c_tlca->add_option("--max-lag", tlca_o.max_lag, "Maximum lag in hours");
    c_tlca->add_option("--alpha", tlca_o.alpha, "Two-sided significance level");
    c_tlca->add_option("--months", tlca_o.months,
                       "Valid-time months, e.g. 3-7 or 3,4,5 or 'all'");
    c_tlca->add_flag("--binary-target", tlca_o.binary_target,
                     "Correlate against fog labels instead of raw visibility");
    c_tlca->add_option("--threshold", tlca_o.threshold_km, "Fog threshold for --binary-target");
    c_tlca->add_option("--workers", tlca_o.workers, "Worker threads (1 = reference)");

    FeaturizeOpts feat_o;
    auto* c_feat = app.add_subcommand("featurize", "Build labeled feature rows from a dataset");
    c_feat->add_option("--dataset", feat_o.data_path, "Dataset container")->required();
    c_feat->add_option("--predictors", feat_o.predictors_path,
                       "Predictor CSV from tlca (default: all channels at lag 0)");
    c_feat->add_option("--out", feat_o.out_path, "Output feature container")->required();
    c_feat->add_option("--csv-out", feat_o.csv_out, "Optional human-readable CSV export");
    c_feat->add_flag("--no-location", feat_o.no_location, "Drop station location columns");
    c_feat->add_flag("--no-calendar", feat_o.no_calendar, "Drop calendar columns");
    c_feat->add_flag("--no-recent", feat_o.no_recent, "Drop recent-visibility columns");
    c_feat->add_flag("--no-lead", feat_o.no_lead, "Drop the lead-hour column");
    c_feat->add_flag("--calendar-from-launch", feat_o.calendar_from_launch,
                     "Calendar columns from launch time instead of valid time");
    c_feat->add_option("--threshold", feat_o.threshold_km, "Fog visibility threshold (km)");

    TrainOpts train_o;
    auto* c_train = app.add_subcommand("train", "Train a boosted model or an ensemble");
    c_train->add_option("--features", train_o.features_path, "Training feature container")
        ->required();
    c_train->add_option("--val-features", train_o.val_features_path,
                        "Validation feature container for early stopping");
    c_train->add_option("--train-years", train_o.train_years,
                        "Launch years used for training, e.g. 2014,2015");
    c_train->add_option("--val-years", train_o.val_years,
                        "Launch years used for validation");
    c_train->add_option("--out", train_o.out_path, "Output model file")->required();
    c_train->add_option("--objective", train_o.objective,
                        "Objective: ce | focal:<alpha>:<gamma>[:printed]");
    train_o.gbdt.attach(c_train);
    c_train->add_option("--ensemble", train_o.ensemble,
                        "Ensemble members (0 = single model)");
    c_train->add_option("--strategy", train_o.strategy,
                        "Member rebalancing: none | undersample | oversample");
    c_train->add_option("--ratio", train_o.ratio, "Target fog fraction per member");
    c_train->add_option("--threshold", train_o.threshold,
                        "Decision threshold stored with an ensemble");
    c_train->add_option("--workers", train_o.workers, "Worker threads (1 = reference)");

    PredictOpts pred_o;
    auto* c_pred = app.add_subcommand("predict", "Score feature rows with a trained model");
    c_pred->add_option("--model", pred_o.model_path, "Model or ensemble file")->required();
    c_pred->add_option("--features", pred_o.features_path, "Feature container")->required();
    c_pred->add_option("--out", pred_o.out_path, "Output predictions CSV")->required();
    c_pred->add_option("--years", pred_o.years, "Only rows launched in these years");
    c_pred->add_option("--threshold", pred_o.threshold, "Classification threshold");

    EvaluateOpts eval_o;
    auto* c_eval = app.add_subcommand("evaluate", "Score predictions against observations");
    c_eval->add_option("--pred", eval_o.pred_path, "Predictions CSV")->required();
    c_eval->add_option("--out", eval_o.out_path, "Output report CSV")->required();
    c_eval->add_option("--obs", eval_o.obs_path,
                       "Re-derive observed labels from this observations CSV");
    c_eval->add_option("--obs-threshold", eval_o.obs_threshold_km,
                       "Fog threshold used with --obs (km)");
    c_eval->add_flag("--conjunction", eval_o.conjunction,
                     "Weather-code conjunction labeling used with --obs");
    c_eval->add_option("--far", eval_o.far, "FAR convention: paper | conventional");
    c_eval->add_option("--aggregate", eval_o.aggregate, "Summary rows: pooled | mean");

    BaselineOpts base_o;
    auto* c_base = app.add_subcommand(
        "baseline", "Analytic visibility baseline forecast from a dataset");
    c_base->add_option("method", base_o.method, "Baseline method (fsl)")
        ->required()
        ->check(CLI::IsMember({"fsl"}));
    c_base->add_option("--dataset", base_o.data_path, "Dataset container")->required();
    c_base->add_option("--out", base_o.out_path, "Output predictions CSV")->required();
    c_base->add_option("--threshold", base_o.fog_vis_km, "Fog visibility threshold (km)");

    SynthOpts synth_o;
    auto* c_synth = app.add_subcommand("synth", "Generate a synthetic scenario as CSV inputs");
    c_synth->add_option("--out-dir", synth_o.out_dir, "Output directory")->required();
    c_synth->add_option("--seed", synth_o.seed, "Random seed");
    c_synth->add_option("--stations", synth_o.stations, "Station count");
    c_synth->add_option("--grid-lat", synth_o.grid_lat, "Grid rows");
    c_synth->add_option("--grid-lon", synth_o.grid_lon, "Grid columns");
    c_synth->add_option("--start-year", synth_o.start_year, "First launch year");
    c_synth->add_option("--launch-days", synth_o.launch_days, "Number of launch days");
    c_synth->add_option("--stride", synth_o.stride, "Days between launch days");
    c_synth->add_option("--horizon", synth_o.horizon, "Lead horizon in hours");
    c_synth->add_option("--rh-threshold", synth_o.rh_threshold,
                        "Planted rule: humidity at or above this causes fog");
    c_synth->add_option("--wind-threshold", synth_o.wind_threshold,
                        "Planted rule: wind below this (m/s) allows fog");
    c_synth->add_option("--planted-lag", synth_o.planted_lag,
                        "Hours between the humidity cause and the fog");
    c_synth->add_option("--fog-frequency", synth_o.fog_frequency, "Target fog fraction");
    c_synth->add_option("--label-noise", synth_o.label_noise, "Label resampling probability");
    c_synth->add_flag("--weather-codes", synth_o.weather_codes,
                      "Emit present-weather codes on fog rows");
    synth_o.idw.attach(c_synth);

    AblateOpts abl_o;
    auto* c_abl = app.add_subcommand(
        "ablate", "Train a grid of model variants and compare scores");
    c_abl->add_option("--plan", abl_o.plan_path,
                      "JSON plan: predictor sets x objectives x strategies");
    c_abl->add_option("--train", abl_o.train_path, "Training feature container");
    c_abl->add_option("--val", abl_o.val_path, "Validation feature container");
    c_abl->add_option("--test", abl_o.test_path, "Test feature container");
    c_abl->add_option("--objectives", abl_o.objectives,
                      "Objective descriptors (single-model shortcut for --plan)")
        ->delimiter(',');
    c_abl->add_option("--out", abl_o.out_path, "Output comparison CSV")->required();
    c_abl->add_option("--threshold", abl_o.threshold, "Classification threshold");
    abl_o.gbdt.attach(c_abl);
    c_abl->add_option("--workers", abl_o.workers, "Worker threads (1 = reference)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*c_ingest) run_ingest(ingest_o);
        if (*c_tlca) run_tlca(tlca_o);
        if (*c_feat) run_featurize(feat_o);
        if (*c_train) run_train(train_o);
        if (*c_pred) {
            pred_o.threshold_given = c_pred->count("--threshold") > 0;
            run_predict(pred_o);
        }
        if (*c_eval) run_evaluate(eval_o);
        if (*c_base) run_baseline(base_o);
        if (*c_synth) run_synth(synth_o);
        if (*c_abl) run_ablate(abl_o);
    } catch (const Error& e) {
        emit_error(e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return 1;
    }
    return 0;
}
