// Copyright 2026 The ubirisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ubirisk/common.hpp"
#include "ubirisk/config.hpp"
#include "ubirisk/csv.hpp"
#include "ubirisk/featurize.hpp"
#include "ubirisk/forest.hpp"
#include "ubirisk/linear_model.hpp"
#include "ubirisk/parallel.hpp"
#include "ubirisk/recipe.hpp"
#include "ubirisk/sha256.hpp"
#include "ubirisk/stats.hpp"
#include "ubirisk/study.hpp"
#include "ubirisk/synth.hpp"
#include "ubirisk/trip_store.hpp"
#include "ubirisk/tuning.hpp"

namespace fs = std::filesystem;
using namespace ubirisk;

namespace {

struct Manifest {
    std::string command;
    std::string config_path;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json seeds = nlohmann::json::object();
    nlohmann::json inputs = nlohmann::json::array();
    nlohmann::json outputs = nlohmann::json::array();
    nlohmann::json timings_ms = nlohmann::json::object();

    void add_input(const fs::path& path) { inputs.push_back(file_entry(path)); }
    void add_output(const fs::path& path) { outputs.push_back(file_entry(path)); }

    void write(const fs::path& path) const {
        nlohmann::json doc = {{"command", command}, {"config_path", config_path},
                              {"config", config},   {"seeds", seeds},
                              {"inputs", inputs},   {"outputs", outputs},
                              {"timings_ms", timings_ms}};
        std::ofstream out(path);
        out << doc.dump(2) << '\n';
    }

  private:
    static nlohmann::json file_entry(const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        Sha256 hasher;
        char buf[65536];
        size_t bytes = 0;
        while (in) {
            in.read(buf, sizeof buf);
            hasher.update(buf, static_cast<size_t>(in.gcount()));
            bytes += static_cast<size_t>(in.gcount());
        }
        return {{"path", path.string()}, {"sha256", hasher.hex_digest()}, {"bytes", bytes}};
    }
};

class StageTimer {
  public:
    explicit StageTimer(Manifest& manifest) : manifest_(manifest) {}
    template <typename Fn>
    auto run(const std::string& stage, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(stage, start);
        } else {
            auto result = fn();
            record(stage, start);
            return result;
        }
    }

  private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
        manifest_.timings_ms[stage] = ms;
    }
    Manifest& manifest_;
};

struct GlobalOptions {
    std::string workdir = ".";
    std::string config_path;
    int jobs = default_jobs();
    bool json_errors = false;

    fs::path resolve(const std::string& path) const {
        fs::path p(path);
        return p.is_absolute() ? p : fs::path(workdir) / p;
    }

    Config load_config() const {
        Config config =
            config_path.empty() ? Config() : Config::from_file(resolve(config_path).string());
        config.apply_env();
        return config;
    }
};

void write_text(const fs::path& path, const std::string& text) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<TripRecord> load_trips(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    auto result = parse_trips(in);
    if (!result.errors.empty()) {
        std::cerr << result.errors.size() << " trip rows rejected (first: line "
                  << result.errors.front().line << ": " << result.errors.front().message
                  << ")\n";
    }
    return std::move(result.trips);
}

std::vector<VehicleContract> load_contracts(const fs::path& trips_path,
                                            const fs::path& contracts_path,
                                            AssembleStats* stats = nullptr) {
    auto trips = load_trips(trips_path);
    std::ifstream contracts(contracts_path);
    if (!contracts) throw DataError("cannot read " + contracts_path.string());
    return assemble_contracts(trips, contracts, stats);
}

GeneratorConfig generator_from_config(const Config& cfg) {
    GeneratorConfig gen;
    gen.n_vehicles = cfg.int_or("n_vehicles", gen.n_vehicles);
    gen.seed = cfg.u64_or("seed", gen.seed);
    gen.contract_start = cfg.get_or("contract_start", gen.contract_start);
    gen.contract_span_days = cfg.int_or("contract_span_days", gen.contract_span_days);
    gen.claim_rate = cfg.num_or("claim_rate", gen.claim_rate);
    gen.saturation_months = cfg.int_or("saturation_months", gen.saturation_months);
    gen.ramp_exponent = cfg.num_or("ramp_exponent", gen.ramp_exponent);
    gen.trips_per_day = cfg.num_or("trips_per_day", gen.trips_per_day);
    gen.trips_per_day_jitter = cfg.num_or("trips_per_day_jitter", gen.trips_per_day_jitter);
    gen.trait_spread = cfg.num_or("trait_spread", gen.trait_spread);
    gen.commute_missing_rate = cfg.num_or("commute_missing_rate", gen.commute_missing_rate);
    gen.classical_signal = cfg.num_or("classical_signal", gen.classical_signal);
    std::map<std::string, double> signal;
    for (const char* trait : {"night", "evening", "daily_km", "speed"}) {
        const std::string key = std::string("signal.") + trait;
        if (cfg.has(key)) signal[trait] = cfg.num_or(key, 0.0);
    }
    if (!signal.empty()) gen.signal = signal;
    return gen;
}

RecipeConfig recipe_from_config(const Config& cfg) {
    RecipeConfig recipe;
    recipe.lump_threshold = cfg.num_or("lump_threshold", recipe.lump_threshold);
    recipe.bag_trees = cfg.int_or("bag_trees", recipe.bag_trees);
    recipe.bag_min_leaf = cfg.int_or("bag_min_leaf", recipe.bag_min_leaf);
    recipe.seed = cfg.u64_or("recipe_seed", recipe.seed);
    if (cfg.get_or("interactions", "") == "default")
        recipe.interaction_sources = default_interaction_sources();
    return recipe;
}

FeatureTable load_dataset(const fs::path& csv_path) {
    fs::path sidecar = csv_path;
    sidecar.replace_extension(".json");
    std::ifstream in(csv_path);
    if (!in) throw DataError("cannot read " + csv_path.string());
    return FeatureTable::read_csv(in, read_text(sidecar));
}

void save_dataset(const FeatureTable& table, const fs::path& csv_path, Manifest& manifest) {
    std::ostringstream csv;
    table.write_csv(csv);
    write_text(csv_path, csv.str());
    fs::path sidecar = csv_path;
    sidecar.replace_extension(".json");
    write_text(sidecar, table.sidecar_json());
    manifest.add_output(csv_path);
    manifest.add_output(sidecar);
}

ColumnOrigin origin_of_column(const std::string& name) {
    for (const auto& t : TelematicsFeatures::names())
        if (name == t) return ColumnOrigin::Telematics;
    if (name.find(':') != std::string::npos) return ColumnOrigin::Interaction;
    return ColumnOrigin::Classical;
}

int cmd_synth(const GlobalOptions& global, const std::string& out_trips,
              const std::string& out_contracts) {
    Manifest manifest;
    manifest.command = "synth";
    manifest.config_path = global.config_path;
    Config cfg = global.load_config();
    for (const auto& [key, value] : cfg.values()) manifest.config[key] = value;

    GeneratorConfig gen = generator_from_config(cfg);
    manifest.seeds["generator"] = gen.seed;
    StageTimer timer(manifest);
    auto data = timer.run("generate", [&] { return generate(gen); });

    const fs::path trips_path = global.resolve(out_trips);
    const fs::path contracts_path = global.resolve(out_contracts);
    timer.run("write", [&] {
        std::ostringstream trips_csv;
        serialize_trips(data.trips, trips_csv);
        write_text(trips_path, trips_csv.str());
        write_text(contracts_path, data.contracts_csv);
    });
    manifest.add_output(trips_path);
    manifest.add_output(contracts_path);
    manifest.write(global.resolve("synth_manifest.json"));
    std::cout << "synth: " << data.trips.size() << " trips, " << gen.n_vehicles
              << " vehicles -> " << trips_path.string() << ", " << contracts_path.string()
              << "\n";
    return 0;
}

int cmd_ingest(const GlobalOptions& global, const std::string& trips_file,
               const std::string& contracts_file, const std::string& out_dir) {
    Manifest manifest;
    manifest.command = "ingest";
    manifest.config_path = global.config_path;
    const fs::path trips_path = global.resolve(trips_file);
    const fs::path contracts_path = global.resolve(contracts_file);
    manifest.add_input(trips_path);
    manifest.add_input(contracts_path);

    StageTimer timer(manifest);
    std::ifstream trips_in(trips_path);
    if (!trips_in) throw DataError("cannot read " + trips_path.string());
    auto parsed = timer.run("parse", [&] { return parse_trips(trips_in); });

    AssembleStats stats;
    std::ifstream contracts_in(contracts_path);
    if (!contracts_in) throw DataError("cannot read " + contracts_path.string());
    auto contracts = timer.run("assemble", [&] {
        return assemble_contracts(parsed.trips, contracts_in, &stats);
    });

    const fs::path dir = global.resolve(out_dir);
    fs::create_directories(dir);
    timer.run("write", [&] {
        std::ostringstream cleaned;
        std::vector<TripRecord> kept;
        for (const auto& c : contracts)
            kept.insert(kept.end(), c.trips.begin(), c.trips.end());
        serialize_trips(kept, cleaned);
        write_text(dir / "cleaned_trips.csv", cleaned.str());

        nlohmann::json errors = nlohmann::json::array();
        for (const auto& e : parsed.errors)
            errors.push_back({{"line", e.line}, {"message", e.message}});
        nlohmann::json report = {
            {"accepted_rows", parsed.trips.size()},
            {"rejected_rows", parsed.errors.size()},
            {"row_errors", errors},
            {"contracts", contracts.size()},
            {"vins_without_full_year", stats.vins_without_full_year},
            {"trips_outside_window", stats.trips_outside_window},
            {"zero_trip_vehicles", stats.zero_trip_vehicles}};
        write_text(dir / "ingest_report.json", report.dump(2) + "\n");
    });
    manifest.add_output(dir / "cleaned_trips.csv");
    manifest.add_output(dir / "ingest_report.json");
    manifest.write(dir / "ingest_manifest.json");
    std::cout << "ingest: " << contracts.size() << " contracts, " << parsed.errors.size()
              << " rejected rows -> " << (dir / "ingest_report.json").string() << "\n";
    return 0;
}

int cmd_featurize(const GlobalOptions& global, const std::string& trips_file,
                  const std::string& contracts_file, const std::string& method_name, int k,
                  const std::string& out_file) {
    Manifest manifest;
    manifest.command = "featurize";
    manifest.config_path = global.config_path;
    const fs::path trips_path = global.resolve(trips_file);
    const fs::path contracts_path = global.resolve(contracts_file);
    manifest.add_input(trips_path);
    manifest.add_input(contracts_path);

    StageTimer timer(manifest);
    auto contracts =
        timer.run("load", [&] { return load_contracts(trips_path, contracts_path); });
    const LeapMethod method = leap_method_from_string(method_name);
    DatasetStats stats;
    auto table =
        timer.run("featurize", [&] { return build_dataset(contracts, {method, k}, &stats); });
    if (stats.excluded_zero_trip > 0)
        std::cerr << "excluded " << stats.excluded_zero_trip << " zero-trip vehicles\n";

    save_dataset(table, global.resolve(out_file), manifest);
    manifest.write(global.resolve(out_file + ".manifest.json"));
    std::cout << "featurize: D_" << k << "_" << method_name << " with " << table.n_rows()
              << " rows, " << table.n_cols() << " feature columns -> " << out_file << "\n";
    return 0;
}

int cmd_prep(const GlobalOptions& global, const std::string& dataset_file, double train_frac,
             std::uint64_t seed, const std::string& out_dir) {
    Manifest manifest;
    manifest.command = "prep";
    manifest.config_path = global.config_path;
    manifest.seeds["split"] = seed;
    Config cfg = global.load_config();
    RecipeConfig recipe_config = recipe_from_config(cfg);

    const fs::path dataset_path = global.resolve(dataset_file);
    manifest.add_input(dataset_path);
    StageTimer timer(manifest);
    auto table = timer.run("load", [&] { return load_dataset(dataset_path); });
    auto [train_raw, test_raw] = split_train_test(table, train_frac, seed);
    auto recipe = timer.run("fit", [&] { return recipe_fit(train_raw, recipe_config); });
    auto train = timer.run("apply_train", [&] { return recipe_apply(recipe, train_raw); });
    auto test = timer.run("apply_test", [&] { return recipe_apply(recipe, test_raw); });

    const fs::path dir = global.resolve(out_dir);
    fs::create_directories(dir);
    write_text(dir / "recipe.json", recipe.to_json() + "\n");
    manifest.add_output(dir / "recipe.json");
    save_dataset(train, dir / "train_prepped.csv", manifest);
    save_dataset(test, dir / "test_prepped.csv", manifest);
    manifest.write(dir / "prep_manifest.json");
    std::cout << "prep: " << train.n_rows() << " train rows, " << test.n_rows()
              << " test rows, " << train.n_cols() << " columns -> " << dir.string() << "\n";
    return 0;
}

int cmd_tune(const GlobalOptions& global, const std::string& dataset_file,
             const std::string& model, double train_frac, std::uint64_t seed, int folds,
             const std::string& out_file, int forest_trees, int budget_initial,
             int budget_total) {
    Manifest manifest;
    manifest.command = "tune";
    manifest.config_path = global.config_path;
    manifest.seeds["split"] = seed;
    manifest.seeds["cv"] = seed + 1;
    Config cfg = global.load_config();
    RecipeConfig recipe_config = recipe_from_config(cfg);

    const fs::path dataset_path = global.resolve(dataset_file);
    manifest.add_input(dataset_path);
    StageTimer timer(manifest);
    auto table = timer.run("load", [&] { return load_dataset(dataset_path); });
    auto [train_raw, test_raw] = split_train_test(table, train_frac, seed);
    auto plan = CvPlan::stratified(train_raw.response(), folds, seed + 1);

    TuneResult result = timer.run("tune", [&]() -> TuneResult {
        if (model == "lasso")
            return grid_search_glm(train_raw, lambda_grid(), {1.0}, plan, recipe_config);
        if (model == "elasticnet")
            return grid_search_glm(train_raw, lambda_grid(), {0.0, 0.25, 0.5, 0.75, 1.0}, plan,
                                   recipe_config);
        if (model == "forest") {
            ForestSpec base;
            base.n_trees = forest_trees;
            base.seed = seed + 2;
            const int max_p = static_cast<int>(table.n_cols());
            IntBox bounds{{{1, max_p}, {2, 100}}};
            return bayes_opt_forest(train_raw, bounds, plan, {budget_initial, budget_total},
                                    base, recipe_config, global.jobs);
        }
        throw UsageError("unknown model '" + model + "' (lasso, elasticnet, forest)");
    });

    const fs::path out_path = global.resolve(out_file);
    std::ostringstream csv;
    result.write_csv(csv);
    write_text(out_path, csv.str());
    manifest.add_output(out_path);
    fs::path summary = out_path;
    summary.replace_extension(".summary.json");
    write_text(summary, result.summary_json() + "\n");
    manifest.add_output(summary);
    manifest.write(global.resolve(out_file + ".manifest.json"));

    const auto& best = result.best();
    std::cout << "tune " << model << ": best";
    for (const auto& [name, value] : best.params) std::cout << ' ' << name << '=' << value;
    std::cout << " mean_cv_auc=" << best.mean_auc << " sd=" << best.sd_auc << "\n";
    return 0;
}

int cmd_fit(const GlobalOptions& global, const std::string& dataset_file,
            const std::string& model, double train_frac, std::uint64_t seed, double lambda,
            double alpha, int p_star, int n_star, int forest_trees,
            const std::string& out_file) {
    Manifest manifest;
    manifest.command = "fit";
    manifest.config_path = global.config_path;
    manifest.seeds["split"] = seed;
    Config cfg = global.load_config();
    RecipeConfig recipe_config = recipe_from_config(cfg);

    const fs::path dataset_path = global.resolve(dataset_file);
    manifest.add_input(dataset_path);
    StageTimer timer(manifest);
    auto table = timer.run("load", [&] { return load_dataset(dataset_path); });
    auto [train_raw, test_raw] = split_train_test(table, train_frac, seed);
    auto recipe = timer.run("recipe", [&] { return recipe_fit(train_raw, recipe_config); });
    auto train = recipe_apply(recipe, train_raw);

    nlohmann::json doc;
    doc["recipe"] = nlohmann::json::parse(recipe.to_json());
    doc["split"] = {{"train_frac", train_frac}, {"seed", seed}};
    nlohmann::json importance = nlohmann::json::array();

    if (model == "lasso" || model == "elasticnet") {
        const double a = model == "lasso" ? 1.0 : alpha;
        auto glm = timer.run("fit", [&] { return fit_penalized(train, {lambda, a}); });
        doc["type"] = "glm";
        doc["model"] = nlohmann::json::parse(glm.to_json());
        for (const auto& [col, value] : glm_importance(glm))
            importance.push_back({{"column", col}, {"importance", value}});
    } else if (model == "forest") {
        ForestSpec spec;
        spec.n_trees = forest_trees;
        spec.features_per_tree = p_star;
        spec.min_split = n_star;
        spec.seed = seed + 2;
        auto forest = timer.run("fit", [&] { return fit_forest(train, spec, global.jobs); });
        doc["type"] = "forest";
        doc["model"] = nlohmann::json::parse(forest.to_json());
        for (const auto& [col, value] : forest_importance(forest))
            importance.push_back({{"column", col}, {"importance", value}});
    } else {
        throw UsageError("unknown model '" + model + "' (lasso, elasticnet, forest)");
    }
    doc["importance"] = importance;

    const fs::path out_path = global.resolve(out_file);
    write_text(out_path, doc.dump(2) + "\n");
    manifest.add_output(out_path);
    manifest.write(global.resolve(out_file + ".manifest.json"));
    std::cout << "fit " << model << ": " << train.n_rows() << " training rows -> "
              << out_path.string() << "\n";
    return 0;
}

int cmd_eval(const GlobalOptions& global, const std::string& model_file,
             const std::string& dataset_file, int b, std::uint64_t bootstrap_seed,
             const std::string& out_file) {
    Manifest manifest;
    manifest.command = "eval";
    manifest.config_path = global.config_path;
    manifest.seeds["bootstrap"] = bootstrap_seed;

    const fs::path model_path = global.resolve(model_file);
    const fs::path dataset_path = global.resolve(dataset_file);
    manifest.add_input(model_path);
    manifest.add_input(dataset_path);

    StageTimer timer(manifest);
    auto envelope = nlohmann::json::parse(read_text(model_path));
    auto recipe = FittedRecipe::from_json(envelope.at("recipe").dump());
    auto table = timer.run("load", [&] { return load_dataset(dataset_path); });
    const double train_frac = envelope.at("split").at("train_frac").get<double>();
    const std::uint64_t split_seed = envelope.at("split").at("seed").get<std::uint64_t>();
    auto [train_raw, test_raw] = split_train_test(table, train_frac, split_seed);
    auto test = recipe_apply(recipe, test_raw);

    std::vector<double> scores;
    if (envelope.at("type") == "glm") {
        auto glm = GlmModel::from_json(envelope.at("model").dump());
        scores = predict(glm, test);
    } else {
        auto forest = ForestModel::from_json(envelope.at("model").dump());
        scores = forest_predict(forest, test);
    }
    const double point = auc(scores, test.response());

    nlohmann::json doc = {{"point_auc", point}, {"test_rows", test.n_rows()}, {"b", b}};
    if (b > 0) {
        int redraws = 0;
        auto reps = timer.run("bootstrap", [&] {
            return bootstrap_auc(scores, test.response(), b, bootstrap_seed, &redraws);
        });
        std::vector<double> sorted = reps;
        std::sort(sorted.begin(), sorted.end());
        doc["redraws"] = redraws;
        nlohmann::json quartiles;
        quartiles["min"] = sorted.front();
        quartiles["q1"] = sorted[sorted.size() / 4];
        quartiles["median"] = median(reps);
        quartiles["q3"] = sorted[3 * sorted.size() / 4];
        quartiles["max"] = sorted.back();
        doc["replicates"] = quartiles;
    }

    const fs::path out_path = global.resolve(out_file);
    write_text(out_path, doc.dump(2) + "\n");
    manifest.add_output(out_path);
    manifest.write(global.resolve(out_file + ".manifest.json"));
    std::cout << "eval: point AUC " << point << " on " << test.n_rows() << " test rows -> "
              << out_path.string() << "\n";
    return 0;
}

int cmd_study(const GlobalOptions& global, const std::string& trips_file,
              const std::string& contracts_file, const std::string& method_name, int b,
              std::uint64_t seed, double delta, const std::string& out_dir) {
    Manifest manifest;
    manifest.command = "study";
    manifest.config_path = global.config_path;
    Config cfg = global.load_config();
    for (const auto& [key, value] : cfg.values()) manifest.config[key] = value;

    StageTimer timer(manifest);
    std::vector<VehicleContract> contracts;
    if (!trips_file.empty()) {
        const fs::path trips_path = global.resolve(trips_file);
        const fs::path contracts_path = global.resolve(contracts_file);
        manifest.add_input(trips_path);
        manifest.add_input(contracts_path);
        contracts =
            timer.run("load", [&] { return load_contracts(trips_path, contracts_path); });
    } else {
        // No input files: generate a synthetic cohort from the config.
        GeneratorConfig gen = generator_from_config(cfg);
        manifest.seeds["generator"] = gen.seed;
        contracts = timer.run("generate", [&] {
            auto data = generate(gen);
            std::istringstream contracts_csv(data.contracts_csv);
            return assemble_contracts(data.trips, contracts_csv);
        });
    }

    StudyConfig study_config;
    study_config.b = b;
    study_config.delta = delta;
    study_config.split_seed = seed;
    study_config.cv_seed = seed + 1;
    study_config.bootstrap_seed = seed + 2;
    study_config.train_frac = cfg.num_or("train_frac", study_config.train_frac);
    study_config.cv_folds = cfg.int_or("cv_folds", study_config.cv_folds);
    study_config.recipe = recipe_from_config(cfg);
    study_config.jobs = global.jobs;
    manifest.seeds["split"] = study_config.split_seed;
    manifest.seeds["cv"] = study_config.cv_seed;
    manifest.seeds["bootstrap"] = study_config.bootstrap_seed;

    const fs::path dir = global.resolve(out_dir);
    fs::create_directories(dir);

    std::vector<LeapMethod> methods;
    if (method_name == "both") {
        methods = {LeapMethod::TimeLeap, LeapMethod::DistanceLeap};
    } else {
        methods = {leap_method_from_string(method_name)};
    }
    for (LeapMethod method : methods) {
        auto result = timer.run("study_" + to_string(method), [&] {
            return run_study(contracts, method, study_config);
        });
        std::ostringstream csv;
        result.write_csv(csv);
        const fs::path csv_path = dir / ("study_" + to_string(method) + ".csv");
        const fs::path json_path = dir / ("study_" + to_string(method) + "_summary.json");
        write_text(csv_path, csv.str());
        write_text(json_path, result.summary_json() + "\n");
        manifest.add_output(csv_path);
        manifest.add_output(json_path);
        std::cout << "study " << to_string(method)
                  << ": redundancy point k* = " << result.redundancy_k << " (delta " << delta
                  << ", b " << b << ") -> " << csv_path.string() << "\n";
    }
    manifest.write(dir / "study_manifest.json");
    return 0;
}

int cmd_report(const GlobalOptions& global, const std::vector<std::string>& study_summaries,
               const std::vector<std::string>& model_files, const std::string& dataset_file,
               const std::string& out_dir) {
    Manifest manifest;
    manifest.command = "report";
    manifest.config_path = global.config_path;
    const fs::path dir = global.resolve(out_dir);
    fs::create_directories(dir);

    if (!dataset_file.empty()) {
        // Group means of every numeric feature for claimants vs non-claimants
        // with a Welch two-sample test, mirroring the usual feature-screen
        // table.
        const fs::path path = global.resolve(dataset_file);
        manifest.add_input(path);
        auto table = load_dataset(path);
        std::ostringstream csv;
        csv << "feature,origin,mean_nonclaimant,mean_claimant,t_statistic,p_value\n";
        for (size_t j = 0; j < table.n_cols(); ++j) {
            if (table.desc(j).kind != ColumnKind::Numeric) continue;
            std::vector<double> g0, g1;
            const auto& col = table.numeric(j);
            for (size_t i = 0; i < table.n_rows(); ++i) {
                if (std::isnan(col[i])) continue;
                (table.response()[i] ? g1 : g0).push_back(col[i]);
            }
            csv << table.desc(j).name << ',' << to_string(table.desc(j).origin) << ','
                << format_double(mean(g0)) << ',' << format_double(mean(g1)) << ',';
            try {
                auto t = welch_t_test(g0, g1);
                csv << format_double(t.t) << ',' << format_double(t.p) << '\n';
            } catch (const NumericError&) {
                csv << ",\n";  // degenerate column
            }
        }
        const fs::path out_path = dir / "feature_summary.csv";
        write_text(out_path, csv.str());
        manifest.add_output(out_path);
        std::cout << "report: feature group-mean table -> " << out_path.string() << "\n";
    }

    for (const auto& file : study_summaries) {
        const fs::path path = global.resolve(file);
        manifest.add_input(path);
        auto doc = nlohmann::json::parse(read_text(path));
        std::ostringstream csv;
        csv << "k,tuned_lambda,point_auc,min,q1,median,q3,max\n";
        for (const auto& row : doc.at("per_k")) {
            csv << row.at("k").get<int>() << ',' << format_double(row.at("tuned_lambda"))
                << ',' << format_double(row.at("point_auc")) << ','
                << format_double(row.at("min")) << ',' << format_double(row.at("q1")) << ','
                << format_double(row.at("median")) << ',' << format_double(row.at("q3")) << ','
                << format_double(row.at("max")) << '\n';
        }
        const fs::path out_path =
            dir / ("boxplot_" + doc.at("method").get<std::string>() + ".csv");
        write_text(out_path, csv.str());
        manifest.add_output(out_path);
        std::cout << "report: quantile table -> " << out_path.string() << "\n";
    }

    if (!model_files.empty()) {
        std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>> models;
        std::map<std::string, ColumnOrigin> origins;
        for (const auto& file : model_files) {
            const fs::path path = global.resolve(file);
            manifest.add_input(path);
            auto doc = nlohmann::json::parse(read_text(path));
            std::vector<std::pair<std::string, double>> importance;
            for (const auto& row : doc.at("importance")) {
                const std::string column = row.at("column").get<std::string>();
                importance.emplace_back(column, row.at("importance").get<double>());
                origins[column] = origin_of_column(column);
            }
            models.emplace_back(path.stem().string(), std::move(importance));
        }
        auto cmp = compare_importance(models, origins);
        std::ostringstream csv;
        cmp.write_csv(csv);
        csv << "# average rank: telematics " << format_double(cmp.telematics_avg_rank)
            << ", classical " << format_double(cmp.classical_avg_rank) << '\n';
        const fs::path out_path = dir / "importance_ranks.csv";
        write_text(out_path, csv.str());
        manifest.add_output(out_path);
        std::cout << "report: importance ranks (telematics avg " << cmp.telematics_avg_rank
                  << ", classical avg " << cmp.classical_avg_rank << ") -> "
                  << out_path.string() << "\n";
    }
    manifest.write(dir / "report_manifest.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    GlobalOptions global;
    CLI::App app{"telematics claim-risk toolkit"};
    app.require_subcommand(1);
    app.add_option("--workdir", global.workdir, "base directory for relative paths");
    app.add_option("--config", global.config_path, "key = value config file");
    app.add_option("--jobs", global.jobs, "worker parallelism bound");
    app.add_flag("--json-errors", global.json_errors, "emit errors as JSON on stderr");

    auto* synth = app.add_subcommand("synth", "generate synthetic trip and contract data");
    std::string out_trips = "trips.csv", out_contracts = "contracts.csv";
    synth->add_option("--out-trips", out_trips);
    synth->add_option("--out-contracts", out_contracts);

    auto* ingest = app.add_subcommand("ingest", "validate and assemble raw csv inputs");
    std::string trips_file, contracts_file, out_dir = ".";
    ingest->add_option("--trips", trips_file)->required();
    ingest->add_option("--contracts", contracts_file)->required();
    ingest->add_option("--out-dir", out_dir);

    auto* featurize = app.add_subcommand("featurize", "build a D_k dataset");
    std::string method = "tl", dataset_out = "dataset.csv";
    int k = 12;
    featurize->add_option("--trips", trips_file)->required();
    featurize->add_option("--contracts", contracts_file)->required();
    featurize->add_option("--method", method, "tl or dl");
    featurize->add_option("--k", k, "leap index 0..12");
    featurize->add_option("--out", dataset_out);

    auto* prep = app.add_subcommand("prep", "fit and apply the preprocessing recipe");
    std::string dataset_file;
    double train_frac = 0.7;
    std::uint64_t seed = 1;
    prep->add_option("--dataset", dataset_file)->required();
    prep->add_option("--train-frac", train_frac);
    prep->add_option("--seed", seed);
    prep->add_option("--out-dir", out_dir);

    auto* tune = app.add_subcommand("tune", "hyperparameter search with cross-validated AUC");
    std::string model = "lasso", tune_out = "tune.csv";
    int folds = 5, forest_trees = 200, budget_initial = 5, budget_total = 25;
    tune->add_option("--dataset", dataset_file)->required();
    tune->add_option("--model", model, "lasso, elasticnet, or forest");
    tune->add_option("--train-frac", train_frac);
    tune->add_option("--seed", seed);
    tune->add_option("--folds", folds);
    tune->add_option("--forest-trees", forest_trees);
    tune->add_option("--budget-initial", budget_initial);
    tune->add_option("--budget-total", budget_total);
    tune->add_option("--out", tune_out);

    auto* fit = app.add_subcommand("fit", "fit a final model on the training part");
    double lambda = 2.31e-4, alpha = 1.0;
    int p_star = 1, n_star = 39;
    std::string model_out = "model.json";
    fit->add_option("--dataset", dataset_file)->required();
    fit->add_option("--model", model);
    fit->add_option("--train-frac", train_frac);
    fit->add_option("--seed", seed);
    fit->add_option("--lambda", lambda);
    fit->add_option("--alpha", alpha);
    fit->add_option("--p-star", p_star);
    fit->add_option("--n-star", n_star);
    fit->add_option("--forest-trees", forest_trees);
    fit->add_option("--out", model_out);

    auto* eval = app.add_subcommand("eval", "score a fitted model on its held-out rows");
    std::string model_file, eval_out = "eval.json";
    int b = 0;
    std::uint64_t bootstrap_seed = 3;
    eval->add_option("--model", model_file)->required();
    eval->add_option("--dataset", dataset_file)->required();
    eval->add_option("--b", b, "bootstrap replicates (0 = none)");
    eval->add_option("--bootstrap-seed", bootstrap_seed);
    eval->add_option("--out", eval_out);

    auto* study = app.add_subcommand("study", "the full redundancy-point experiment");
    std::string study_method = "tl", study_dir = "study";
    int study_b = 500;
    double delta = 0.005;
    study->add_option("--trips", trips_file, "omit to generate from --config");
    study->add_option("--contracts", contracts_file);
    study->add_option("--method", study_method, "tl, dl, or both");
    study->add_option("--b", study_b);
    study->add_option("--seed", seed);
    study->add_option("--delta", delta);
    study->add_option("--out-dir", study_dir);

    auto* report = app.add_subcommand("report", "plot-ready summaries from artifacts");
    std::vector<std::string> study_summaries, model_files;
    std::string report_dataset;
    report->add_option("--study-summary", study_summaries);
    report->add_option("--model", model_files);
    report->add_option("--dataset", report_dataset, "emit a per-feature group-mean table");
    report->add_option("--out-dir", out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 1;
    }

    try {
        if (synth->parsed()) return cmd_synth(global, out_trips, out_contracts);
        if (ingest->parsed()) return cmd_ingest(global, trips_file, contracts_file, out_dir);
        if (featurize->parsed())
            return cmd_featurize(global, trips_file, contracts_file, method, k, dataset_out);
        if (prep->parsed()) return cmd_prep(global, dataset_file, train_frac, seed, out_dir);
        if (tune->parsed())
            return cmd_tune(global, dataset_file, model, train_frac, seed, folds, tune_out,
                            forest_trees, budget_initial, budget_total);
        if (fit->parsed())
            return cmd_fit(global, dataset_file, model, train_frac, seed, lambda, alpha, p_star,
                           n_star, forest_trees, model_out);
        if (eval->parsed())
            return cmd_eval(global, model_file, dataset_file, b, bootstrap_seed, eval_out);
        if (study->parsed())
            return cmd_study(global, trips_file, contracts_file, study_method, study_b, seed,
                             delta, study_dir);
        if (report->parsed())
            return cmd_report(global, study_summaries, model_files, report_dataset, out_dir);
        throw UsageError("no subcommand given");
    } catch (const std::exception& e) {
        int code = 3;
        const char* kind = "numerical";
        if (dynamic_cast<const UsageError*>(&e)) {
            code = 1;
            kind = "usage";
        } else if (dynamic_cast<const DataError*>(&e)) {
            code = 2;
            kind = "data";
        }
        if (global.json_errors) {
            nlohmann::json err = {{"error", kind}, {"message", e.what()}, {"exit_code", code}};
            std::cerr << err.dump() << "\n";
        } else {
            std::cerr << "error (" << kind << "): " << e.what() << "\n";
        }
        return code;
    }
}
