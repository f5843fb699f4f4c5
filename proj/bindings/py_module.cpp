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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ubirisk/common.hpp"
#include "ubirisk/featurize.hpp"
#include "ubirisk/forest.hpp"
#include "ubirisk/gp.hpp"
#include "ubirisk/linear_model.hpp"
#include "ubirisk/recipe.hpp"
#include "ubirisk/stats.hpp"
#include "ubirisk/study.hpp"
#include "ubirisk/synth.hpp"
#include "ubirisk/trip_store.hpp"
#include "ubirisk/tuning.hpp"

namespace py = pybind11;
using namespace ubirisk;

namespace {

std::vector<TripRecord> trips_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    auto result = parse_trips(in);
    if (!result.errors.empty())
        throw DataError("trip csv has " + std::to_string(result.errors.size()) +
                        " bad rows (first at line " + std::to_string(result.errors[0].line) +
                        ": " + result.errors[0].message + ")");
    return std::move(result.trips);
}

std::vector<VehicleContract> contracts_from_csv(const std::string& trips_csv,
                                                const std::string& contracts_csv) {
    auto trips = trips_from_csv(trips_csv);
    std::istringstream in(contracts_csv);
    return assemble_contracts(trips, in);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "telematics claim-risk toolkit";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<TripRecord>(m, "TripRecord")
        .def(py::init([](const std::string& vin, int number, const std::string& departure,
                         const std::string& arrival, double distance, double max_speed) {
                 TripRecord t;
                 t.vin = vin;
                 t.trip_number = number;
                 auto dep = parse_datetime(departure);
                 auto arr = parse_datetime(arrival);
                 if (!dep || !arr) throw DataError("bad timestamp");
                 t.departure = *dep;
                 t.arrival = *arr;
                 t.distance_km = distance;
                 t.max_speed_kmh = max_speed;
                 return t;
             }),
             py::arg("vin"), py::arg("trip_number"), py::arg("departure"), py::arg("arrival"),
             py::arg("distance_km"), py::arg("max_speed_kmh"))
        .def_readonly("vin", &TripRecord::vin)
        .def_readonly("trip_number", &TripRecord::trip_number)
        .def_readonly("distance_km", &TripRecord::distance_km)
        .def_readonly("max_speed_kmh", &TripRecord::max_speed_kmh)
        .def_property_readonly("departure",
                               [](const TripRecord& t) { return format_datetime(t.departure); })
        .def_property_readonly("arrival",
                               [](const TripRecord& t) { return format_datetime(t.arrival); })
        .def_property_readonly("duration_hours", &TripRecord::duration_hours)
        .def_property_readonly("avg_speed_kmh", &TripRecord::avg_speed_kmh);

    py::class_<TelematicsFeatures>(m, "TelematicsFeatures")
        .def_static("names", [] { return TelematicsFeatures::names(); })
        .def("values", &TelematicsFeatures::values)
        .def("as_dict", [](const TelematicsFeatures& f) {
            py::dict d;
            const auto& names = TelematicsFeatures::names();
            const auto values = f.values();
            for (size_t i = 0; i < names.size(); ++i) d[names[i].c_str()] = values[i];
            return d;
        });

    m.def("telematics_features", &telematics_features, py::arg("trips"),
          py::arg("exposure_days"), "The 14 vehicle-level features from a list of trips.");

    py::class_<FeatureTable>(m, "FeatureTable")
        .def_property_readonly("n_rows", &FeatureTable::n_rows)
        .def_property_readonly("n_cols", &FeatureTable::n_cols)
        .def_property_readonly("row_ids", &FeatureTable::row_ids)
        .def_property_readonly("response", &FeatureTable::response)
        .def("column_names", &FeatureTable::column_names)
        .def("numeric",
             py::overload_cast<const std::string&>(&FeatureTable::numeric, py::const_))
        .def("to_csv",
             [](const FeatureTable& t) {
                 std::ostringstream out;
                 t.write_csv(out);
                 return out.str();
             })
        .def("sidecar_json", &FeatureTable::sidecar_json)
        .def_static("from_csv", [](const std::string& csv, const std::string& sidecar) {
            std::istringstream in(csv);
            return FeatureTable::read_csv(in, sidecar);
        });

    m.def(
        "build_dataset",
        [](const std::string& trips_csv, const std::string& contracts_csv,
           const std::string& method, int k) {
            auto contracts = contracts_from_csv(trips_csv, contracts_csv);
            return build_dataset(contracts, {leap_method_from_string(method), k});
        },
        py::arg("trips_csv"), py::arg("contracts_csv"), py::arg("method") = "tl",
        py::arg("k") = 12, "Assemble contracts from CSV text and build the D_k dataset.");

    m.def("split_train_test", &split_train_test, py::arg("table"), py::arg("train_frac"),
          py::arg("seed"));

    // Preprocessing.
    py::class_<RecipeConfig>(m, "RecipeConfig")
        .def(py::init<>())
        .def_readwrite("lump_threshold", &RecipeConfig::lump_threshold)
        .def_readwrite("bag_trees", &RecipeConfig::bag_trees)
        .def_readwrite("bag_min_leaf", &RecipeConfig::bag_min_leaf)
        .def_readwrite("interaction_sources", &RecipeConfig::interaction_sources)
        .def_readwrite("seed", &RecipeConfig::seed);

    py::class_<FittedRecipe>(m, "FittedRecipe")
        .def("apply",
             [](const FittedRecipe& r, const FeatureTable& t) { return recipe_apply(r, t); })
        .def("output_columns", &FittedRecipe::output_columns)
        .def("to_json", &FittedRecipe::to_json)
        .def_static("from_json", &FittedRecipe::from_json);

    m.def("recipe_fit", &recipe_fit, py::arg("train"), py::arg("config") = RecipeConfig{});
    m.def("yeo_johnson", &yeo_johnson, py::arg("x"), py::arg("theta"));
    m.def("yeo_johnson_fit", &yeo_johnson_fit, py::arg("column"));
    m.def("default_interaction_sources", &default_interaction_sources);
    m.def("expand_interactions", &expand_interactions, py::arg("table"), py::arg("sources"));

    // Linear models.
    py::class_<GlmModel>(m, "GlmModel")
        .def_readonly("intercept", &GlmModel::intercept)
        .def_readonly("coef", &GlmModel::coef)
        .def_readonly("columns", &GlmModel::columns)
        .def_property_readonly("lambda_", [](const GlmModel& g) { return g.penalty.lambda; })
        .def_property_readonly("alpha", [](const GlmModel& g) { return g.penalty.alpha; })
        .def("predict", [](const GlmModel& g, const FeatureTable& t) { return predict(g, t); })
        .def("importance", [](const GlmModel& g) { return glm_importance(g); })
        .def("to_json", &GlmModel::to_json)
        .def_static("from_json", &GlmModel::from_json);

    m.def(
        "fit_penalized",
        [](const FeatureTable& table, double lambda, double alpha) {
            return fit_penalized(table, {lambda, alpha});
        },
        py::arg("table"), py::arg("lambda_"), py::arg("alpha") = 1.0);
    m.def("fit_logistic_irls", &fit_logistic_irls, py::arg("table"));
    m.def(
        "cross_entropy",
        [](double intercept, const std::vector<double>& coef, const FeatureTable& t) {
            return cross_entropy(intercept, coef, t);
        },
        py::arg("intercept"), py::arg("coef"), py::arg("table"));

    // Forest.
    py::class_<ForestSpec>(m, "ForestSpec")
        .def(py::init<>())
        .def_readwrite("n_trees", &ForestSpec::n_trees)
        .def_readwrite("features_per_tree", &ForestSpec::features_per_tree)
        .def_readwrite("min_split", &ForestSpec::min_split)
        .def_readwrite("seed", &ForestSpec::seed)
        .def_readwrite("bootstrap", &ForestSpec::bootstrap);

    py::class_<ForestModel>(m, "ForestModel")
        .def("predict",
             [](const ForestModel& f, const FeatureTable& t) { return forest_predict(f, t); })
        .def("importance", [](const ForestModel& f) { return forest_importance(f); })
        .def("to_json", &ForestModel::to_json)
        .def_static("from_json", &ForestModel::from_json);

    m.def("fit_forest", &fit_forest, py::arg("table"), py::arg("spec"), py::arg("jobs") = 1);
    m.def("gini_impurity", &gini_impurity, py::arg("count0"), py::arg("count1"));

    // Metrics and tuning.
    m.def(
        "auc",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            return auc(scores, labels);
        },
        py::arg("scores"), py::arg("labels"));
    m.def("lambda_grid", &lambda_grid);
    m.def(
        "welch_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            auto r = welch_t_test(a, b);
            return py::make_tuple(r.t, r.p);
        },
        py::arg("group0"), py::arg("group1"), "Returns (t statistic, two-sided p-value).");
    m.def(
        "bootstrap_auc",
        [](const std::vector<double>& scores, const std::vector<int>& labels, int b,
           std::uint64_t seed) { return bootstrap_auc(scores, labels, b, seed); },
        py::arg("scores"), py::arg("labels"), py::arg("b"), py::arg("seed"));

    // The study.
    m.def(
        "run_study",
        [](const std::string& trips_csv, const std::string& contracts_csv,
           const std::string& method, int b, std::uint64_t seed, double delta, int jobs) {
            auto contracts = contracts_from_csv(trips_csv, contracts_csv);
            StudyConfig config;
            config.b = b;
            config.split_seed = seed;
            config.cv_seed = seed + 1;
            config.bootstrap_seed = seed + 2;
            config.delta = delta;
            config.jobs = jobs;
            auto result = run_study(contracts, leap_method_from_string(method), config);
            std::ostringstream csv;
            result.write_csv(csv);
            return py::make_tuple(result.redundancy_k, result.summary_json(), csv.str());
        },
        py::arg("trips_csv"), py::arg("contracts_csv"), py::arg("method") = "tl",
        py::arg("b") = 500, py::arg("seed") = 1, py::arg("delta") = 0.005, py::arg("jobs") = 1,
        "Returns (redundancy_k, summary_json, replicates_csv).");

    // Synthetic data.
    m.def(
        "generate_synthetic",
        [](int n_vehicles, std::uint64_t seed, double claim_rate, int saturation_months,
           double trips_per_day) {
            GeneratorConfig config;
            config.n_vehicles = n_vehicles;
            config.seed = seed;
            config.claim_rate = claim_rate;
            config.saturation_months = saturation_months;
            config.trips_per_day = trips_per_day;
            auto data = generate(config);
            std::ostringstream trips_csv;
            serialize_trips(data.trips, trips_csv);
            return py::make_tuple(trips_csv.str(), data.contracts_csv);
        },
        py::arg("n_vehicles"), py::arg("seed") = 1, py::arg("claim_rate") = 0.053,
        py::arg("saturation_months") = 3, py::arg("trips_per_day") = 4.6,
        "Returns (trips_csv, contracts_csv).");
}
