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

#include "ubirisk/linear_model.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <json.hpp>

#include "ubirisk/common.hpp"
#include "ubirisk/csv.hpp"
#include "ubirisk/stats.hpp"

namespace ubirisk {

namespace {

constexpr double kProbClamp = 1e-12;
constexpr double kWeightFloor = 1e-6;

struct Design {
    std::vector<const std::vector<double>*> cols;
    const std::vector<int>* y;
    size_t n;
    size_t p;
};

Design make_design(const FeatureTable& table) {
    if (table.n_rows() == 0) throw DataError("empty table");
    Design d;
    d.n = table.n_rows();
    d.p = table.n_cols();
    d.y = &table.response();
    d.cols.reserve(d.p);
    for (size_t j = 0; j < d.p; ++j) d.cols.push_back(&table.numeric(j));
    return d;
}

void linear_predictor(const Design& d, double intercept, std::span<const double> coef,
                      std::vector<double>& eta) {
    eta.assign(d.n, intercept);
    for (size_t j = 0; j < d.p; ++j) {
        const double b = coef[j];
        if (b == 0.0) continue;
        const auto& col = *d.cols[j];
        for (size_t i = 0; i < d.n; ++i) eta[i] += b * col[i];
    }
}

double mean_cross_entropy(const Design& d, const std::vector<double>& eta) {
    double loss = 0.0;
    for (size_t i = 0; i < d.n; ++i) {
        double p = sigmoid(eta[i]);
        p = std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
        loss += (*d.y)[i] ? -std::log(p) : -std::log(1.0 - p);
    }
    return loss / static_cast<double>(d.n);
}

double penalty_value(const PenaltySpec& penalty, std::span<const double> coef) {
    double l1 = 0.0, l2 = 0.0;
    for (double b : coef) {
        l1 += std::fabs(b);
        l2 += b * b;
    }
    return penalty.lambda * ((1.0 - penalty.alpha) * 0.5 * l2 + penalty.alpha * l1);
}

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

double clamped_mean_response(const Design& d) {
    double s = 0.0;
    for (int v : *d.y) s += v;
    double m = s / static_cast<double>(d.n);
    return std::min(1.0 - kProbClamp, std::max(kProbClamp, m));
}

/// Max KKT violation of the elastic-net optimality conditions given the
/// gradient of the smooth part.
double kkt_violation_from_gradient(const std::vector<double>& grad, std::span<const double> coef,
                                   const PenaltySpec& penalty) {
    double worst = std::fabs(grad[0]);  // unpenalized intercept: gradient must vanish
    const double l1 = penalty.lambda * penalty.alpha;
    const double l2 = penalty.lambda * (1.0 - penalty.alpha);
    for (size_t j = 0; j < coef.size(); ++j) {
        const double g = grad[j + 1] + l2 * coef[j];
        double v;
        if (coef[j] == 0.0) {
            v = std::max(0.0, std::fabs(g) - l1);
        } else {
            v = std::fabs(g + l1 * (coef[j] > 0.0 ? 1.0 : -1.0));
        }
        worst = std::max(worst, v);
    }
    return worst;
}

std::vector<double> gradient(const Design& d, const std::vector<double>& eta) {
    std::vector<double> grad(d.p + 1, 0.0);
    const double inv_n = 1.0 / static_cast<double>(d.n);
    std::vector<double> resid(d.n);
    for (size_t i = 0; i < d.n; ++i) resid[i] = sigmoid(eta[i]) - (*d.y)[i];
    for (size_t i = 0; i < d.n; ++i) grad[0] += resid[i];
    grad[0] *= inv_n;
    for (size_t j = 0; j < d.p; ++j) {
        const auto& col = *d.cols[j];
        double g = 0.0;
        for (size_t i = 0; i < d.n; ++i) g += col[i] * resid[i];
        grad[j + 1] = g * inv_n;
    }
    return grad;
}

}  // namespace

double cross_entropy(double intercept, std::span<const double> coef, const FeatureTable& table) {
    Design d = make_design(table);
    if (coef.size() != d.p) throw DataError("cross_entropy: coefficient length mismatch");
    std::vector<double> eta;
    linear_predictor(d, intercept, coef, eta);
    return mean_cross_entropy(d, eta);
}

double cross_entropy(const GlmModel& model, const FeatureTable& table) {
    return cross_entropy(model.intercept, model.coef, table);
}

std::vector<double> cross_entropy_gradient(double intercept, std::span<const double> coef,
                                           const FeatureTable& table) {
    Design d = make_design(table);
    if (coef.size() != d.p) throw DataError("cross_entropy_gradient: coefficient length mismatch");
    std::vector<double> eta;
    linear_predictor(d, intercept, coef, eta);
    return gradient(d, eta);
}

GlmModel fit_logistic_irls(const FeatureTable& table) {
    Design d = make_design(table);
    const auto n = static_cast<Eigen::Index>(d.n);
    const auto p = static_cast<Eigen::Index>(d.p);

    Eigen::MatrixXd X(n, p + 1);
    for (Eigen::Index i = 0; i < n; ++i) X(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) X(i, j + 1) = (*d.cols[j])[i];
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = (*d.y)[i];

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
    beta(0) = logit(clamped_mean_response(d));

    const double score_tol = 1e-8 * static_cast<double>(d.n);
    constexpr int kMaxIter = 100;
    constexpr double kDivergedNorm = 1e3;

    Eigen::VectorXd eta = X * beta;
    auto loss_of = [&](const Eigen::VectorXd& e) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double pr = sigmoid(e(i));
            pr = std::min(1.0 - kProbClamp, std::max(kProbClamp, pr));
            total += y(i) ? -std::log(pr) : -std::log(1.0 - pr);
        }
        return total / static_cast<double>(d.n);
    };
    double loss = loss_of(eta);

    for (int iter = 0; iter < kMaxIter; ++iter) {
        Eigen::VectorXd prob(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            prob(i) = sigmoid(eta(i));
            w(i) = std::max(prob(i) * (1.0 - prob(i)), kWeightFloor);
        }
        Eigen::VectorXd score = X.transpose() * (y - prob);
        if (score.lpNorm<Eigen::Infinity>() <= score_tol) {
            GlmModel model;
            model.intercept = beta(0);
            model.coef.assign(beta.data() + 1, beta.data() + 1 + p);
            model.columns = table.column_names();
            model.penalty = {0.0, 1.0};
            model.report.outer_iterations = iter;
            model.report.final_objective = loss;
            model.report.converged = true;
            return model;
        }

        Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
        Eigen::LDLT<Eigen::MatrixXd> solver(xtwx);
        if (solver.info() != Eigen::Success || solver.isNegative() ||
            solver.vectorD().minCoeff() < 1e-10 * xtwx.diagonal().maxCoeff())
            throw NumericError("fit_logistic_irls: design is numerically rank-deficient");
        Eigen::VectorXd delta = solver.solve(score);

        // Step-halving keeps the loss non-increasing.
        double t = 1.0;
        Eigen::VectorXd beta_new, eta_new;
        double loss_new;
        for (int halving = 0;; ++halving) {
            beta_new = beta + t * delta;
            eta_new = X * beta_new;
            loss_new = loss_of(eta_new);
            if (loss_new <= loss + 1e-14) break;
            if (halving >= 40)
                throw NumericError("fit_logistic_irls: line search failed to improve the loss");
            t *= 0.5;
        }
        beta = beta_new;
        eta = eta_new;
        loss = loss_new;

        // Separation: the likelihood saturates while coefficients run off. A
        // vanishing loss with large coefficients means the MLE does not exist.
        const double beta_norm = beta.lpNorm<Eigen::Infinity>();
        if (beta_norm > kDivergedNorm || (loss < 1e-4 && beta_norm > 12.0)) {
            std::string offenders;
            for (Eigen::Index j = 1; j <= p; ++j) {
                if (std::fabs(beta(j)) > std::max(6.0, 0.5 * beta_norm)) {
                    if (!offenders.empty()) offenders += ", ";
                    offenders += table.column_names()[static_cast<size_t>(j - 1)];
                }
            }
            throw NumericError("fit_logistic_irls: separation detected, coefficients diverge (" +
                               (offenders.empty() ? std::string("intercept") : offenders) + ")");
        }
    }
    throw NumericError("fit_logistic_irls: no convergence after 100 iterations");
}

GlmModel fit_penalized(const FeatureTable& table, PenaltySpec penalty,
                       const GlmFitOptions& options) {
    if (penalty.lambda < 0.0) throw UsageError("penalty lambda must be >= 0");
    if (penalty.alpha < 0.0 || penalty.alpha > 1.0)
        throw UsageError("penalty alpha must be in [0, 1]");
    Design d = make_design(table);
    const double inv_n = 1.0 / static_cast<double>(d.n);
    const double l1 = penalty.lambda * penalty.alpha;
    const double l2 = penalty.lambda * (1.0 - penalty.alpha);

    double intercept;
    std::vector<double> coef;
    if (options.warm_start) {
        if (options.warm_start->coef.size() != d.p)
            throw UsageError("warm start has wrong coefficient length");
        intercept = options.warm_start->intercept;
        coef = options.warm_start->coef;
    } else {
        intercept = logit(clamped_mean_response(d));
        coef.assign(d.p, 0.0);
    }

    std::vector<double> eta;
    linear_predictor(d, intercept, coef, eta);
    double objective = mean_cross_entropy(d, eta) + penalty_value(penalty, coef);

    GlmModel model;
    model.columns = table.column_names();
    model.penalty = penalty;
    model.report.objective_trace.push_back(objective);

    // A warm start from a neighbouring penalty often satisfies this
    // penalty's optimality conditions outright.
    {
        auto grad = gradient(d, eta);
        const double entry_target = penalty.lambda == 0.0 ? 1e-9 : 6e-7;
        if (kkt_violation_from_gradient(grad, coef, penalty) <= entry_target) {
            model.intercept = intercept;
            model.coef = std::move(coef);
            model.report.outer_iterations = 0;
            model.report.final_objective = objective;
            model.report.converged = true;
            return model;
        }
    }

    // KKT targets: tight enough for certificate checks downstream; the exact
    // unpenalized fit needs a tighter gradient to pin coefficients to IRLS.
    const double kkt_target = penalty.lambda == 0.0 ? 1e-9 : 6e-7;
    // Inner sweeps stop once the curvature-scaled steps fall below this; it
    // tightens whenever the true KKT check rejects a converged objective.
    double inner_eps = 0.05 * kkt_target;

    // Gram-form coordinate descent: the quadratic subproblem is expressed
    // through (1/n) X^T W X, so every soft-threshold update costs O(p)
    // rather than O(n).
    std::vector<double> w(d.n), z(d.n), wx(d.n);
    std::vector<double> gram(d.p * d.p), q(d.p), g0(d.p), t(d.p);
    std::vector<double> cand_coef;
    int outer = 0;
    bool converged = false;
    for (outer = 1; outer <= options.max_outer; ++outer) {
        // Quadratic approximation at the current iterate.
        double sw = 0.0, qz0 = 0.0;
        for (size_t i = 0; i < d.n; ++i) {
            const double pr = sigmoid(eta[i]);
            const double wi = std::max(pr * (1.0 - pr), kWeightFloor);
            w[i] = wi;
            z[i] = eta[i] + ((*d.y)[i] - pr) / wi;
            sw += wi;
            qz0 += wi * z[i];
        }
        sw *= inv_n;
        qz0 *= inv_n;
        for (size_t j = 0; j < d.p; ++j) {
            const auto& colj = *d.cols[j];
            double acc_q = 0.0, acc_0 = 0.0;
            for (size_t i = 0; i < d.n; ++i) {
                wx[i] = w[i] * colj[i];
                acc_q += wx[i] * z[i];
                acc_0 += wx[i];
            }
            q[j] = acc_q * inv_n;
            g0[j] = acc_0 * inv_n;
            for (size_t l = 0; l <= j; ++l) {
                const auto& coll = *d.cols[l];
                double acc = 0.0;
                for (size_t i = 0; i < d.n; ++i) acc += wx[i] * coll[i];
                gram[j * d.p + l] = acc * inv_n;
                gram[l * d.p + j] = gram[j * d.p + l];
            }
        }

        double cand_intercept = intercept;
        cand_coef = coef;
        // t_j = sum_l G_jl beta_l and i0 = sum_l g0_l beta_l, kept incremental.
        double i0 = 0.0;
        for (size_t j = 0; j < d.p; ++j) {
            double acc = 0.0;
            for (size_t l = 0; l < d.p; ++l) acc += gram[j * d.p + l] * cand_coef[l];
            t[j] = acc;
            i0 += g0[j] * cand_coef[j];
        }

        for (int sweep = 0; sweep < options.max_inner; ++sweep) {
            double max_step = 0.0;  // curvature-scaled: |delta| * (v_j + l2)
            const double new_intercept = (qz0 - i0) / sw;
            const double delta0 = new_intercept - cand_intercept;
            if (delta0 != 0.0) {
                cand_intercept = new_intercept;
                max_step = std::fabs(delta0) * sw;
            }
            for (size_t j = 0; j < d.p; ++j) {
                const double vj = gram[j * d.p + j];
                if (vj <= 0.0) continue;
                const double u = q[j] - (t[j] - vj * cand_coef[j]) - cand_intercept * g0[j];
                const double updated = soft_threshold(u, l1) / (vj + l2);
                const double step = updated - cand_coef[j];
                if (step != 0.0) {
                    cand_coef[j] = updated;
                    const double* grow = &gram[j * d.p];  // symmetric: row j = column j
                    for (size_t l = 0; l < d.p; ++l) t[l] += grow[l] * step;
                    i0 += g0[j] * step;
                    max_step = std::max(max_step, std::fabs(step) * (vj + l2));
                }
            }
            if (max_step < inner_eps) break;
        }

        // Proximal Newton steps are not guaranteed monotone; backtrack toward
        // the previous iterate until the true objective does not increase.
        double t = 1.0;
        double new_objective;
        std::vector<double> trial_coef(d.p);
        double trial_intercept;
        while (true) {
            trial_intercept = intercept + t * (cand_intercept - intercept);
            for (size_t j = 0; j < d.p; ++j)
                trial_coef[j] = coef[j] + t * (cand_coef[j] - coef[j]);
            linear_predictor(d, trial_intercept, trial_coef, eta);
            new_objective = mean_cross_entropy(d, eta) + penalty_value(penalty, trial_coef);
            if (new_objective <= objective + 1e-15 || t < 1e-10) break;
            t *= 0.5;
        }
        intercept = trial_intercept;
        coef = trial_coef;
        const double prev_objective = objective;
        objective = std::min(objective, new_objective);
        model.report.objective_trace.push_back(objective);

        // Coefficients this large on standardized columns mean the penalty is
        // too weak to hold a (quasi-)separable fit together.
        double coef_norm = 0.0;
        for (double b : coef) coef_norm = std::max(coef_norm, std::fabs(b));
        if (coef_norm > 30.0)
            throw NumericError(
                "fit_penalized: coefficients diverge; data separable at this penalty");

        if (std::fabs(prev_objective - new_objective) <=
            options.tol * std::max(1.0, std::fabs(prev_objective))) {
            auto grad = gradient(d, eta);
            if (kkt_violation_from_gradient(grad, coef, penalty) <= kkt_target) {
                converged = true;
                break;
            }
            inner_eps = std::max(inner_eps * 0.1, 1e-15);
        }
    }

    if (!converged) {
        std::string trace;
        for (double o : model.report.objective_trace) {
            if (!trace.empty()) trace += ", ";
            trace += format_double(o);
        }
        throw NumericError("fit_penalized: no convergence after " +
                           std::to_string(options.max_outer) +
                           " outer iterations; objective trace: " + trace);
    }

    model.intercept = intercept;
    model.coef = std::move(coef);
    model.report.outer_iterations = outer;
    model.report.final_objective = objective;
    model.report.converged = true;
    return model;
}

std::vector<GlmModel> fit_penalized_path(const FeatureTable& table,
                                         const std::vector<double>& lambdas, double alpha,
                                         const GlmFitOptions& options) {
    std::vector<GlmModel> models;
    models.reserve(lambdas.size());
    GlmFitOptions opts = options;
    for (double lambda : lambdas) {
        opts.warm_start = models.empty() ? options.warm_start : &models.back();
        models.push_back(fit_penalized(table, {lambda, alpha}, opts));
    }
    return models;
}

std::vector<double> predict(const GlmModel& model, const FeatureTable& table) {
    if (table.column_names() != model.columns)
        throw DataError("predict: table columns do not match the model's training contract");
    Design d = make_design(table);
    std::vector<double> eta;
    linear_predictor(d, model.intercept, model.coef, eta);
    for (auto& e : eta) e = sigmoid(e);
    return eta;
}

std::vector<std::pair<std::string, double>> glm_importance(const GlmModel& model) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(model.coef.size());
    for (size_t j = 0; j < model.coef.size(); ++j)
        out.emplace_back(model.columns[j], std::fabs(model.coef[j]));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

double kkt_max_violation(const GlmModel& model, const FeatureTable& table) {
    auto grad = cross_entropy_gradient(model.intercept, model.coef, table);
    return kkt_violation_from_gradient(grad, model.coef, model.penalty);
}

std::string GlmModel::to_json() const {
    nlohmann::json doc;
    doc["columns"] = columns;
    doc["intercept"] = intercept;
    doc["coef"] = coef;
    doc["penalty"] = {{"lambda", penalty.lambda}, {"alpha", penalty.alpha}};
    doc["report"] = {{"outer_iterations", report.outer_iterations},
                     {"final_objective", report.final_objective},
                     {"converged", report.converged}};
    return doc.dump(2);
}

GlmModel GlmModel::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad model json: ") + e.what());
    }
    GlmModel model;
    model.columns = doc.at("columns").get<std::vector<std::string>>();
    model.intercept = doc.at("intercept").get<double>();
    model.coef = doc.at("coef").get<std::vector<double>>();
    model.penalty.lambda = doc.at("penalty").at("lambda").get<double>();
    model.penalty.alpha = doc.at("penalty").at("alpha").get<double>();
    model.report.outer_iterations = doc.at("report").at("outer_iterations").get<int>();
    model.report.final_objective = doc.at("report").at("final_objective").get<double>();
    model.report.converged = doc.at("report").at("converged").get<bool>();
    return model;
}

}  // namespace ubirisk
