#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ubirisk/common.hpp"
#include "ubirisk/linear_model.hpp"
#include "ubirisk/rng.hpp"
#include "ubirisk/stats.hpp"

using namespace ubirisk;

namespace {

FeatureTable make_table(const std::vector<std::vector<double>>& cols, std::vector<int> y,
                        std::vector<std::string> names = {}) {
    std::vector<std::string> ids;
    for (size_t i = 0; i < y.size(); ++i) ids.push_back("r" + std::to_string(i));
    FeatureTable t(ids, std::move(y));
    for (size_t j = 0; j < cols.size(); ++j) {
        std::string name = j < names.size() ? names[j] : "x" + std::to_string(j);
        t.add_numeric({name, ColumnKind::Numeric, ColumnOrigin::Classical}, cols[j]);
    }
    return t;
}

/// Random standardized design with a planted coefficient vector.
FeatureTable random_logistic_table(size_t n, size_t p, std::uint64_t seed,
                                   std::vector<double>* beta_out = nullptr) {
    Rng rng(seed);
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    for (auto& col : cols) {
        for (auto& v : col) v = rng.normal();
        const double m = mean(col);
        const double sd = sample_sd(col);
        for (auto& v : col) v = (v - m) / sd;
    }
    std::vector<double> beta(p);
    for (auto& b : beta) b = rng.normal(0.0, 0.7);
    std::vector<int> y(n);
    for (size_t i = 0; i < n; ++i) {
        double eta = -0.4;
        for (size_t j = 0; j < p; ++j) eta += beta[j] * cols[j][i];
        y[i] = rng.bernoulli(sigmoid(eta)) ? 1 : 0;
    }
    if (beta_out) *beta_out = beta;
    return make_table(cols, std::move(y));
}

}  // namespace

TEST_CASE("cross entropy") {
    auto t = make_table({{1.0, -1.0, 0.5, 2.0}}, {1, 0, 1, 1});
    // All-0.5 predictions: loss is ln 2.
    CHECK(cross_entropy(0.0, std::vector<double>{0.0}, t) == doctest::Approx(std::log(2.0)));

    // Perfect confident predictions: loss ~ 0.
    CHECK(cross_entropy(0.0, std::vector<double>{50.0}, t) <= 1e-10);

    // 5-row fixture against direct summation.
    auto t5 = make_table({{0.2, -1.3, 0.7, 2.2, -0.4}}, {1, 0, 1, 1, 0});
    const double b0 = 0.3, b1 = -0.8;
    double expected = 0.0;
    for (size_t i = 0; i < 5; ++i) {
        const double p = sigmoid(b0 + b1 * t5.numeric(size_t{0})[i]);
        expected += t5.response()[i] ? -std::log(p) : -std::log(1.0 - p);
    }
    expected /= 5.0;
    CHECK(cross_entropy(b0, std::vector<double>{b1}, t5) ==
          doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("analytic gradient matches central finite differences") {
    auto table = random_logistic_table(60, 4, 31);
    Rng rng(77);
    for (int rep = 0; rep < 5; ++rep) {
        double b0 = rng.normal();
        std::vector<double> beta(4);
        for (auto& b : beta) b = rng.normal();
        auto grad = cross_entropy_gradient(b0, beta, table);
        const double h = 1e-5;
        auto fd = [&](int j) {
            if (j < 0) {
                return (cross_entropy(b0 + h, beta, table) - cross_entropy(b0 - h, beta, table)) /
                       (2.0 * h);
            }
            auto hi = beta, lo = beta;
            hi[static_cast<size_t>(j)] += h;
            lo[static_cast<size_t>(j)] -= h;
            return (cross_entropy(b0, hi, table) - cross_entropy(b0, lo, table)) / (2.0 * h);
        };
        CHECK(grad[0] == doctest::Approx(fd(-1)).epsilon(1e-4));
        for (int j = 0; j < 4; ++j)
            CHECK(grad[static_cast<size_t>(j) + 1] == doctest::Approx(fd(j)).epsilon(1e-4));
    }
}

TEST_CASE("irls: intercept-only model recovers logit of the mean") {
    FeatureTable t(std::vector<std::string>{"a", "b", "c", "d", "e"},
                   std::vector<int>{1, 0, 0, 1, 1});
    auto model = fit_logistic_irls(t);
    CHECK(model.intercept == doctest::Approx(logit(0.6)).epsilon(1e-9));
    CHECK(model.coef.empty());
}

TEST_CASE("irls: single binary feature equals the 2x2 log-odds") {
    // Group x=0: 40 rows, 10 positive. Group x=1: 60 rows, 30 positive.
    std::vector<double> x;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        x.push_back(0.0);
        y.push_back(i < 10);
    }
    for (int i = 0; i < 60; ++i) {
        x.push_back(1.0);
        y.push_back(i < 30);
    }
    auto model = fit_logistic_irls(make_table({x}, y));
    CHECK(model.intercept == doctest::Approx(logit(0.25)).epsilon(1e-8));
    CHECK(model.coef[0] == doctest::Approx(logit(0.5) - logit(0.25)).epsilon(1e-8));
    // The score equations hold at the reported tolerance.
    auto grad = cross_entropy_gradient(model.intercept, model.coef, make_table({x}, y));
    for (double g : grad) CHECK(std::fabs(g) <= 1e-8);
}

TEST_CASE("irls: monte-carlo recovery of planted coefficients") {
    std::vector<double> beta;
    auto table = random_logistic_table(100000, 3, 2718, &beta);
    auto model = fit_logistic_irls(table);
    // Standard errors at n = 1e5 with standardized columns are about
    // 1/sqrt(n * p(1-p)) ~ 0.008; allow three of them.
    for (size_t j = 0; j < 3; ++j) CHECK(std::fabs(model.coef[j] - beta[j]) < 3.0 * 0.011);
}

TEST_CASE("irls error paths") {
    // Duplicated column: rank deficient.
    std::vector<double> x = {1, 2, 3, 4, 5, 6};
    auto dup = make_table({x, x}, {0, 1, 0, 1, 0, 1});
    CHECK_THROWS_AS(fit_logistic_irls(dup), NumericError);

    // Perfect separation diverges and names the column.
    std::vector<double> sep = {-2, -1.5, -1, 1, 1.5, 2};
    auto sep_t = make_table({sep}, {0, 0, 0, 1, 1, 1});
    CHECK_THROWS_WITH_AS(fit_logistic_irls(sep_t), doctest::Contains("x0"), NumericError);
}

TEST_CASE("penalized: huge lambda zeroes every coefficient") {
    auto table = random_logistic_table(200, 5, 9);
    auto model = fit_penalized(table, {10.0, 1.0});
    for (double b : model.coef) CHECK(b == 0.0);
    double ybar = 0.0;
    for (int v : table.response()) ybar += v;
    ybar /= static_cast<double>(table.n_rows());
    CHECK(model.intercept == doctest::Approx(logit(ybar)).epsilon(1e-7));
}

TEST_CASE("penalized: lambda zero equals irls") {
    for (std::uint64_t seed : {100u, 101u, 102u}) {
        auto table = random_logistic_table(400, 6, seed);
        auto irls = fit_logistic_irls(table);
        auto cd = fit_penalized(table, {0.0, 1.0});
        CHECK(std::fabs(cd.intercept - irls.intercept) < 1e-6);
        for (size_t j = 0; j < 6; ++j) CHECK(std::fabs(cd.coef[j] - irls.coef[j]) < 1e-6);
    }
}

TEST_CASE("penalized: univariate lasso matches a dense-grid oracle") {
    Rng rng(55);
    std::vector<double> x(300);
    for (auto& v : x) v = rng.normal();
    const double m = mean(x);
    const double sd = sample_sd(x);
    for (auto& v : x) v = (v - m) / sd;
    std::vector<int> y(300);
    for (size_t i = 0; i < 300; ++i) y[i] = rng.bernoulli(sigmoid(-0.5 + 1.2 * x[i])) ? 1 : 0;
    auto table = make_table({x}, y);

    for (double lambda : {0.01, 0.05, 0.2}) {
        auto model = fit_penalized(table, {lambda, 1.0});
        const double oracle =
            oracles::univariate_lasso_grid(x, y, lambda, model.coef[0] - 0.05,
                                           model.coef[0] + 0.05, 4000);
        CHECK(model.coef[0] == doctest::Approx(oracle).epsilon(2e-5));
    }
}

TEST_CASE("penalized: kkt certificate at the solution") {
    auto table = random_logistic_table(500, 8, 77);
    for (double lambda : {1e-4, 1e-3, 1e-2, 0.1}) {
        for (double alpha : {1.0, 0.5, 0.0}) {
            auto model = fit_penalized(table, {lambda, alpha});
            CHECK(kkt_max_violation(model, table) <= 1e-6);
            if (alpha == 1.0) {
                // Spelled-out lasso conditions.
                auto grad = cross_entropy_gradient(model.intercept, model.coef, table);
                for (size_t j = 0; j < model.coef.size(); ++j) {
                    const double corr = -grad[j + 1];  // (1/n) x_j^T (y - p)
                    if (model.coef[j] == 0.0) {
                        CHECK(std::fabs(corr) <= lambda + 1e-6);
                    } else {
                        CHECK(std::fabs(corr - lambda * (model.coef[j] > 0 ? 1.0 : -1.0)) <=
                              1e-6);
                    }
                }
            }
        }
    }
}

TEST_CASE("penalized: objective trace never increases") {
    auto table = random_logistic_table(300, 6, 123);
    for (double lambda : {0.0, 1e-3, 0.05}) {
        auto model = fit_penalized(table, {lambda, 0.5});
        const auto& trace = model.report.objective_trace;
        REQUIRE(trace.size() >= 2);
        for (size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-15);
    }
}

TEST_CASE("penalized: sparsity grows with lambda") {
    auto table = random_logistic_table(400, 10, 424242);
    auto count_nonzero = [](const GlmModel& m) {
        size_t n = 0;
        for (double b : m.coef) n += (b != 0.0);
        return n;
    };
    auto low = fit_penalized(table, {1e-3, 1.0});
    auto high = fit_penalized(table, {1e-2, 1.0});
    auto higher = fit_penalized(table, {1e-1, 1.0});
    CHECK(count_nonzero(high) <= count_nonzero(low));
    CHECK(count_nonzero(higher) <= count_nonzero(high));
}

TEST_CASE("penalized: warm-started path equals cold fits") {
    auto table = random_logistic_table(250, 5, 808);
    std::vector<double> lambdas = {0.1, 0.03, 0.01, 0.003, 0.001};
    auto path = fit_penalized_path(table, lambdas, 1.0);
    REQUIRE(path.size() == lambdas.size());
    for (size_t i = 0; i < lambdas.size(); ++i) {
        auto cold = fit_penalized(table, {lambdas[i], 1.0});
        CHECK(std::fabs(path[i].intercept - cold.intercept) < 1e-6);
        for (size_t j = 0; j < 5; ++j) CHECK(std::fabs(path[i].coef[j] - cold.coef[j]) < 1e-6);
    }
}

TEST_CASE("lasso-only reimplementation reproduces alpha=1 bit for bit") {
    // A dedicated lasso code path with the identical iteration schedule:
    // same initialization, same quadratic weights, same sweep order, same
    // stopping rules, but the lasso-specialized update S(u, lambda) / v.
    auto table = random_logistic_table(150, 4, 5150);
    const double lambda = 0.02;
    auto general = fit_penalized(table, {lambda, 1.0});

    const auto& y = table.response();
    const size_t n = table.n_rows(), p = table.n_cols();
    std::vector<const std::vector<double>*> cols;
    for (size_t j = 0; j < p; ++j) cols.push_back(&table.numeric(j));
    const double inv_n = 1.0 / static_cast<double>(n);

    double ybar = 0.0;
    for (int v : y) ybar += v;
    ybar /= static_cast<double>(n);
    ybar = std::min(1.0 - 1e-12, std::max(1e-12, ybar));
    double b0 = logit(ybar);
    std::vector<double> beta(p, 0.0);

    std::vector<double> eta(n, 0.0), w(n), z(n), resid(n), v(p);
    auto recompute_eta = [&](double intercept, const std::vector<double>& coef) {
        eta.assign(n, intercept);
        for (size_t j = 0; j < p; ++j) {
            if (coef[j] == 0.0) continue;
            for (size_t i = 0; i < n; ++i) eta[i] += coef[j] * (*cols[j])[i];
        }
    };
    auto objective_at = [&](const std::vector<double>& coef) {
        double loss = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double pr = sigmoid(eta[i]);
            pr = std::min(1.0 - 1e-12, std::max(1e-12, pr));
            loss += y[i] ? -std::log(pr) : -std::log(1.0 - pr);
        }
        loss = loss / static_cast<double>(n);
        double l1 = 0.0, l2 = 0.0;
        for (double b : coef) {
            l1 += std::fabs(b);
            l2 += b * b;
        }
        return loss + lambda * ((1.0 - 1.0) * 0.5 * l2 + 1.0 * l1);
    };

    recompute_eta(b0, beta);
    double obj = objective_at(beta);
    double inner_eps = 0.05 * 6e-7;
    bool entry_pass = false;
    {
        auto grad = cross_entropy_gradient(b0, beta, table);
        double worst = std::fabs(grad[0]);
        for (size_t j = 0; j < p; ++j) {
            const double g = grad[j + 1];
            worst = std::max(worst, beta[j] == 0.0
                                        ? std::max(0.0, std::fabs(g) - lambda)
                                        : std::fabs(g + lambda * (beta[j] > 0 ? 1.0 : -1.0)));
        }
        entry_pass = worst <= 6e-7;
    }
    std::vector<double> gram(p * p), q(p), g0(p), t(p), wxbuf(n);
    for (int outer = 1; !entry_pass && outer <= 100; ++outer) {
        double sw = 0.0, qz0 = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double pr = sigmoid(eta[i]);
            const double wi = std::max(pr * (1.0 - pr), 1e-6);
            w[i] = wi;
            z[i] = eta[i] + (y[i] - pr) / wi;
            sw += wi;
            qz0 += wi * z[i];
        }
        sw *= inv_n;
        qz0 *= inv_n;
        for (size_t j = 0; j < p; ++j) {
            double acc_q = 0.0, acc_0 = 0.0;
            for (size_t i = 0; i < n; ++i) {
                wxbuf[i] = w[i] * (*cols[j])[i];
                acc_q += wxbuf[i] * z[i];
                acc_0 += wxbuf[i];
            }
            q[j] = acc_q * inv_n;
            g0[j] = acc_0 * inv_n;
            for (size_t l = 0; l <= j; ++l) {
                double acc = 0.0;
                for (size_t i = 0; i < n; ++i) acc += wxbuf[i] * (*cols[l])[i];
                gram[j * p + l] = acc * inv_n;
                gram[l * p + j] = gram[j * p + l];
            }
        }
        double cand0 = b0;
        std::vector<double> cand = beta;
        double i0 = 0.0;
        for (size_t j = 0; j < p; ++j) {
            double acc = 0.0;
            for (size_t l = 0; l < p; ++l) acc += gram[j * p + l] * cand[l];
            t[j] = acc;
            i0 += g0[j] * cand[j];
        }
        for (int sweep = 0; sweep < 1000; ++sweep) {
            double max_step = 0.0;
            const double new0 = (qz0 - i0) / sw;
            const double d0 = new0 - cand0;
            if (d0 != 0.0) {
                cand0 = new0;
                max_step = std::fabs(d0) * sw;
            }
            for (size_t j = 0; j < p; ++j) {
                const double vj = gram[j * p + j];
                if (vj <= 0.0) continue;
                const double u = q[j] - (t[j] - vj * cand[j]) - cand0 * g0[j];
                // Lasso-specialized update.
                const double updated =
                    (u > lambda ? u - lambda : (u < -lambda ? u + lambda : 0.0)) / (vj + 0.0);
                const double step = updated - cand[j];
                if (step != 0.0) {
                    cand[j] = updated;
                    for (size_t l = 0; l < p; ++l) t[l] += gram[j * p + l] * step;
                    i0 += g0[j] * step;
                    max_step = std::max(max_step, std::fabs(step) * (vj + 0.0));
                }
            }
            if (max_step < inner_eps) break;
        }
        double t = 1.0;
        double new_obj;
        std::vector<double> trial(p);
        double trial0;
        while (true) {
            trial0 = b0 + t * (cand0 - b0);
            for (size_t j = 0; j < p; ++j) trial[j] = beta[j] + t * (cand[j] - beta[j]);
            recompute_eta(trial0, trial);
            new_obj = objective_at(trial);
            if (new_obj <= obj + 1e-15 || t < 1e-10) break;
            t *= 0.5;
        }
        b0 = trial0;
        beta = trial;
        const double prev = obj;
        obj = std::min(obj, new_obj);
        if (std::fabs(prev - new_obj) <= 1e-7 * std::max(1.0, std::fabs(prev))) {
            auto grad = cross_entropy_gradient(b0, beta, table);
            double worst = std::fabs(grad[0]);
            for (size_t j = 0; j < p; ++j) {
                const double g = grad[j + 1];
                worst = std::max(worst, beta[j] == 0.0
                                            ? std::max(0.0, std::fabs(g) - lambda)
                                            : std::fabs(g + lambda * (beta[j] > 0 ? 1.0 : -1.0)));
            }
            if (worst <= 6e-7) break;
            inner_eps = std::max(inner_eps * 0.1, 1e-15);
        }
    }

    CHECK(general.intercept == b0);
    for (size_t j = 0; j < p; ++j) CHECK(general.coef[j] == beta[j]);
}

TEST_CASE("predict") {
    auto t = make_table({{1.0, 2.0}, {0.5, -0.5}}, {0, 1});
    GlmModel m;
    m.columns = {"x0", "x1"};
    m.coef = {0.0, 0.0};
    m.intercept = 0.0;
    auto p = predict(m, t);
    CHECK(p == std::vector<double>{0.5, 0.5});

    m.intercept = logit(0.2);
    auto q = predict(m, t);
    CHECK(q[0] == doctest::Approx(0.2));
    CHECK(q[1] == doctest::Approx(0.2));

    m.coef = {0.3, -1.1};
    m.intercept = 0.25;
    auto r = predict(m, t);
    for (size_t i = 0; i < 2; ++i) {
        const double eta = 0.25 + 0.3 * t.numeric(size_t{0})[i] - 1.1 * t.numeric(size_t{1})[i];
        CHECK(r[i] == doctest::Approx(sigmoid(eta)).epsilon(1e-15));
    }

    GlmModel wrong = m;
    wrong.columns = {"x1", "x0"};
    CHECK_THROWS_AS(predict(wrong, t), DataError);
}

TEST_CASE("glm importance ordering") {
    GlmModel m;
    m.columns = {"a", "b", "c"};
    m.coef = {0.5, -1.2, 0.0};
    auto imp = glm_importance(m);
    REQUIRE(imp.size() == 3);
    CHECK(imp[0].first == "b");
    CHECK(imp[1].first == "a");
    CHECK(imp[2].first == "c");

    m.coef = {0.0, 0.0, 0.0};
    auto zeros = glm_importance(m);
    CHECK(zeros[0].first == "a");
    CHECK(zeros[1].first == "b");
    CHECK(zeros[2].first == "c");
}

TEST_CASE("duplicated columns get equal importance under ridge") {
    // With an L2 penalty the optimum shares weight between clones.
    Rng rng(31337);
    std::vector<double> x(200);
    for (auto& v : x) v = rng.normal();
    std::vector<int> y(200);
    for (size_t i = 0; i < 200; ++i) y[i] = rng.bernoulli(sigmoid(x[i])) ? 1 : 0;
    auto table = make_table({x, x}, y, {"left", "right"});
    auto model = fit_penalized(table, {0.01, 0.0});
    // Asymmetry bounded by the solver's KKT tolerance over the curvature.
    CHECK(std::fabs(model.coef[0] - model.coef[1]) < 5e-6);
}

TEST_CASE("model json round trip") {
    auto table = random_logistic_table(100, 3, 1);
    auto model = fit_penalized(table, {0.01, 1.0});
    auto restored = GlmModel::from_json(model.to_json());
    CHECK(restored.intercept == model.intercept);
    CHECK(restored.coef == model.coef);
    CHECK(restored.columns == model.columns);
    CHECK(restored.penalty.lambda == model.penalty.lambda);
    CHECK(predict(restored, table) == predict(model, table));
}
