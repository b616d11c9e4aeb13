#include <doctest.h>

#include <cmath>

#include "../oracles/oracles.hpp"
#include "helpers.hpp"
#include "sleephrv/model.hpp"
#include "sleephrv/rng.hpp"

using namespace sleephrv;
using model::FitOptions;
using model::RidgeHyperparams;

TEST_CASE("fixed-precision mode equals the closed-form ridge oracle") {
    DeterministicRng rng(515);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(rng.uniform(0.0, 45.0));
        const std::size_t p = 1 + static_cast<std::size_t>(rng.uniform(0.0, 14.0));

        std::vector<std::string> names;
        std::vector<std::vector<double>> cols(p);
        for (std::size_t j = 0; j < p; ++j) {
            names.push_back("f" + std::to_string(j));
            for (std::size_t i = 0; i < n; ++i) cols[j].push_back(rng.normal(0.0, 2.0));
        }
        std::vector<double> y;
        for (std::size_t i = 0; i < n; ++i) {
            double v = rng.normal(0.0, 0.3);
            for (std::size_t j = 0; j < p; ++j) v += 0.3 * cols[j][i];
            y.push_back(v);
        }

        const double alpha0 = rng.uniform(0.5, 5.0);
        const double lambda0 = rng.uniform(0.1, 3.0);
        FitOptions opts;
        opts.standardize = false;   // oracle works on centered data
        opts.update_precisions = false;
        opts.fixed_alpha = alpha0;
        opts.fixed_lambda = lambda0;

        const auto fit = model::fit(names, cols, y, RidgeHyperparams{}, opts);
        const auto want = oracle::ridge_closed_form(cols, y, lambda0 / alpha0);

        REQUIRE(fit.n_features() == p);
        const auto weights = fit.weights();
        for (std::size_t j = 0; j < p; ++j) {
            CHECK(weights[j] == doctest::Approx(want.weights[j]).epsilon(1e-8));
        }
        CHECK(fit.intercept() == doctest::Approx(want.intercept).epsilon(1e-8));
    }
}

TEST_CASE("evidence maximization recovers w = 2 on noise-free y = 2x") {
    DeterministicRng rng(616);
    std::vector<double> x, y;
    for (int i = 0; i < 200; ++i) {
        x.push_back(rng.uniform(-1.0, 1.0));
        y.push_back(2.0 * x.back());
    }
    const auto fit = model::fit({"x"}, {x}, y);
    REQUIRE(fit.n_features() == 1);
    CHECK(fit.weights()[0] == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(std::abs(fit.intercept()) < 1e-3);
}

TEST_CASE("constant target forces zero weights and the constant intercept") {
    std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    std::vector<double> y{5.5, 5.5, 5.5, 5.5};
    const auto fit = model::fit({"x"}, {x}, y);
    CHECK(fit.weights()[0] == doctest::Approx(0.0));
    CHECK(fit.intercept() == doctest::Approx(5.5));
    CHECK(fit.alpha > 0.0);
    CHECK(fit.lambda > 0.0);
}

TEST_CASE("fit matches a frozen reference evidence-maximization instance") {
    // reference values computed with an independent Bayesian ridge
    // implementation at tol 1e-12 on the standardized design below
    const std::vector<std::vector<double>> rows{
        {-1.695, 1.12, -0.246}, {0.894, 1.912, 0.154},  {0.004, -1.712, -0.926},
        {-0.0, 0.717, 1.215},   {-0.476, -1.736, -0.847}, {1.638, -1.146, -0.192},
        {1.725, -1.9, 0.402},   {1.801, -1.079, 0.194},  {1.637, -1.467, 0.094},
        {1.002, 0.676, -0.129}, {-1.181, -0.037, -0.51}, {-0.09, -0.536, 1.352}};
    const std::vector<double> y{-3.437, 0.102, 0.844, -0.111, 0.144, 3.168,
                                3.978,  3.588, 3.599, 0.975,  -1.857, 0.637};

    std::vector<std::vector<double>> cols(3, std::vector<double>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < 3; ++j) cols[j][i] = rows[i][j];
    }

    RidgeHyperparams h;
    h.tol = 1e-12;
    h.max_iter = 500;
    const auto fit = model::fit({"a", "b", "c"}, cols, y, h);

    CHECK(fit.weights_std[0] == doctest::Approx(1.8101398327704281).epsilon(1e-6));
    CHECK(fit.weights_std[1] == doctest::Approx(-0.870454299483298).epsilon(1e-6));
    CHECK(fit.weights_std[2] == doctest::Approx(0.22354150231885944).epsilon(1e-6));
    CHECK(fit.y_mean == doctest::Approx(0.969166666666667).epsilon(1e-12));
    CHECK(fit.alpha == doctest::Approx(333.5160752046219).epsilon(1e-4));
    CHECK(fit.lambda == doctest::Approx(0.7343412038979223).epsilon(1e-4));
}

TEST_CASE("posterior covariance is symmetric positive semidefinite-ish") {
    DeterministicRng rng(717);
    const std::size_t n = 30, p = 6;
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols(p);
    std::vector<double> y;
    for (std::size_t j = 0; j < p; ++j) {
        names.push_back("f" + std::to_string(j));
        for (std::size_t i = 0; i < n; ++i) cols[j].push_back(rng.normal());
    }
    for (std::size_t i = 0; i < n; ++i) y.push_back(cols[0][i] + 0.5 * rng.normal());

    const auto fit = model::fit(names, cols, y);
    REQUIRE(fit.posterior_cov.size() == p * p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            CHECK(std::abs(fit.posterior_cov[i * p + j] - fit.posterior_cov[j * p + i]) < 1e-12);
        }
        CHECK(fit.posterior_cov[i * p + i] > -1e-10);   // diagonal of a PSD matrix
    }
}

TEST_CASE("fit is bitwise deterministic") {
    DeterministicRng rng(818);
    std::vector<std::vector<double>> cols(4, std::vector<double>{});
    std::vector<double> y;
    for (int i = 0; i < 25; ++i) {
        for (auto& c : cols) c.push_back(rng.normal());
        y.push_back(cols[0].back() + rng.normal());
    }
    const std::vector<std::string> names{"a", "b", "c", "d"};
    const auto f1 = model::fit(names, cols, y);
    const auto f2 = model::fit(names, cols, y);
    CHECK(f1.weights_std == f2.weights_std);
    CHECK(f1.alpha == f2.alpha);
    CHECK(f1.lambda == f2.lambda);
    CHECK(f1.posterior_cov == f2.posterior_cov);
}

TEST_CASE("predict: alignment, permutation invariance, intercept-only") {
    std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> b{0.3, -0.2, 0.9, 0.1, -0.5};
    std::vector<double> y{2.1, 3.9, 6.2, 7.8, 10.1};
    const auto fit = model::fit({"a", "b"}, {a, b}, y);

    const auto direct = model::predict(fit, {"a", "b"}, {a, b});
    const auto permuted = model::predict(fit, {"b", "a"}, {b, a});
    REQUIRE(direct.size() == permuted.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        CHECK(direct[i] == doctest::Approx(permuted[i]).epsilon(1e-15));
    }

    CHECK_THROWS_WITH_AS(model::predict(fit, {"a"}, {a}), doctest::Contains("column mismatch"),
                         Error);

    // all-constant feature is dropped; predictions collapse to the intercept
    std::vector<double> constant{7.0, 7.0, 7.0, 7.0, 7.0};
    const auto trivial = model::fit({"c"}, {constant}, y);
    CHECK(trivial.n_features() == 0);
    const auto pred = model::predict(trivial, {"c"}, {constant});
    for (double v : pred) CHECK(v == doctest::Approx(trivial.intercept()));
}

TEST_CASE("metrics: exact, mean predictor, worse than mean") {
    const std::vector<double> y{1.0, 2.0, 3.0, 4.0};

    auto exact = model::metrics(y, y);
    CHECK(exact.r2 == doctest::Approx(1.0));
    CHECK(exact.mae == doctest::Approx(0.0));

    const std::vector<double> mean_pred{2.5, 2.5, 2.5, 2.5};
    CHECK(model::metrics(y, mean_pred).r2 == doctest::Approx(0.0));

    const std::vector<double> bad{4.0, 1.0, 4.5, 0.5};
    CHECK(model::metrics(y, bad).r2 < 0.0);

    const std::vector<double> constant{3.0, 3.0, 3.0};
    CHECK_THROWS_WITH_AS(model::metrics(constant, std::vector<double>{1.0, 2.0, 3.0}),
                         doctest::Contains("zero-variance"), Error);
}

TEST_CASE("training predictions are consistent with reported r2") {
    DeterministicRng rng(919);
    std::vector<double> x, y;
    for (int i = 0; i < 40; ++i) {
        x.push_back(rng.normal());
        y.push_back(1.5 * x.back() + 0.3 * rng.normal());
    }
    const auto fit = model::fit({"x"}, {x}, y);
    const auto pred = model::predict(fit, {"x"}, {x});
    const auto m = model::metrics(y, pred);
    CHECK(m.r2 > 0.9);
    CHECK(m.pearson_r > 0.95);
}

TEST_CASE("tolerance analysis") {
    SUBCASE("exact predictions hit every band") {
        std::vector<double> y{std::log(4.0), std::log(7.5), std::log(10.0)};
        const auto fractions = model::tolerance_analysis(y, y);
        REQUIRE(fractions.size() == 3);
        for (double f : fractions) CHECK(f == doctest::Approx(1.0));
    }
    SUBCASE("absolute errors {0.4, 1.2} mmol/L give (50%, 100%, 100%)") {
        const std::vector<double> y_true{std::log(5.0), std::log(5.0)};
        const std::vector<double> y_pred{std::log(6.2), std::log(5.4)};
        const auto fractions = model::tolerance_analysis(y_true, y_pred);
        CHECK(fractions[0] == doctest::Approx(0.5));
        CHECK(fractions[1] == doctest::Approx(1.0));
        CHECK(fractions[2] == doctest::Approx(1.0));
    }
    SUBCASE("fractions are monotone in band width") {
        DeterministicRng rng(111);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<double> y_true, y_pred;
            for (int i = 0; i < 25; ++i) {
                const double g = rng.uniform(3.0, 12.0);
                y_true.push_back(std::log(g));
                y_pred.push_back(std::log(std::max(0.5, g + rng.normal(0.0, 1.2))));
            }
            const auto fractions =
                model::tolerance_analysis(y_true, y_pred, {0.5, 1.0, 1.5, 2.0, 3.0});
            for (std::size_t i = 1; i < fractions.size(); ++i) {
                CHECK(fractions[i] >= fractions[i - 1]);
            }
        }
    }
}

TEST_CASE("model serialization round-trips predictions exactly") {
    DeterministicRng rng(121);
    std::vector<std::vector<double>> cols(3);
    std::vector<double> y;
    for (int i = 0; i < 30; ++i) {
        for (auto& c : cols) c.push_back(rng.normal());
        y.push_back(cols[0].back() - cols[1].back() + 0.2 * rng.normal());
    }
    const std::vector<std::string> names{"a", "b", "c"};
    const auto fit = model::fit(names, cols, y);

    testutil::TempDir tmp("model");
    const auto path = tmp.file("fit.txt");
    model::save_model(fit, path);
    const auto loaded = model::load_model(path);

    CHECK(loaded.feature_names == fit.feature_names);
    CHECK(loaded.weights_std == fit.weights_std);
    CHECK(loaded.alpha == fit.alpha);
    CHECK(loaded.lambda == fit.lambda);

    const auto p1 = model::predict(fit, names, cols);
    const auto p2 = model::predict(loaded, names, cols);
    CHECK(p1 == p2);
}
