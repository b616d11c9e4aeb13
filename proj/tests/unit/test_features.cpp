#include <doctest.h>

#include <cmath>

#include "../oracles/oracles.hpp"
#include "helpers.hpp"
#include "sleephrv/features.hpp"
#include "sleephrv/rng.hpp"

using namespace sleephrv;
using features::AgeNormParams;

namespace {

RrSeries series_of(std::vector<double> intervals) {
    RrSeries rr;
    rr.intervals_ms = std::move(intervals);
    return rr;
}

}  // namespace

TEST_CASE("hrv metrics: worked examples") {
    SUBCASE("diffs of exactly 50 ms do not count for pNN50 (strict >)") {
        const auto m = features::hrv_metrics(series_of({800, 850, 800}));
        CHECK(m.mean_rr == doctest::Approx(816.6666666667));
        CHECK(m.rmssd == doctest::Approx(50.0));
        CHECK(m.rr_range == doctest::Approx(50.0));
        CHECK(m.pnn50 == doctest::Approx(0.0));
        CHECK(m.sdnn == doctest::Approx(28.867513459481287));
    }
    SUBCASE("one of two diffs exceeding 50 ms gives pNN50 = 50") {
        const auto m = features::hrv_metrics(series_of({800, 860, 820}));
        CHECK(m.pnn50 == doctest::Approx(50.0));
    }
    SUBCASE("constant series has zero variability") {
        const auto m = features::hrv_metrics(series_of({900, 900, 900, 900, 900}));
        CHECK(m.rmssd == doctest::Approx(0.0));
        CHECK(m.sdnn == doctest::Approx(0.0));
        CHECK(m.pnn50 == doctest::Approx(0.0));
        CHECK(m.rr_range == doctest::Approx(0.0));
    }
    SUBCASE("empty series errors, single interval NaN-tags the diff metrics") {
        CHECK_THROWS_AS(features::hrv_metrics(series_of({})), Error);
        const auto m = features::hrv_metrics(series_of({800}));
        CHECK(m.mean_rr == doctest::Approx(800.0));
        CHECK(m.rr_range == doctest::Approx(0.0));
        CHECK(is_missing(m.rmssd));
        CHECK(is_missing(m.sdnn));
        CHECK(is_missing(m.pnn50));
    }
}

TEST_CASE("hrv metrics equal the direct-definition oracle on random series") {
    DeterministicRng rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> intervals;
        const int n = 2 + static_cast<int>(rng.uniform(0.0, 499.0));
        for (int i = 0; i < n; ++i) intervals.push_back(rng.uniform(300.0, 2000.0));

        const auto got = features::hrv_metrics(series_of(intervals));
        const auto want = oracle::hrv_direct(intervals);
        CHECK(got.mean_rr == doctest::Approx(want.mean_rr).epsilon(1e-9));
        CHECK(got.rmssd == doctest::Approx(want.rmssd).epsilon(1e-9));
        CHECK(got.sdnn == doctest::Approx(want.sdnn).epsilon(1e-9));
        CHECK(got.pnn50 == doctest::Approx(want.pnn50).epsilon(1e-9));
        CHECK(got.rr_range == doctest::Approx(want.rr_range).epsilon(1e-9));
    }
}

TEST_CASE("age normalization: worked examples and properties") {
    CHECK(features::age_normalize(1000.0, 65.0) == doctest::Approx(1000.0 / 1.1).epsilon(1e-12));
    CHECK(features::age_normalize(0.0, 40.0) == doctest::Approx(0.0));
    CHECK(features::age_normalize(900.0, 32.5) == doctest::Approx(1500.0).epsilon(1e-12));
    CHECK_THROWS_AS(features::age_normalize(1000.0, 0.0), Error);
    CHECK_THROWS_AS(features::age_normalize(1000.0, -10.0), Error);

    SUBCASE("monotone decreasing in age, linear in raw") {
        double prev = features::age_normalize(500.0, 20.0);
        for (double age = 21.0; age <= 90.0; age += 1.0) {
            const double now = features::age_normalize(500.0, age);
            CHECK(now < prev);
            prev = now;
        }
        for (double a : {0.5, 2.0, 10.0}) {
            CHECK(features::age_normalize(a * 123.0, 47.0) ==
                  doctest::Approx(a * features::age_normalize(123.0, 47.0)).epsilon(1e-12));
        }
    }
    SUBCASE("reference age gives raw/(1+eps) exactly") {
        const AgeNormParams params;
        CHECK(features::age_normalize(1.0, params.reference_age, params) ==
              doctest::Approx(1.0 / (1.0 + params.epsilon)).epsilon(1e-15));
    }
}

TEST_CASE("log glucose transform and back transform") {
    CHECK(features::log_glucose(1.0) == doctest::Approx(0.0));
    CHECK(features::log_glucose(std::exp(1.0)) == doctest::Approx(1.0));
    CHECK(features::log_glucose(5.5) == doctest::Approx(1.7047480922384253).epsilon(1e-12));
    CHECK_THROWS_AS(features::log_glucose(0.0), Error);
    CHECK_THROWS_AS(features::log_glucose(-3.2), Error);

    CHECK(features::back_transform(0.0) == doctest::Approx(1.0));
    CHECK(features::back_transform(1.70475) == doctest::Approx(5.5).epsilon(1e-5));
    for (double g = 0.5; g <= 30.0; g += 0.25) {
        CHECK(features::back_transform(features::log_glucose(g)) ==
              doctest::Approx(g).epsilon(1e-12));
    }
}

namespace {

Cohort one_subject_cohort() {
    Cohort cohort;
    SubjectRecord s;
    s.id = "A";
    s.age_years = 65.0;
    s.glucose_mmol_l = std::exp(1.0);
    cohort.subjects.push_back(s);
    return cohort;
}

}  // namespace

TEST_CASE("feature matrix: single-subject composition") {
    const Cohort cohort = one_subject_cohort();
    std::vector<ecg::StageSplit> splits(1);
    splits[0].ds.intervals_ms = {1000, 1000, 1000};

    const auto m = features::build_feature_matrix(cohort, splits);
    CHECK(m.column("hrv_ds_mean_rr")[0] == doctest::Approx(1000.0));
    CHECK(m.column("hrv_ds_mean_rr_age_normalized")[0] == doctest::Approx(909.0909090909));
    CHECK(m.column("age")[0] == doctest::Approx(65.0));
    CHECK(m.target[0] == doctest::Approx(1.0));
    // REM/RS columns are all-missing for the single subject and get dropped
    CHECK_THROWS_AS(m.column_index("hrv_rem_mean_rr"), Error);
    CHECK(!m.warnings.empty());
}

TEST_CASE("feature matrix: age-normalization switch off removes normalized columns") {
    const Cohort cohort = one_subject_cohort();
    std::vector<ecg::StageSplit> splits(1);
    splits[0].ds.intervals_ms = {1000, 990, 1010};

    features::FeatureOptions options;
    options.age_normalize = false;
    const auto m = features::build_feature_matrix(cohort, splits, {}, options);
    for (const auto& name : m.names) {
        CHECK(name.find("_age_normalized") == std::string::npos);
    }
}

TEST_CASE("feature matrix: column bookkeeping with all stages present") {
    Cohort cohort;
    for (int i = 0; i < 3; ++i) {
        SubjectRecord s;
        s.id = "S" + std::to_string(i);
        s.age_years = 40.0 + i;
        s.glucose_mmol_l = 5.0 + i;
        s.clinical = {70.0 + i, 8.0 - i};   // dbp, psqi
        cohort.subjects.push_back(s);
    }
    cohort.clinical_names = {"dbp", "psqi"};

    std::vector<ecg::StageSplit> splits(3);
    DeterministicRng rng(3);
    for (auto& split : splits) {
        for (Stage stage : kAllStages) {
            for (int i = 0; i < 30; ++i) {
                split.at(stage).intervals_ms.push_back(rng.uniform(700.0, 1200.0));
            }
        }
    }

    const auto m = features::build_feature_matrix(cohort, splits);
    std::size_t hrv_cols = 0;
    for (const auto& name : m.names) {
        if (name.rfind("hrv_", 0) == 0) ++hrv_cols;
    }
    CHECK(hrv_cols == 18);   // 3 stages x 5 metrics + 3 normalized
    CHECK_NOTHROW(m.column_index("dbp"));
    CHECK_NOTHROW(m.column_index("psqi"));
    CHECK_NOTHROW(m.column_index("age"));
    CHECK_NOTHROW(m.column_index("psqi_age"));
    CHECK(m.column("psqi_age")[0] == doctest::Approx(8.0 * 40.0));
}

TEST_CASE("feature matrix: empty stage leaves missing values, empty cohort errors") {
    Cohort cohort;
    for (int i = 0; i < 2; ++i) {
        SubjectRecord s;
        s.id = "S" + std::to_string(i);
        s.age_years = 50.0;
        s.glucose_mmol_l = 5.5;
        cohort.subjects.push_back(s);
    }
    std::vector<ecg::StageSplit> splits(2);
    splits[0].ds.intervals_ms = {900, 910, 905};
    splits[0].rem.intervals_ms = {850, 860, 855};
    splits[1].ds.intervals_ms = {1000, 1010, 990};
    // subject 1 has no REM data

    const auto m = features::build_feature_matrix(cohort, splits);
    CHECK(!is_missing(m.column("hrv_rem_mean_rr")[0]));
    CHECK(is_missing(m.column("hrv_rem_mean_rr")[1]));

    CHECK_THROWS_AS(features::build_feature_matrix(Cohort{}, {}), Error);
}
