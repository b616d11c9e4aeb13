#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sleephrv/types.hpp"

namespace sleephrv::stats {

struct CorrelationResult {
    std::string feature;
    double r = kNaN;
    double p = kNaN;
    std::size_t n = 0;     // pair count after pairwise deletion
};

// Pearson product-moment correlation with a two-sided p-value from
// t = r*sqrt((n-2)/(1-r^2)) against Student's t with n-2 df. Missing
// entries are removed pairwise; requires n >= 3 and nonzero variance
// in both vectors.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

struct SelectionReport {
    std::vector<CorrelationResult> ranked;   // all usable columns, |r| descending
    std::vector<std::string> selected;       // top-k names passing p < p_threshold
    double p_threshold = 0.2;
    std::size_t k = 15;
    std::vector<std::string> warnings;
};

// Correlation filter: keep columns with p < p_threshold, rank survivors by
// |r| descending (ties broken by name), select the first k. An empty
// selection is a warning, not an error.
SelectionReport select_features(const FeatureMatrix& m,
                                double p_threshold = 0.2,
                                std::size_t k = 15);

struct TTestResult {
    double t = kNaN;
    double p = kNaN;
    std::size_t n = 0;
};

// Paired two-sided t-test on d = a - b with n-1 df. Errors on n < 2 or
// zero-variance differences.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// Student-t CDF via the regularized incomplete beta function.
double student_t_cdf(double t, double df);

// Two-sided tail probability P(|T| >= |t|) for Student's t.
double student_t_two_sided_p(double t, double df);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

}  // namespace sleephrv::stats
