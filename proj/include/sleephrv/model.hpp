#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sleephrv/types.hpp"

namespace sleephrv::model {

// Gamma hyperpriors over the noise precision (alpha) and weight precision
// (lambda), plus the stopping rule of the evidence-maximization loop.
struct RidgeHyperparams {
    double alpha_1 = 1e-6;
    double alpha_2 = 1e-6;
    double lambda_1 = 1e-6;
    double lambda_2 = 1e-6;
    int max_iter = 300;
    double tol = 1e-3;       // convergence threshold on sum |delta w|
};

// Test-only switches. Production fits always standardize and update the
// precisions.
struct FitOptions {
    bool standardize = true;        // z-score features; false = center only
    bool update_precisions = true;  // false = hold alpha/lambda at the fixed values
    double fixed_alpha = 1.0;
    double fixed_lambda = 1.0;
};

// Bayesian ridge posterior. Weights and covariance live in the transformed
// (standardized/centered) feature space; weights()/intercept() give the
// original-space view. feature_names lists the columns actually kept
// (zero-variance training columns are dropped with a warning).
struct ModelFit {
    std::vector<std::string> feature_names;
    std::vector<double> feature_means;
    std::vector<double> feature_sds;       // all 1.0 when standardize was off
    std::vector<double> weights_std;
    double y_mean = 0.0;
    double alpha = 0.0;                    // noise precision
    double lambda = 0.0;                   // weight precision
    std::vector<double> posterior_cov;     // p*p row-major, standardized space
    int n_iter_used = 0;
    std::vector<std::string> warnings;

    std::size_t n_features() const { return feature_names.size(); }
    std::vector<double> weights() const;   // original feature space
    double intercept() const;
};

// Evidence maximization (MacKay updates): standardize X and center y, then
// alternate the posterior weight solve
//     S = (lambda I + alpha X^T X)^-1,  w = alpha S X^T y
// with the precision updates
//     gamma  = sum_j alpha s_j / (lambda + alpha s_j)   (s_j eigenvalues of X^T X)
//     lambda = (gamma + 2 lambda_1) / (w^T w + 2 lambda_2)
//     alpha  = (n - gamma + 2 alpha_1) / (||y - Xw||^2 + 2 alpha_2)
// until sum |delta w| < tol or max_iter. The eigendecomposition of X^T X is
// computed once per fit and reused across iterations.
ModelFit fit(const std::vector<std::string>& names,
             const std::vector<std::vector<double>>& columns,
             std::span<const double> y,
             const RidgeHyperparams& h = {},
             const FitOptions& opts = {});

// Predictions Xw + intercept after the fit-time standardization. Columns
// are aligned by name; a missing fit feature is a column mismatch error.
std::vector<double> predict(const ModelFit& fit,
                            const std::vector<std::string>& names,
                            const std::vector<std::vector<double>>& columns);

struct Metrics {
    double r2 = kNaN;
    double mae = kNaN;
    double pearson_r = kNaN;   // NaN when undefined (e.g. constant predictions)
    double pearson_p = kNaN;
};

Metrics metrics(std::span<const double> y_true, std::span<const double> y_pred);

inline const std::vector<double> kDefaultToleranceBands{1.0, 1.5, 2.0};

// Back-transforms both vectors to mmol/L and reports, per band b, the share
// of predictions with |g_true - g_pred| <= b.
std::vector<double> tolerance_analysis(std::span<const double> y_true_log,
                                       std::span<const double> y_pred_log,
                                       const std::vector<double>& bands_mmol = kDefaultToleranceBands);

// Versioned text serialization (weights, intercept, precisions,
// standardization constants); loading reproduces predictions exactly.
void save_model(const ModelFit& fit, const std::string& path);
ModelFit load_model(const std::string& path);

}  // namespace sleephrv::model
