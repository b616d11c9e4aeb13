#include "sleephrv/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dsv.hpp"
#include "sleephrv/stats.hpp"

namespace sleephrv::model {

std::vector<double> ModelFit::weights() const {
    std::vector<double> w(weights_std.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = weights_std[j] / feature_sds[j];
    return w;
}

double ModelFit::intercept() const {
    double b = y_mean;
    for (std::size_t j = 0; j < weights_std.size(); ++j) {
        b -= feature_means[j] * weights_std[j] / feature_sds[j];
    }
    return b;
}

ModelFit fit(const std::vector<std::string>& names,
             const std::vector<std::vector<double>>& columns,
             std::span<const double> y,
             const RidgeHyperparams& h,
             const FitOptions& opts) {
    if (names.size() != columns.size()) throw Error("fit: names/columns mismatch");
    const std::size_t n = y.size();
    if (n < 2) throw Error("fit needs at least 2 rows");
    if (h.alpha_1 <= 0.0 || h.alpha_2 <= 0.0 || h.lambda_1 <= 0.0 || h.lambda_2 <= 0.0) {
        throw Error("hyperprior parameters must be positive");
    }
    for (const auto& col : columns) {
        if (col.size() != n) throw Error("fit: column length mismatch");
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw Error("fit: non-finite target value");
    }

    ModelFit out;

    // scaler stats on the training data; zero-variance columns are dropped
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        double mean = 0.0;
        for (double v : columns[j]) {
            if (!std::isfinite(v)) throw Error("fit: non-finite value in column " + names[j]);
            mean += v;
        }
        mean /= static_cast<double>(n);
        double ssq = 0.0;
        for (double v : columns[j]) ssq += (v - mean) * (v - mean);
        const double sd = std::sqrt(ssq / static_cast<double>(n - 1));
        if (sd == 0.0) {
            out.warnings.push_back("dropped zero-variance column " + names[j]);
            continue;
        }
        kept.push_back(j);
        out.feature_names.push_back(names[j]);
        out.feature_means.push_back(mean);
        out.feature_sds.push_back(opts.standardize ? sd : 1.0);
    }
    const std::size_t p = kept.size();

    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= static_cast<double>(n);
    out.y_mean = y_mean;

    if (p == 0) {
        // constant-only model: centering forces all weights to zero
        out.alpha = 1.0;
        out.lambda = 1.0;
        out.n_iter_used = 0;
        return out;
    }

    Eigen::MatrixXd X(n, p);
    for (std::size_t jj = 0; jj < p; ++jj) {
        const auto& col = columns[kept[jj]];
        const double mean = out.feature_means[jj];
        const double sd = out.feature_sds[jj];
        for (std::size_t i = 0; i < n; ++i) {
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jj)) = (col[i] - mean) / sd;
        }
    }
    Eigen::VectorXd yc(n);
    for (std::size_t i = 0; i < n; ++i) yc(static_cast<Eigen::Index>(i)) = y[i] - y_mean;

    // eigendecomposition of X^T X, computed once and reused every iteration
    const Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xtx);
    if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");
    const Eigen::VectorXd evals = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd& evecs = eig.eigenvectors();
    const Eigen::VectorXd xty_eig = evecs.transpose() * (X.transpose() * yc);

    double var_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) var_y += (y[i] - y_mean) * (y[i] - y_mean);
    var_y /= static_cast<double>(n - 1);

    double alpha = var_y > 0.0 ? 1.0 / var_y : 1.0;
    double lambda = 1.0;
    if (!opts.update_precisions) {
        if (opts.fixed_alpha <= 0.0 || opts.fixed_lambda <= 0.0) {
            throw Error("fixed precisions must be positive");
        }
        alpha = opts.fixed_alpha;
        lambda = opts.fixed_lambda;
    }

    auto solve_weights = [&](double a, double l) {
        Eigen::VectorXd scaled = xty_eig;
        for (Eigen::Index j = 0; j < scaled.size(); ++j) {
            scaled(j) *= a / (l + a * evals(j));
        }
        return Eigen::VectorXd(evecs * scaled);
    };

    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
    int iters = 0;
    for (int iter = 0; iter < h.max_iter; ++iter) {
        ++iters;
        const Eigen::VectorXd w_new = solve_weights(alpha, lambda);

        if (opts.update_precisions) {
            double gamma = 0.0;
            for (Eigen::Index j = 0; j < evals.size(); ++j) {
                gamma += alpha * evals(j) / (lambda + alpha * evals(j));
            }
            const double rss = (yc - X * w_new).squaredNorm();
            lambda = (gamma + 2.0 * h.lambda_1) / (w_new.squaredNorm() + 2.0 * h.lambda_2);
            alpha = (static_cast<double>(n) - gamma + 2.0 * h.alpha_1) / (rss + 2.0 * h.alpha_2);
        }

        if (iter > 0 && (w_new - w).cwiseAbs().sum() < h.tol) {
            w = w_new;
            break;
        }
        w = w_new;
    }
    // final solve with the converged precisions
    w = solve_weights(alpha, lambda);

    out.alpha = alpha;
    out.lambda = lambda;
    out.n_iter_used = iters;
    out.weights_std.assign(w.data(), w.data() + p);

    Eigen::MatrixXd cov(p, p);
    {
        Eigen::MatrixXd scaled = evecs;
        for (Eigen::Index j = 0; j < evals.size(); ++j) {
            scaled.col(j) /= (lambda + alpha * evals(j));
        }
        cov = scaled * evecs.transpose();
    }
    out.posterior_cov.resize(p * p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            out.posterior_cov[i * p + j] =
                cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

std::vector<double> predict(const ModelFit& fit,
                            const std::vector<std::string>& names,
                            const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size()) throw Error("predict: names/columns mismatch");
    const std::size_t n = columns.empty() ? 0 : columns[0].size();
    for (const auto& col : columns) {
        if (col.size() != n) throw Error("predict: column length mismatch");
    }

    // align by name; every fit feature must be present
    std::vector<const std::vector<double>*> aligned;
    for (const auto& feature : fit.feature_names) {
        const auto it = std::find(names.begin(), names.end(), feature);
        if (it == names.end()) throw Error("column mismatch: missing feature " + feature);
        aligned.push_back(&columns[static_cast<std::size_t>(it - names.begin())]);
    }

    std::vector<double> pred(n, fit.y_mean);
    for (std::size_t j = 0; j < aligned.size(); ++j) {
        const double mean = fit.feature_means[j];
        const double sd = fit.feature_sds[j];
        const double w = fit.weights_std[j];
        for (std::size_t i = 0; i < n; ++i) {
            const double v = (*aligned[j])[i];
            if (!std::isfinite(v)) throw Error("predict: non-finite value (impute upstream)");
            pred[i] += w * (v - mean) / sd;
        }
    }
    return pred;
}

Metrics metrics(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size()) throw Error("metrics: length mismatch");
    const std::size_t n = y_true.size();
    if (n < 2) throw Error("metrics needs at least 2 values");

    double mean = 0.0;
    for (double v : y_true) mean += v;
    mean /= static_cast<double>(n);

    double ss_tot = 0.0, ss_res = 0.0, abs_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
        ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
        abs_err += std::abs(y_true[i] - y_pred[i]);
    }
    if (ss_tot == 0.0) throw Error("zero-variance y_true");

    Metrics m;
    m.r2 = 1.0 - ss_res / ss_tot;
    m.mae = abs_err / static_cast<double>(n);
    try {
        const auto c = stats::pearson(y_true, y_pred);
        m.pearson_r = c.r;
        m.pearson_p = c.p;
    } catch (const Error&) {
        // undefined (constant predictions or too few points); left NaN
    }
    return m;
}

std::vector<double> tolerance_analysis(std::span<const double> y_true_log,
                                       std::span<const double> y_pred_log,
                                       const std::vector<double>& bands_mmol) {
    if (y_true_log.size() != y_pred_log.size()) throw Error("tolerance_analysis: length mismatch");
    if (y_true_log.empty()) throw Error("tolerance_analysis needs at least 1 prediction");

    std::vector<double> fractions;
    fractions.reserve(bands_mmol.size());
    for (double band : bands_mmol) {
        std::size_t within = 0;
        for (std::size_t i = 0; i < y_true_log.size(); ++i) {
            const double err = std::abs(std::exp(y_true_log[i]) - std::exp(y_pred_log[i]));
            if (err <= band) ++within;
        }
        fractions.push_back(static_cast<double>(within) / static_cast<double>(y_true_log.size()));
    }
    return fractions;
}

void save_model(const ModelFit& fit, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    const std::size_t p = fit.n_features();
    out << "sleephrv-model v1\n";
    out << "n_features " << p << '\n';
    out << "y_mean " << dsv::format_full(fit.y_mean) << '\n';
    out << "alpha " << dsv::format_full(fit.alpha) << '\n';
    out << "lambda " << dsv::format_full(fit.lambda) << '\n';
    out << "n_iter " << fit.n_iter_used << '\n';
    for (std::size_t j = 0; j < p; ++j) {
        out << fit.feature_names[j] << ' ' << dsv::format_full(fit.feature_means[j]) << ' '
            << dsv::format_full(fit.feature_sds[j]) << ' '
            << dsv::format_full(fit.weights_std[j]) << '\n';
    }
    out << "covariance\n";
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            out << (j ? " " : "") << dsv::format_full(fit.posterior_cov[i * p + j]);
        }
        out << '\n';
    }
}

ModelFit load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    std::string line;
    std::getline(in, line);
    if (line != "sleephrv-model v1") throw Error("unsupported model file format: " + path);

    ModelFit fit;
    std::size_t p = 0;
    std::string key;
    in >> key >> p;
    if (key != "n_features") throw Error("malformed model file: " + path);
    in >> key >> fit.y_mean;
    in >> key >> fit.alpha;
    in >> key >> fit.lambda;
    in >> key >> fit.n_iter_used;
    for (std::size_t j = 0; j < p; ++j) {
        std::string name;
        double mean = 0.0, sd = 0.0, w = 0.0;
        in >> name >> mean >> sd >> w;
        fit.feature_names.push_back(name);
        fit.feature_means.push_back(mean);
        fit.feature_sds.push_back(sd);
        fit.weights_std.push_back(w);
    }
    in >> key;
    if (key != "covariance") throw Error("malformed model file: " + path);
    fit.posterior_cov.resize(p * p);
    for (std::size_t i = 0; i < p * p; ++i) in >> fit.posterior_cov[i];
    if (!in) throw Error("truncated model file: " + path);
    return fit;
}

}  // namespace sleephrv::model
