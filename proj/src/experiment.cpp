#include "sleephrv/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sleephrv::experiment {

std::vector<std::size_t> FoldPlan::fold_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int f : assignments) sizes[static_cast<std::size_t>(f)]++;
    return sizes;
}

FoldPlan stratified_kfold(std::span<const double> target, int k, std::uint32_t seed) {
    const std::size_t n = target.size();
    if (k < 2) throw Error("k-fold needs k >= 2");
    if (n < static_cast<std::size_t>(k)) throw Error("fewer subjects than folds");

    // order subjects by target (stable on ties), then split into k
    // contiguous quantile bins
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return target[a] < target[b]; });

    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);

    // one generator drives every bin shuffle; mt19937 and the explicit
    // Fisher-Yates below are both fully specified, so plans are
    // platform-independent
    std::mt19937 gen(seed);

    FoldPlan plan;
    plan.assignments.assign(n, 0);
    plan.k = k;
    plan.seed = seed;

    std::size_t cursor = 0;   // global round-robin dealer across bins
    std::size_t offset = 0;
    for (std::size_t bin = 0; bin < static_cast<std::size_t>(k); ++bin) {
        const std::size_t bin_size = base + (bin < extra ? 1 : 0);
        std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(offset),
                                         order.begin() + static_cast<std::ptrdiff_t>(offset + bin_size));
        for (std::size_t i = members.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(gen() % i);
            std::swap(members[i - 1], members[j]);
        }
        for (std::size_t idx : members) {
            plan.assignments[idx] = static_cast<int>(cursor % static_cast<std::size_t>(k));
            ++cursor;
        }
        offset += bin_size;
    }
    return plan;
}

std::string to_string(SelectionMode m) {
    return m == SelectionMode::global ? "global" : "per-fold";
}

std::optional<SelectionMode> parse_selection_mode(std::string_view token) {
    if (token == "global") return SelectionMode::global;
    if (token == "per-fold" || token == "per_fold") return SelectionMode::per_fold;
    return std::nullopt;
}

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return kNaN;
    const double m = mean_of(v);
    double ssq = 0.0;
    for (double x : v) ssq += (x - m) * (x - m);
    return std::sqrt(ssq / static_cast<double>(v.size() - 1));
}

FeatureMatrix restrict_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows) {
    FeatureMatrix out;
    out.names = m.names;
    for (std::size_t i : rows) {
        out.subject_ids.push_back(m.subject_ids[i]);
        out.target.push_back(m.target[i]);
    }
    for (const auto& col : m.columns) {
        std::vector<double> sub;
        sub.reserve(rows.size());
        for (std::size_t i : rows) sub.push_back(col[i]);
        out.columns.push_back(std::move(sub));
    }
    return out;
}

}  // namespace

CvReport run_cv(const FeatureMatrix& m, const FoldPlan& plan, const CvOptions& opts) {
    const std::size_t n = m.n_rows();
    if (n == 0 || m.n_cols() == 0) throw Error("run_cv: empty feature matrix");
    if (plan.assignments.size() != n) throw Error("fold plan does not cover the matrix rows");
    if (plan.k < 2) throw Error("fold plan needs k >= 2");

    std::vector<std::vector<std::size_t>> test_rows(static_cast<std::size_t>(plan.k));
    for (std::size_t i = 0; i < n; ++i) {
        const int f = plan.assignments[i];
        if (f < 0 || f >= plan.k) throw Error("fold assignment out of range");
        test_rows[static_cast<std::size_t>(f)].push_back(i);
    }
    for (const auto& rows : test_rows) {
        if (rows.size() < 2) throw Error("a fold has fewer than 2 test rows");
    }

    CvReport report;
    report.pooled_true.assign(n, kNaN);
    report.pooled_pred.assign(n, kNaN);

    std::vector<std::string> global_selected;
    if (opts.selection_mode == SelectionMode::global) {
        const auto selection = stats::select_features(m, opts.p_threshold, opts.top_k);
        global_selected = selection.selected;
        for (const auto& w : selection.warnings) report.warnings.push_back(w);
        if (global_selected.empty()) throw Error("selection yielded zero features");
    }

    for (int f = 0; f < plan.k; ++f) {
        const auto& test = test_rows[static_cast<std::size_t>(f)];
        std::vector<std::size_t> train;
        train.reserve(n - test.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (plan.assignments[i] != f) train.push_back(i);
        }

        std::vector<std::string> selected = global_selected;
        if (opts.selection_mode == SelectionMode::per_fold) {
            const auto fold_matrix = restrict_rows(m, train);
            const auto selection = stats::select_features(fold_matrix, opts.p_threshold, opts.top_k);
            selected = selection.selected;
            if (selected.empty()) {
                throw Error("selection yielded zero features in fold " + std::to_string(f));
            }
        }

        // assemble training columns; missing values take the training mean
        std::vector<std::string> used;
        std::vector<std::vector<double>> train_cols;
        std::vector<std::vector<double>> test_cols;
        for (const auto& name : selected) {
            const auto& col = m.column(name);
            double mean = 0.0;
            std::size_t count = 0;
            for (std::size_t i : train) {
                if (!is_missing(col[i])) {
                    mean += col[i];
                    ++count;
                }
            }
            if (count == 0) {
                report.warnings.push_back("fold " + std::to_string(f) + ": column " + name +
                                          " has no training values; dropped");
                continue;
            }
            mean /= static_cast<double>(count);

            std::vector<double> tr, te;
            tr.reserve(train.size());
            te.reserve(test.size());
            for (std::size_t i : train) tr.push_back(is_missing(col[i]) ? mean : col[i]);
            for (std::size_t i : test) te.push_back(is_missing(col[i]) ? mean : col[i]);
            used.push_back(name);
            train_cols.push_back(std::move(tr));
            test_cols.push_back(std::move(te));
        }
        if (used.empty()) throw Error("no usable features in fold " + std::to_string(f));

        std::vector<double> y_train;
        y_train.reserve(train.size());
        for (std::size_t i : train) y_train.push_back(m.target[i]);

        FoldResult fold;
        fold.fold = f;
        fold.selected = used;
        fold.fit = model::fit(used, train_cols, y_train, opts.ridge);
        for (const auto& w : fold.fit.warnings) {
            report.warnings.push_back("fold " + std::to_string(f) + ": " + w);
        }
        fold.test_rows = test;
        fold.predictions = model::predict(fold.fit, used, test_cols);

        std::vector<double> y_test;
        y_test.reserve(test.size());
        for (std::size_t i : test) y_test.push_back(m.target[i]);
        fold.metrics = model::metrics(y_test, fold.predictions);

        for (std::size_t j = 0; j < test.size(); ++j) {
            report.pooled_true[test[j]] = m.target[test[j]];
            report.pooled_pred[test[j]] = fold.predictions[j];
        }
        report.per_fold.push_back(std::move(fold));
    }

    std::vector<double> r2s, maes;
    for (const auto& fold : report.per_fold) {
        r2s.push_back(fold.metrics.r2);
        maes.push_back(fold.metrics.mae);
    }
    report.mean_r2 = mean_of(r2s);
    report.sd_r2 = sample_sd(r2s);
    report.mean_mae = mean_of(maes);
    report.sd_mae = sample_sd(maes);
    report.cv_percent = report.mean_r2 != 0.0 ? report.sd_r2 / report.mean_r2 * 100.0 : kNaN;

    try {
        const auto pooled = stats::pearson(report.pooled_pred, report.pooled_true);
        report.pooled_r = pooled.r;
        report.pooled_p = pooled.p;
    } catch (const Error& e) {
        report.warnings.push_back(std::string("pooled pearson undefined: ") + e.what());
    }
    report.tolerance_bands = opts.tolerance_bands;
    report.tolerance_fractions =
        model::tolerance_analysis(report.pooled_true, report.pooled_pred, opts.tolerance_bands);
    return report;
}

std::string to_string(AblationConfig c) {
    switch (c) {
        case AblationConfig::full: return "Full";
        case AblationConfig::no_age_norm: return "NoAgeNorm";
        case AblationConfig::no_sleep_hrv: return "NoSleepHrv";
        case AblationConfig::ecg_only: return "EcgOnly";
        case AblationConfig::clinical_only: return "ClinicalOnly";
    }
    throw Error("unknown ablation config");
}

std::optional<AblationConfig> parse_ablation_config(std::string_view token) {
    for (AblationConfig c : kAllAblationConfigs) {
        if (token == to_string(c)) return c;
    }
    return std::nullopt;
}

std::vector<std::string> ablation_pool(AblationConfig c, const std::vector<std::string>& names) {
    auto is_hrv = [](const std::string& n) { return n.rfind("hrv_", 0) == 0; };
    auto is_normalized = [](const std::string& n) {
        const std::string suffix = "_age_normalized";
        return n.size() > suffix.size() && n.compare(n.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    auto is_derived = [](const std::string& n) { return n == "psqi_age"; };

    std::vector<std::string> pool;
    for (const auto& name : names) {
        bool keep = false;
        switch (c) {
            case AblationConfig::full: keep = true; break;
            case AblationConfig::no_age_norm: keep = !is_normalized(name); break;
            case AblationConfig::no_sleep_hrv: keep = !is_hrv(name); break;
            case AblationConfig::ecg_only: keep = is_hrv(name); break;
            case AblationConfig::clinical_only: keep = !is_hrv(name) && !is_derived(name); break;
        }
        if (keep) pool.push_back(name);
    }
    return pool;
}

AblationReport run_ablation(const FeatureMatrix& m, const FoldPlan& plan,
                            const CvOptions& opts,
                            const std::vector<AblationConfig>& subset) {
    std::vector<AblationConfig> configs(kAllAblationConfigs.begin(), kAllAblationConfigs.end());
    if (!subset.empty()) {
        configs.clear();
        for (AblationConfig c : kAllAblationConfigs) {   // fixed emission order
            if (std::find(subset.begin(), subset.end(), c) != subset.end()) configs.push_back(c);
        }
    }

    AblationReport report;
    double full_r2 = kNaN;
    for (AblationConfig c : configs) {
        const auto pool = ablation_pool(c, m.names);
        if (pool.empty()) throw Error("empty feature pool for config " + to_string(c));

        FeatureMatrix sub;
        sub.subject_ids = m.subject_ids;
        sub.target = m.target;
        for (const auto& name : pool) {
            sub.names.push_back(name);
            sub.columns.push_back(m.column(name));
        }

        CvOptions config_opts = opts;
        config_opts.top_k = std::min(opts.top_k, pool.size());

        AblationEntry entry;
        entry.config = c;
        entry.cv = run_cv(sub, plan, config_opts);
        entry.n_features = entry.cv.per_fold.empty() ? 0 : entry.cv.per_fold.front().selected.size();
        if (c == AblationConfig::full) full_r2 = entry.cv.mean_r2;
        report.entries.push_back(std::move(entry));
    }
    for (auto& entry : report.entries) {
        entry.delta_r2 = entry.config == AblationConfig::full
                             ? 0.0
                             : entry.cv.mean_r2 - full_r2;   // NaN when Full was not run
    }
    return report;
}

std::vector<StageSummary> sleep_stage_analysis(const FeatureMatrix& m) {
    std::vector<StageSummary> summaries;
    for (Stage stage : kAllStages) {
        const std::string prefix = "hrv_" + to_string(stage) + "_";
        std::vector<double> abs_r;
        for (std::size_t j = 0; j < m.n_cols(); ++j) {
            if (m.names[j].rfind(prefix, 0) != 0) continue;
            try {
                abs_r.push_back(std::abs(stats::pearson(m.columns[j], m.target).r));
            } catch (const Error&) {
                // unusable column (constant or too few pairs); skipped
            }
        }
        if (abs_r.empty()) {
            throw Error("no usable HRV columns for stage " + to_string(stage));
        }
        StageSummary s;
        s.stage = stage;
        s.n_columns = abs_r.size();
        s.mean_abs_r = mean_of(abs_r);
        s.sd_abs_r = sample_sd(abs_r);   // NaN for a single column
        s.min_abs_r = *std::min_element(abs_r.begin(), abs_r.end());
        s.max_abs_r = *std::max_element(abs_r.begin(), abs_r.end());
        summaries.push_back(s);
    }
    return summaries;
}

CompareResult compare_models(const CvReport& a, const CvReport& b) {
    if (a.per_fold.size() != b.per_fold.size()) throw Error("fold-count mismatch");
    std::vector<double> ra, rb;
    for (const auto& f : a.per_fold) ra.push_back(f.metrics.r2);
    for (const auto& f : b.per_fold) rb.push_back(f.metrics.r2);

    CompareResult result;
    try {
        const auto t = stats::paired_t_test(ra, rb);
        result.t = t.t;
        result.p = t.p;
    } catch (const Error&) {
        result.indistinguishable = true;   // zero-variance differences
    }
    return result;
}

}  // namespace sleephrv::experiment
