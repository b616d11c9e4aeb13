#include "sleephrv/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace sleephrv::features {

HrvMetrics hrv_metrics(const RrSeries& rr) {
    const auto& x = rr.intervals_ms;
    const std::size_t n = x.size();
    if (n == 0) throw Error("hrv_metrics on empty RR series");

    HrvMetrics m;
    double sum = 0.0;
    double lo = x[0], hi = x[0];
    for (double v : x) {
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    m.mean_rr = sum / static_cast<double>(n);
    m.rr_range = hi - lo;
    if (n < 2) return m;   // rmssd/sdnn/pnn50 need a successive difference

    double ssq_dev = 0.0;
    for (double v : x) {
        const double d = v - m.mean_rr;
        ssq_dev += d * d;
    }
    m.sdnn = std::sqrt(ssq_dev / static_cast<double>(n - 1));

    double ssq_diff = 0.0;
    std::size_t over_50 = 0;
    for (std::size_t i = 1; i < n; ++i) {
        const double d = x[i] - x[i - 1];
        ssq_diff += d * d;
        if (std::abs(d) > 50.0) ++over_50;   // strict >, per definition of pNN50
    }
    m.rmssd = std::sqrt(ssq_diff / static_cast<double>(n - 1));
    m.pnn50 = 100.0 * static_cast<double>(over_50) / static_cast<double>(n - 1);
    return m;
}

double age_normalize(double raw, double age_years, const AgeNormParams& params) {
    if (age_years <= 0.0) throw Error("age must be positive");
    if (params.reference_age <= 0.0 || params.epsilon <= 0.0) {
        throw Error("invalid age normalization parameters");
    }
    return raw / (age_years / params.reference_age + params.epsilon);
}

double log_glucose(double glucose_mmol_l) {
    if (glucose_mmol_l <= 0.0) throw Error("glucose must be positive");
    return std::log(glucose_mmol_l);
}

double back_transform(double y_log) { return std::exp(y_log); }

namespace {

const char* metric_suffix(int k) {
    switch (k) {
        case 0: return "mean_rr";
        case 1: return "rmssd";
        case 2: return "sdnn";
        case 3: return "pnn50";
        case 4: return "rr_range";
    }
    return "";
}

double metric_value(const HrvMetrics& m, int k) {
    switch (k) {
        case 0: return m.mean_rr;
        case 1: return m.rmssd;
        case 2: return m.sdnn;
        case 3: return m.pnn50;
        case 4: return m.rr_range;
    }
    return kNaN;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) return false;
    }
    return true;
}

}  // namespace

FeatureMatrix build_feature_matrix(const Cohort& cohort,
                                   const std::vector<ecg::StageSplit>& stage_series,
                                   const AgeNormParams& params,
                                   const FeatureOptions& options) {
    const std::size_t n = cohort.subjects.size();
    if (n == 0) throw Error("cohort is empty");
    if (stage_series.size() != n) {
        throw Error("stage series count does not match cohort size");
    }

    FeatureMatrix m;
    for (const auto& s : cohort.subjects) {
        m.subject_ids.push_back(s.id);
        m.target.push_back(log_glucose(s.glucose_mmol_l));
    }

    auto add_column = [&](std::string name, std::vector<double> values) {
        m.names.push_back(std::move(name));
        m.columns.push_back(std::move(values));
    };

    // per-stage HRV blocks: 5 raw metrics, then the age-normalized mean RR
    for (Stage stage : kAllStages) {
        const std::string prefix = "hrv_" + to_string(stage) + "_";
        std::array<std::vector<double>, 5> metric_cols;
        for (auto& col : metric_cols) col.assign(n, kNaN);

        for (std::size_t i = 0; i < n; ++i) {
            const RrSeries& series = stage_series[i].at(stage);
            if (series.size() == 0) continue;
            const HrvMetrics metrics = hrv_metrics(series);
            for (int k = 0; k < 5; ++k) metric_cols[k][i] = metric_value(metrics, k);
        }
        for (int k = 0; k < 5; ++k) {
            add_column(prefix + metric_suffix(k), metric_cols[k]);
        }
        if (options.age_normalize) {
            std::vector<double> normalized(n, kNaN);
            const auto& mean_rr = m.columns[m.columns.size() - 5];
            for (std::size_t i = 0; i < n; ++i) {
                if (!is_missing(mean_rr[i])) {
                    normalized[i] = age_normalize(mean_rr[i], cohort.subjects[i].age_years, params);
                }
            }
            add_column(prefix + "mean_rr_age_normalized", std::move(normalized));
        }
    }

    // clinical columns verbatim, in cohort order
    for (std::size_t c = 0; c < cohort.clinical_names.size(); ++c) {
        std::vector<double> col(n, kNaN);
        for (std::size_t i = 0; i < n; ++i) {
            if (c < cohort.subjects[i].clinical.size()) col[i] = cohort.subjects[i].clinical[c];
        }
        add_column(cohort.clinical_names[c], std::move(col));
    }

    {
        std::vector<double> age(n);
        for (std::size_t i = 0; i < n; ++i) age[i] = cohort.subjects[i].age_years;
        add_column("age", std::move(age));
    }

    if (options.psqi_age) {
        std::size_t psqi_col = cohort.clinical_names.size();
        for (std::size_t c = 0; c < cohort.clinical_names.size(); ++c) {
            if (iequals(cohort.clinical_names[c], "psqi")) psqi_col = c;
        }
        if (psqi_col < cohort.clinical_names.size()) {
            std::vector<double> col(n, kNaN);
            for (std::size_t i = 0; i < n; ++i) {
                const double psqi = cohort.subjects[i].clinical[psqi_col];
                if (!is_missing(psqi)) col[i] = psqi * cohort.subjects[i].age_years;
            }
            add_column("psqi_age", std::move(col));
        }
    }

    // drop columns that carry no values at all
    std::vector<std::string> kept_names;
    std::vector<std::vector<double>> kept_columns;
    for (std::size_t j = 0; j < m.names.size(); ++j) {
        const bool all_missing = std::all_of(m.columns[j].begin(), m.columns[j].end(),
                                             [](double v) { return is_missing(v); });
        if (all_missing) {
            m.warnings.push_back("dropped all-missing column " + m.names[j]);
            continue;
        }
        kept_names.push_back(std::move(m.names[j]));
        kept_columns.push_back(std::move(m.columns[j]));
    }
    m.names = std::move(kept_names);
    m.columns = std::move(kept_columns);
    return m;
}

}  // namespace sleephrv::features
