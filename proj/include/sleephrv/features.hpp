#pragma once

#include <vector>

#include "sleephrv/ecg.hpp"
#include "sleephrv/types.hpp"

namespace sleephrv::features {

// Time-domain HRV metrics of one RR segment. A single-interval series yields
// mean_rr and rr_range only; rmssd/sdnn/pnn50 are NaN-tagged (they need a
// successive difference).
struct HrvMetrics {
    double mean_rr = kNaN;    // ms
    double rmssd = kNaN;      // ms
    double sdnn = kNaN;       // ms, sample (n-1) convention
    double pnn50 = kNaN;      // percent, strict |diff| > 50 ms
    double rr_range = kNaN;   // ms, max - min
};

HrvMetrics hrv_metrics(const RrSeries& rr);

// Age normalization: raw / (age/reference_age + epsilon). Reference age 65
// marks the typical autonomic transition point; epsilon keeps the
// denominator away from zero.
struct AgeNormParams {
    double reference_age = 65.0;
    double epsilon = 0.1;
};

double age_normalize(double raw, double age_years, const AgeNormParams& params = {});

// Target transform ln(glucose_mmol_L) and its inverse.
double log_glucose(double glucose_mmol_l);
double back_transform(double y_log);

struct FeatureOptions {
    bool age_normalize = true;   // emit hrv_{stage}_mean_rr_age_normalized columns
    bool psqi_age = true;        // emit psqi * age when a psqi column exists
};

// Assembles the cohort feature matrix: per stage the 5 raw HRV columns
// (named hrv_{ds|rem|rs}_{metric}) plus the age-normalized mean RR column,
// then all clinical columns verbatim, age, and derived psqi_age. Missing
// stage data produces missing values; all-missing columns are dropped with
// a warning. Target is log_glucose per subject.
FeatureMatrix build_feature_matrix(const Cohort& cohort,
                                   const std::vector<ecg::StageSplit>& stage_series,
                                   const AgeNormParams& params = {},
                                   const FeatureOptions& options = {});

}  // namespace sleephrv::features
