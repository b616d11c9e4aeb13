#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sleephrv/model.hpp"
#include "sleephrv/stats.hpp"
#include "sleephrv/types.hpp"

namespace sleephrv::experiment {

// Deterministic stratified k-fold plan: subjects are ordered into k target
// quantile bins, each bin is shuffled by a seeded mt19937 Fisher-Yates
// (both fully specified, so plans reproduce across platforms), and the
// concatenated order is dealt round-robin to folds.
struct FoldPlan {
    std::vector<int> assignments;   // fold index per subject
    int k = 5;
    std::uint32_t seed = 42;

    std::vector<std::size_t> fold_sizes() const;
};

FoldPlan stratified_kfold(std::span<const double> target, int k = 5, std::uint32_t seed = 42);

enum class SelectionMode { global, per_fold };

std::string to_string(SelectionMode m);
std::optional<SelectionMode> parse_selection_mode(std::string_view token);

struct CvOptions {
    SelectionMode selection_mode = SelectionMode::global;
    double p_threshold = 0.2;
    std::size_t top_k = 15;
    model::RidgeHyperparams ridge;
    std::vector<double> tolerance_bands = model::kDefaultToleranceBands;
};

struct FoldResult {
    int fold = 0;
    model::Metrics metrics;
    std::vector<std::string> selected;
    model::ModelFit fit;
    std::vector<std::size_t> test_rows;
    std::vector<double> predictions;   // aligned with test_rows
};

struct CvReport {
    std::vector<FoldResult> per_fold;
    double mean_r2 = kNaN;
    double sd_r2 = kNaN;
    double mean_mae = kNaN;
    double sd_mae = kNaN;
    double cv_percent = kNaN;          // sd(r2)/mean(r2) * 100
    double pooled_r = kNaN;            // pearson over pooled held-out predictions
    double pooled_p = kNaN;
    std::vector<double> tolerance_bands;
    std::vector<double> tolerance_fractions;
    std::vector<double> pooled_true;   // per subject, log units
    std::vector<double> pooled_pred;
    std::vector<std::string> warnings;
};

// Per fold: feature selection per selection_mode (per_fold selects on
// training rows only; global selects once on all rows), mean-imputation and
// standardization from training rows, fit, predict held-out rows. Summary
// statistics are mean +- sample SD across folds; pooled held-out
// predictions feed the pearson and tolerance analyses.
CvReport run_cv(const FeatureMatrix& m, const FoldPlan& plan, const CvOptions& opts = {});

enum class AblationConfig { full, no_age_norm, no_sleep_hrv, ecg_only, clinical_only };

inline constexpr std::array<AblationConfig, 5> kAllAblationConfigs{
    AblationConfig::full, AblationConfig::no_age_norm, AblationConfig::no_sleep_hrv,
    AblationConfig::ecg_only, AblationConfig::clinical_only};

std::string to_string(AblationConfig c);
std::optional<AblationConfig> parse_ablation_config(std::string_view token);

// Candidate-pool restriction per configuration:
//   Full         everything
//   NoAgeNorm    *_age_normalized columns removed (raw mean RR stays)
//   NoSleepHrv   all hrv_* columns removed
//   EcgOnly      only hrv_* columns (normalized included)
//   ClinicalOnly clinical columns and age; no HRV, no derived columns
std::vector<std::string> ablation_pool(AblationConfig c, const std::vector<std::string>& names);

struct AblationEntry {
    AblationConfig config = AblationConfig::full;
    CvReport cv;
    std::size_t n_features = 0;
    double delta_r2 = kNaN;   // mean_r2(config) - mean_r2(Full); 0 for Full
};

struct AblationReport {
    std::vector<AblationEntry> entries;
};

// Reruns selection (k capped at pool size) and cross-validation per
// configuration, in the fixed order Full, NoAgeNorm, NoSleepHrv, EcgOnly,
// ClinicalOnly (or the requested subset of it).
AblationReport run_ablation(const FeatureMatrix& m, const FoldPlan& plan,
                            const CvOptions& opts = {},
                            const std::vector<AblationConfig>& subset = {});

struct StageSummary {
    Stage stage = Stage::ds;
    std::size_t n_columns = 0;
    double mean_abs_r = kNaN;
    double sd_abs_r = kNaN;    // NaN when a stage has a single column
    double min_abs_r = kNaN;
    double max_abs_r = kNaN;
};

// Correlation of each stage's HRV columns (raw + normalized) with the
// target; reports mean +- sample SD and (min, max) of |r| per stage.
std::vector<StageSummary> sleep_stage_analysis(const FeatureMatrix& m);

struct CompareResult {
    double t = kNaN;
    double p = kNaN;
    bool indistinguishable = false;   // zero-variance per-fold differences
};

// Paired t-test over per-fold r2 values of two reports on the same plan.
CompareResult compare_models(const CvReport& a, const CvReport& b);

}  // namespace sleephrv::experiment
