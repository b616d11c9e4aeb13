#pragma once

#include <string>
#include <vector>

#include "sleephrv/config.hpp"
#include "sleephrv/ecg.hpp"
#include "sleephrv/experiment.hpp"
#include "sleephrv/types.hpp"

namespace sleephrv::pipeline {

// Per-subject quality-control summary emitted by feature extraction.
struct QcRow {
    std::string subject_id;
    std::string source;             // "rr" or "ecg"
    double amplitude_max_mv = kNaN; // ecg source only
    int amplitude_pass = -1;        // -1 n/a, else 0/1
    std::size_t n_peaks = 0;        // ecg source only
    std::size_t n_intervals = 0;    // loaded intervals before cleaning
    std::size_t n_flagged_range = 0;
    std::size_t n_artifacts_removed = 0;
    std::size_t n_ds = 0;
    std::size_t n_rem = 0;
    std::size_t n_rs = 0;
    std::size_t n_unassigned = 0;
};

struct ExtractResult {
    Cohort cohort;
    FeatureMatrix matrix;
    std::vector<QcRow> qc;
};

// ingest -> signal -> features for every subject (parallel across subjects
// when jobs > 1; outputs are independent of jobs). Any per-subject failure
// aborts with an Error naming the subject.
ExtractResult extract_features(const RunConfig& config, int jobs = 1);

// Subcommand bodies. Each writes its artifacts under config.output_dir and
// returns the computed structures; logs go to stderr only.
ExtractResult cmd_extract_features(const RunConfig& config, int jobs = 1);

struct RunResult {
    FeatureMatrix matrix;
    stats::SelectionReport selection;
    experiment::FoldPlan plan;
    experiment::CvReport cv;
    experiment::AblationReport ablation;
    std::vector<experiment::StageSummary> stages;
    experiment::CompareResult age_norm_effect;   // Full vs NoAgeNorm per-fold r2
    model::ModelFit final_fit;
    std::string summary;                         // human-readable block
};

RunResult cmd_run(const RunConfig& config, int jobs = 1);

experiment::AblationReport cmd_ablate(const RunConfig& config, int jobs = 1,
                                      const std::vector<experiment::AblationConfig>& subset = {});

// Report writers (deterministic formatting; every file starts with a
// provenance comment carrying the resolved config echo).
void write_feature_matrix(const FeatureMatrix& m, const std::string& path,
                          const std::string& provenance);
FeatureMatrix load_feature_matrix(const std::string& path);
void write_qc_report(const std::vector<QcRow>& qc, const std::string& path,
                     const std::string& provenance);
void write_selection_table(const stats::SelectionReport& report, const std::string& path,
                           const std::string& provenance);
void write_cv_folds(const experiment::CvReport& cv, const std::string& path,
                    const std::string& provenance);
void write_ablation_table(const experiment::AblationReport& report, const std::string& path,
                          const std::string& provenance);
void write_stage_table(const std::vector<experiment::StageSummary>& stages,
                       const std::string& path, const std::string& provenance);
void write_tolerance_table(const std::vector<double>& bands,
                           const std::vector<double>& fractions,
                           const std::string& path, const std::string& provenance);

}  // namespace sleephrv::pipeline
