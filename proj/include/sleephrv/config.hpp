#pragma once

#include <string>
#include <vector>

#include "sleephrv/experiment.hpp"
#include "sleephrv/features.hpp"
#include "sleephrv/model.hpp"

namespace sleephrv {

// Resolved run configuration. Loaded from a JSON file; CLI flags override
// file values, file values override the defaults below.
struct RunConfig {
    // data sources
    std::string clinical_path;
    std::string rr_dir;            // <subject_id>.rr per subject
    std::string ecg_dir;           // <subject_id>.ecg per subject
    std::string stage_dir;         // optional <subject_id>.stages annotations
    std::string feature_matrix;    // optional precomputed matrix (skips extraction)
    double sampling_rate_hz = 250.0;

    // signal processing
    int artifact_window = ecg::kDefaultArtifactWindow;

    // feature engineering
    features::AgeNormParams age_norm;
    features::FeatureOptions feature_options;

    // selection + model
    double p_threshold = 0.2;
    std::size_t top_k = 15;
    model::RidgeHyperparams ridge;

    // cross-validation
    int k_folds = 5;
    std::uint32_t seed = 42;
    experiment::SelectionMode selection_mode = experiment::SelectionMode::global;
    std::vector<double> tolerance_bands = model::kDefaultToleranceBands;

    std::string output_dir = "out";
};

// Parses the JSON config and resolves relative data paths against the
// config file's directory. Referenced paths must exist.
RunConfig load_run_config(const std::string& path);

// Canonical one-line JSON echo of a resolved config (sorted keys); embedded
// in every report for provenance.
std::string config_to_json(const RunConfig& config);

}  // namespace sleephrv
