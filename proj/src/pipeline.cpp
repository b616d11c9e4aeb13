#include "sleephrv/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "dsv.hpp"
#include "sleephrv/features.hpp"
#include "sleephrv/ingest.hpp"

namespace fs = std::filesystem;

namespace sleephrv::pipeline {

namespace {

// Index-addressed parallel map: results land in preassigned slots, so the
// output is identical for any job count.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const int n_threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), count));
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string signal_path_for(const RunConfig& config, const SubjectRecord& subject,
                            bool& is_ecg) {
    is_ecg = false;
    if (!subject.signal_ref.empty()) {
        fs::path p(subject.signal_ref);
        if (!p.is_absolute()) {
            p = fs::path(config.clinical_path).parent_path() / p;
        }
        is_ecg = p.extension() == ".ecg";
        return p.lexically_normal().string();
    }
    if (!config.rr_dir.empty()) {
        return (fs::path(config.rr_dir) / (subject.id + ".rr")).string();
    }
    if (!config.ecg_dir.empty()) {
        is_ecg = true;
        return (fs::path(config.ecg_dir) / (subject.id + ".ecg")).string();
    }
    throw Error("no signal source configured (rr_dir, ecg_dir, or per-subject rr_file)");
}

struct SubjectSignal {
    ecg::StageSplit split;
    QcRow qc;
};

SubjectSignal process_subject(const RunConfig& config, const SubjectRecord& subject) {
    SubjectSignal result;
    result.qc.subject_id = subject.id;

    bool is_ecg = false;
    const std::string path = signal_path_for(config, subject, is_ecg);
    if (!fs::exists(path)) throw Error("signal file missing: " + path);

    RrSeries rr;
    if (is_ecg) {
        result.qc.source = "ecg";
        const EcgRecord record = ingest::load_ecg(path, config.sampling_rate_hz);
        const auto amplitude = ecg::validate_amplitude(record);
        result.qc.amplitude_max_mv = amplitude.max_abs_mv;
        result.qc.amplitude_pass = amplitude.pass ? 1 : 0;
        if (!amplitude.pass) {
            throw Error("amplitude validation failed (max " +
                        dsv::format_sig(amplitude.max_abs_mv) + " mV)");
        }
        const PeakList peaks = ecg::detect_r_peaks(record);
        result.qc.n_peaks = peaks.size();
        rr = ecg::peaks_to_rr(peaks, record.fs_hz);
    } else {
        result.qc.source = "rr";
        rr = ingest::load_rr_series(path);
    }
    result.qc.n_intervals = rr.size();
    for (auto flag : rr.out_of_range) result.qc.n_flagged_range += flag;

    const RrSeries cleaned = ecg::remove_artifacts(rr, config.artifact_window);
    result.qc.n_artifacts_removed = rr.size() - cleaned.size();

    StageAnnotation ann;
    if (!config.stage_dir.empty()) {
        const auto ann_path = fs::path(config.stage_dir) / (subject.id + ".stages");
        if (!fs::exists(ann_path)) throw Error("stage annotation missing: " + ann_path.string());
        ann = ingest::load_stage_annotation(ann_path.string());
    }
    result.split = ecg::segment_by_stage(cleaned, ann);

    result.qc.n_ds = result.split.ds.size();
    result.qc.n_rem = result.split.rem.size();
    result.qc.n_rs = result.split.rs.size();
    result.qc.n_unassigned =
        cleaned.size() - result.qc.n_ds - result.qc.n_rem - result.qc.n_rs;
    return result;
}

void ensure_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
}

std::ofstream open_out(const std::string& path, const std::string& provenance) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << "# " << provenance << '\n';
    return out;
}

}  // namespace

ExtractResult extract_features(const RunConfig& config, int jobs) {
    ExtractResult result;
    if (!config.feature_matrix.empty()) {
        result.matrix = load_feature_matrix(config.feature_matrix);
        return result;
    }

    result.cohort = ingest::load_clinical_table(config.clinical_path);
    const std::size_t n = result.cohort.size();
    std::vector<SubjectSignal> signals(n);

    parallel_for(n, jobs, [&](std::size_t i) {
        const auto& subject = result.cohort.subjects[i];
        try {
            signals[i] = process_subject(config, subject);
        } catch (const Error& e) {
            throw Error("subject '" + subject.id + "': " + e.what());
        }
    });

    std::vector<ecg::StageSplit> splits;
    splits.reserve(n);
    for (auto& s : signals) {
        splits.push_back(std::move(s.split));
        result.qc.push_back(std::move(s.qc));
    }
    result.matrix = features::build_feature_matrix(result.cohort, splits, config.age_norm,
                                                   config.feature_options);
    return result;
}

void write_feature_matrix(const FeatureMatrix& m, const std::string& path,
                          const std::string& provenance) {
    auto out = open_out(path, provenance);
    out << "subject_id";
    for (const auto& name : m.names) out << ',' << name;
    out << ",target_log_glucose\n";
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        out << m.subject_ids[i];
        for (const auto& col : m.columns) {
            out << ',';
            if (!is_missing(col[i])) out << dsv::format_full(col[i]);
        }
        out << ',' << dsv::format_full(m.target[i]) << '\n';
    }
}

FeatureMatrix load_feature_matrix(const std::string& path) {
    const auto lines = dsv::read_lines(path);
    std::size_t first = 0;
    while (first < lines.size() &&
           (lines[first].empty() || lines[first][0] == '#')) ++first;
    if (first >= lines.size()) throw Error("feature matrix file is empty: " + path);

    const char delim = dsv::sniff_delimiter(lines[first]);
    const auto header = dsv::split(lines[first], delim);
    if (header.size() < 2 || dsv::strip(header.front()) != "subject_id" ||
        dsv::strip(header.back()) != "target_log_glucose") {
        throw Error("feature matrix needs subject_id ... target_log_glucose columns: " + path);
    }

    FeatureMatrix m;
    for (std::size_t j = 1; j + 1 < header.size(); ++j) m.names.push_back(dsv::strip(header[j]));
    m.columns.assign(m.names.size(), {});

    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        if (lines[i].empty() || lines[i][0] == '#') continue;
        const auto cells = dsv::split(lines[i], delim);
        if (cells.size() != header.size()) {
            throw Error("row " + std::to_string(i + 1) + " has wrong field count in " + path);
        }
        m.subject_ids.push_back(dsv::strip(cells.front()));
        for (std::size_t j = 0; j < m.names.size(); ++j) {
            const auto v = dsv::parse_double(cells[j + 1]);
            m.columns[j].push_back(v ? *v : kNaN);
        }
        const auto target = dsv::parse_double(cells.back());
        if (!target) throw Error("missing target at row " + std::to_string(i + 1) + " in " + path);
        m.target.push_back(*target);
    }
    if (m.subject_ids.empty()) throw Error("feature matrix has no rows: " + path);
    return m;
}

void write_qc_report(const std::vector<QcRow>& qc, const std::string& path,
                     const std::string& provenance) {
    auto out = open_out(path, provenance);
    out << "subject_id,source,amplitude_max_mv,amplitude_pass,n_peaks,n_intervals,"
           "n_flagged_range,n_artifacts_removed,n_ds,n_rem,n_rs,n_unassigned\n";
    for (const auto& row : qc) {
        out << row.subject_id << ',' << row.source << ',';
        if (!is_missing(row.amplitude_max_mv)) out << dsv::format_full(row.amplitude_max_mv);
        out << ',';
        if (row.amplitude_pass >= 0) out << row.amplitude_pass;
        out << ',' << row.n_peaks << ',' << row.n_intervals << ',' << row.n_flagged_range << ','
            << row.n_artifacts_removed << ',' << row.n_ds << ',' << row.n_rem << ',' << row.n_rs
            << ',' << row.n_unassigned << '\n';
    }
}

void write_selection_table(const stats::SelectionReport& report, const std::string& path,
                           const std::string& provenance) {
    auto out = open_out(path, provenance);
    out << "rank,feature,r,p_value,n,selected\n";
    std::size_t rank = 1;
    for (const auto& c : report.ranked) {
        const bool selected = std::find(report.selected.begin(), report.selected.end(),
                                        c.feature) != report.selected.end();
        out << rank++ << ',' << c.feature << ',' << dsv::format_full(c.r) << ','
            << dsv::format_full(c.p) << ',' << c.n << ',' << (selected ? 1 : 0) << '\n';
    }
}

void write_cv_folds(const experiment::CvReport& cv, const std::string& path,
                    const std::string& provenance) {
    auto out = open_out(path, provenance);
    out << "fold,n_test,r2,mae,pearson_r,pearson_p,n_features\n";
    for (const auto& fold : cv.per_fold) {
        out << fold.fold << ',' << fold.test_rows.size() << ','
            << dsv::format_full(fold.metrics.r2) << ',' << dsv::format_full(fold.metrics.mae)
            << ',' << dsv::format_full(fold.metrics.pearson_r) << ','
            << dsv::format_full(fold.metrics.pearson_p) << ',' << fold.selected.size() << '\n';
    }
}

void write_ablation_table(const experiment::AblationReport& report, const std::string& path,
                          const std::string& provenance) {
    auto out = open_out(path, provenance);
    out << "configuration,r2,mae,n_features,delta_r2\n";
    for (const auto& entry : report.entries) {
        out << experiment::to_string(entry.config) << ',' << dsv::format_full(entry.cv.mean_r2)
            << ',' << dsv::format_full(entry.cv.mean_mae) << ',' << entry.n_features << ','
            << dsv::format_full(entry.delta_r2) << '\n';
    }
}

void write_stage_table(const std::vector<experiment::StageSummary>& stages,
                       const std::string& path, const std::string& provenance) {
    auto out = open_out(path, provenance);
    out << "stage,mean_abs_r,sd_abs_r,min_abs_r,max_abs_r,n_columns\n";
    for (const auto& s : stages) {
        out << stage_token(s.stage) << ',' << dsv::format_full(s.mean_abs_r) << ','
            << (is_missing(s.sd_abs_r) ? std::string() : dsv::format_full(s.sd_abs_r)) << ','
            << dsv::format_full(s.min_abs_r) << ',' << dsv::format_full(s.max_abs_r) << ','
            << s.n_columns << '\n';
    }
}

void write_tolerance_table(const std::vector<double>& bands,
                           const std::vector<double>& fractions,
                           const std::string& path, const std::string& provenance) {
    auto out = open_out(path, provenance);
    out << "band_mmol_l,fraction_within\n";
    for (std::size_t i = 0; i < bands.size(); ++i) {
        out << dsv::format_full(bands[i]) << ',' << dsv::format_full(fractions[i]) << '\n';
    }
}

ExtractResult cmd_extract_features(const RunConfig& config, int jobs) {
    ensure_output_dir(config.output_dir);
    const std::string provenance = "sleephrv extract-features config=" + config_to_json(config);

    ExtractResult result = extract_features(config, jobs);
    const fs::path out(config.output_dir);
    write_feature_matrix(result.matrix, (out / "feature_matrix.csv").string(), provenance);
    write_qc_report(result.qc, (out / "qc_report.csv").string(), provenance);
    for (const auto& w : result.matrix.warnings) std::cerr << "warning: " << w << '\n';
    std::cerr << "extracted " << result.matrix.n_cols() << " features for "
              << result.matrix.n_rows() << " subjects\n";
    return result;
}

namespace {

std::string format_pm(double mean, double sd) {
    return dsv::format_sig(mean) + " +- " + (is_missing(sd) ? "n/a" : dsv::format_sig(sd));
}

std::string build_summary(const RunConfig& config, const RunResult& r) {
    std::ostringstream s;
    s << "sleephrv run summary\n";
    s << "====================\n";
    s << "seed: " << config.seed << "  folds: " << config.k_folds
      << "  selection: " << experiment::to_string(config.selection_mode)
      << " (p < " << dsv::format_sig(config.p_threshold) << ", top " << config.top_k << ")\n";
    s << "subjects: " << r.matrix.n_rows() << "  candidate features: " << r.matrix.n_cols()
      << "\n\n";

    s << "cross-validated performance (log-glucose)\n";
    s << "  R^2: " << format_pm(r.cv.mean_r2, r.cv.sd_r2)
      << "  (CV% " << dsv::format_sig(r.cv.cv_percent) << ")\n";
    s << "  MAE: " << format_pm(r.cv.mean_mae, r.cv.sd_mae) << '\n';
    s << "  pooled pearson r: " << dsv::format_sig(r.cv.pooled_r)
      << " (p = " << dsv::format_sig(r.cv.pooled_p) << ")\n";

    s << "  tolerance:";
    for (std::size_t i = 0; i < r.cv.tolerance_bands.size(); ++i) {
        s << "  +-" << dsv::format_sig(r.cv.tolerance_bands[i]) << " mmol/L: "
          << dsv::format_sig(100.0 * r.cv.tolerance_fractions[i]) << '%';
    }
    s << "\n\n";

    s << "top features (|r| ranking)\n";
    const std::size_t top = std::min<std::size_t>(5, r.selection.ranked.size());
    for (std::size_t i = 0; i < top; ++i) {
        const auto& c = r.selection.ranked[i];
        s << "  " << (i + 1) << ". " << c.feature << "  r = " << dsv::format_sig(c.r)
          << "  p = " << dsv::format_sig(c.p) << '\n';
    }
    s << '\n';

    s << "ablation (delta R^2 vs Full)\n";
    for (const auto& entry : r.ablation.entries) {
        s << "  " << experiment::to_string(entry.config) << ": R^2 = "
          << dsv::format_sig(entry.cv.mean_r2) << "  MAE = " << dsv::format_sig(entry.cv.mean_mae)
          << "  features = " << entry.n_features
          << "  delta = " << dsv::format_sig(entry.delta_r2) << '\n';
    }
    s << '\n';

    s << "sleep-stage correlations (|r| with target)\n";
    for (const auto& st : r.stages) {
        s << "  " << stage_token(st.stage) << ": " << format_pm(st.mean_abs_r, st.sd_abs_r)
          << "  range " << dsv::format_sig(st.min_abs_r) << " - " << dsv::format_sig(st.max_abs_r)
          << '\n';
    }
    s << '\n';

    if (r.age_norm_effect.indistinguishable) {
        s << "age-normalization effect (Full vs NoAgeNorm): indistinguishable\n";
    } else {
        s << "age-normalization effect (Full vs NoAgeNorm): t = "
          << dsv::format_sig(r.age_norm_effect.t) << ", p = "
          << dsv::format_sig(r.age_norm_effect.p) << '\n';
    }
    return s.str();
}

}  // namespace

RunResult cmd_run(const RunConfig& config, int jobs) {
    ensure_output_dir(config.output_dir);
    const std::string provenance = "sleephrv run config=" + config_to_json(config);
    const fs::path out(config.output_dir);

    RunResult result;
    {
        ExtractResult extracted = extract_features(config, jobs);
        result.matrix = std::move(extracted.matrix);
        if (config.feature_matrix.empty()) {
            write_feature_matrix(result.matrix, (out / "feature_matrix.csv").string(), provenance);
            write_qc_report(extracted.qc, (out / "qc_report.csv").string(), provenance);
        }
    }
    for (const auto& w : result.matrix.warnings) std::cerr << "warning: " << w << '\n';

    experiment::CvOptions opts;
    opts.selection_mode = config.selection_mode;
    opts.p_threshold = config.p_threshold;
    opts.top_k = config.top_k;
    opts.ridge = config.ridge;
    opts.tolerance_bands = config.tolerance_bands;

    result.selection = stats::select_features(result.matrix, config.p_threshold, config.top_k);
    result.plan = experiment::stratified_kfold(result.matrix.target, config.k_folds, config.seed);
    result.cv = experiment::run_cv(result.matrix, result.plan, opts);
    result.ablation = experiment::run_ablation(result.matrix, result.plan, opts);
    result.stages = experiment::sleep_stage_analysis(result.matrix);
    result.age_norm_effect = experiment::compare_models(result.ablation.entries[0].cv,
                                                        result.ablation.entries[1].cv);

    // final model on all rows, for reproducible downstream prediction
    if (result.selection.selected.empty()) throw Error("selection yielded zero features");
    {
        std::vector<std::vector<double>> cols;
        for (const auto& name : result.selection.selected) {
            std::vector<double> col = result.matrix.column(name);
            double mean = 0.0;
            std::size_t count = 0;
            for (double v : col) {
                if (!is_missing(v)) {
                    mean += v;
                    ++count;
                }
            }
            mean = count > 0 ? mean / static_cast<double>(count) : 0.0;
            for (double& v : col) {
                if (is_missing(v)) v = mean;
            }
            cols.push_back(std::move(col));
        }
        result.final_fit =
            model::fit(result.selection.selected, cols, result.matrix.target, config.ridge);
    }

    write_selection_table(result.selection, (out / "selection.csv").string(), provenance);
    write_cv_folds(result.cv, (out / "cv_folds.csv").string(), provenance);
    write_ablation_table(result.ablation, (out / "ablation.csv").string(), provenance);
    write_stage_table(result.stages, (out / "sleep_stages.csv").string(), provenance);
    write_tolerance_table(result.cv.tolerance_bands, result.cv.tolerance_fractions,
                          (out / "tolerance.csv").string(), provenance);
    model::save_model(result.final_fit, (out / "model_fit.txt").string());

    result.summary = build_summary(config, result);
    {
        auto summary_out = open_out((out / "summary.txt").string(), provenance);
        summary_out << result.summary;
    }
    for (const auto& w : result.cv.warnings) std::cerr << "warning: " << w << '\n';
    return result;
}

experiment::AblationReport cmd_ablate(const RunConfig& config, int jobs,
                                      const std::vector<experiment::AblationConfig>& subset) {
    ensure_output_dir(config.output_dir);
    const std::string provenance = "sleephrv ablate config=" + config_to_json(config);

    ExtractResult extracted = extract_features(config, jobs);
    experiment::CvOptions opts;
    opts.selection_mode = config.selection_mode;
    opts.p_threshold = config.p_threshold;
    opts.top_k = config.top_k;
    opts.ridge = config.ridge;
    opts.tolerance_bands = config.tolerance_bands;

    const auto plan =
        experiment::stratified_kfold(extracted.matrix.target, config.k_folds, config.seed);
    const auto report = experiment::run_ablation(extracted.matrix, plan, opts, subset);
    write_ablation_table(report, (fs::path(config.output_dir) / "ablation.csv").string(),
                         provenance);
    return report;
}

}  // namespace sleephrv::pipeline
