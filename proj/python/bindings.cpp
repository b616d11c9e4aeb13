#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sleephrv/ecg.hpp"
#include "sleephrv/experiment.hpp"
#include "sleephrv/features.hpp"
#include "sleephrv/ingest.hpp"
#include "sleephrv/model.hpp"
#include "sleephrv/pipeline.hpp"
#include "sleephrv/stats.hpp"

namespace py = pybind11;
using namespace sleephrv;

namespace {

RrSeries rr_from_intervals(const std::vector<double>& intervals_ms) {
    RrSeries rr;
    rr.intervals_ms = intervals_ms;
    double cumulative = 0.0;
    for (double v : intervals_ms) {
        rr.onsets_s.push_back(cumulative / 1000.0);
        cumulative += v;
    }
    return rr;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "sleep-aware HRV glucose prediction core";

    py::register_exception<Error>(m, "SleephrvError");

    py::enum_<Stage>(m, "Stage")
        .value("DS", Stage::ds)
        .value("REM", Stage::rem)
        .value("RS", Stage::rs);

    py::class_<RrSeries>(m, "RrSeries")
        .def(py::init(&rr_from_intervals), py::arg("intervals_ms"))
        .def_readwrite("intervals_ms", &RrSeries::intervals_ms)
        .def_readwrite("onsets_s", &RrSeries::onsets_s)
        .def_readwrite("stages", &RrSeries::stages)
        .def_readwrite("out_of_range", &RrSeries::out_of_range)
        .def("__len__", &RrSeries::size);

    py::class_<EcgRecord>(m, "EcgRecord")
        .def(py::init([](std::vector<double> samples, double fs) {
                 return EcgRecord{std::move(samples), fs};
             }),
             py::arg("samples_mv"), py::arg("fs_hz"))
        .def_readwrite("samples_mv", &EcgRecord::samples_mv)
        .def_readwrite("fs_hz", &EcgRecord::fs_hz)
        .def("duration_s", &EcgRecord::duration_s);

    py::class_<features::HrvMetrics>(m, "HrvMetrics")
        .def_readonly("mean_rr", &features::HrvMetrics::mean_rr)
        .def_readonly("rmssd", &features::HrvMetrics::rmssd)
        .def_readonly("sdnn", &features::HrvMetrics::sdnn)
        .def_readonly("pnn50", &features::HrvMetrics::pnn50)
        .def_readonly("rr_range", &features::HrvMetrics::rr_range);

    m.def(
        "hrv_metrics",
        [](const std::vector<double>& intervals) {
            return features::hrv_metrics(rr_from_intervals(intervals));
        },
        py::arg("intervals_ms"), "Time-domain HRV metrics of an RR series (ms).");

    m.def(
        "age_normalize",
        [](double raw, double age, double reference_age, double epsilon) {
            return features::age_normalize(raw, age, {reference_age, epsilon});
        },
        py::arg("raw"), py::arg("age"), py::arg("reference_age") = 65.0, py::arg("epsilon") = 0.1,
        "raw / (age/reference_age + epsilon)");
    m.def("log_glucose", &features::log_glucose, py::arg("glucose_mmol_l"));
    m.def("back_transform", &features::back_transform, py::arg("y_log"));

    m.def(
        "detect_r_peaks",
        [](const std::vector<double>& samples, double fs) {
            return ecg::detect_r_peaks(EcgRecord{samples, fs}).indices;
        },
        py::arg("samples_mv"), py::arg("fs_hz"),
        "Adaptive-threshold R-peak detection; returns sample indices.");
    m.def(
        "peaks_to_rr",
        [](const std::vector<std::size_t>& indices, double fs) {
            const auto rr = ecg::peaks_to_rr(PeakList{indices}, fs);
            return py::make_tuple(rr.intervals_ms, rr.onsets_s);
        },
        py::arg("peak_indices"), py::arg("fs_hz"), "Returns (intervals_ms, onsets_s).");
    m.def(
        "remove_artifacts",
        [](const std::vector<double>& intervals, int window) {
            return ecg::remove_artifacts(rr_from_intervals(intervals), window).intervals_ms;
        },
        py::arg("intervals_ms"), py::arg("window") = ecg::kDefaultArtifactWindow,
        "One-pass 3-SD local-window artifact filter; returns the kept intervals.");
    m.def(
        "validate_amplitude",
        [](const std::vector<double>& samples, double fs) {
            const auto report = ecg::validate_amplitude(EcgRecord{samples, fs});
            return py::make_tuple(report.max_abs_mv, report.pass);
        },
        py::arg("samples_mv"), py::arg("fs_hz") = 250.0, "Returns (max_abs_mv, pass).");

    py::class_<stats::CorrelationResult>(m, "CorrelationResult")
        .def_readonly("feature", &stats::CorrelationResult::feature)
        .def_readonly("r", &stats::CorrelationResult::r)
        .def_readonly("p", &stats::CorrelationResult::p)
        .def_readonly("n", &stats::CorrelationResult::n);

    m.def(
        "pearson",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            const auto c = stats::pearson(x, y);
            return py::make_tuple(c.r, c.p, c.n);
        },
        py::arg("x"), py::arg("y"), "Returns (r, two_sided_p, n_pairs).");
    m.def(
        "paired_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const auto t = stats::paired_t_test(a, b);
            return py::make_tuple(t.t, t.p);
        },
        py::arg("a"), py::arg("b"), "Returns (t, two_sided_p).");
    m.def("student_t_cdf", &stats::student_t_cdf, py::arg("t"), py::arg("df"));

    py::class_<model::RidgeHyperparams>(m, "RidgeHyperparams")
        .def(py::init<>())
        .def_readwrite("alpha_1", &model::RidgeHyperparams::alpha_1)
        .def_readwrite("alpha_2", &model::RidgeHyperparams::alpha_2)
        .def_readwrite("lambda_1", &model::RidgeHyperparams::lambda_1)
        .def_readwrite("lambda_2", &model::RidgeHyperparams::lambda_2)
        .def_readwrite("max_iter", &model::RidgeHyperparams::max_iter)
        .def_readwrite("tol", &model::RidgeHyperparams::tol);

    py::class_<model::ModelFit>(m, "ModelFit")
        .def_readonly("feature_names", &model::ModelFit::feature_names)
        .def_readonly("feature_means", &model::ModelFit::feature_means)
        .def_readonly("feature_sds", &model::ModelFit::feature_sds)
        .def_readonly("weights_std", &model::ModelFit::weights_std)
        .def_readonly("y_mean", &model::ModelFit::y_mean)
        .def_readonly("alpha", &model::ModelFit::alpha)
        .def_readonly("lambda_", &model::ModelFit::lambda)
        .def_readonly("n_iter_used", &model::ModelFit::n_iter_used)
        .def_property_readonly("weights", &model::ModelFit::weights)
        .def_property_readonly("intercept", &model::ModelFit::intercept);

    m.def(
        "fit",
        [](const std::vector<std::string>& names,
           const std::vector<std::vector<double>>& columns, const std::vector<double>& y,
           const model::RidgeHyperparams& h) { return model::fit(names, columns, y, h); },
        py::arg("names"), py::arg("columns"), py::arg("y"),
        py::arg("hyperparams") = model::RidgeHyperparams{},
        "Bayesian ridge fit via evidence maximization (columns are feature-major).");
    m.def("predict", &model::predict, py::arg("fit"), py::arg("names"), py::arg("columns"));
    m.def(
        "regression_metrics",
        [](const std::vector<double>& y_true, const std::vector<double>& y_pred) {
            const auto metrics = model::metrics(y_true, y_pred);
            return py::make_tuple(metrics.r2, metrics.mae, metrics.pearson_r, metrics.pearson_p);
        },
        py::arg("y_true"), py::arg("y_pred"), "Returns (r2, mae, pearson_r, pearson_p).");
    m.def(
        "tolerance_analysis",
        [](const std::vector<double>& y_true_log, const std::vector<double>& y_pred_log,
           const std::vector<double>& bands) {
            return model::tolerance_analysis(y_true_log, y_pred_log, bands);
        },
        py::arg("y_true_log"), py::arg("y_pred_log"),
        py::arg("bands_mmol") = model::kDefaultToleranceBands);

    m.def(
        "stratified_kfold",
        [](const std::vector<double>& target, int k, std::uint32_t seed) {
            return experiment::stratified_kfold(target, k, seed).assignments;
        },
        py::arg("target"), py::arg("k") = 5, py::arg("seed") = 42,
        "Deterministic stratified fold assignment per subject.");

    py::class_<FeatureMatrix>(m, "FeatureMatrix")
        .def(py::init([](std::vector<std::string> subject_ids, std::vector<std::string> names,
                         std::vector<std::vector<double>> columns, std::vector<double> target) {
                 FeatureMatrix fm;
                 fm.subject_ids = std::move(subject_ids);
                 fm.names = std::move(names);
                 fm.columns = std::move(columns);
                 fm.target = std::move(target);
                 return fm;
             }),
             py::arg("subject_ids"), py::arg("names"), py::arg("columns"), py::arg("target"))
        .def_readonly("subject_ids", &FeatureMatrix::subject_ids)
        .def_readonly("names", &FeatureMatrix::names)
        .def_readonly("columns", &FeatureMatrix::columns)
        .def_readonly("target", &FeatureMatrix::target);

    m.def(
        "select_features",
        [](const FeatureMatrix& fm, double p_threshold, std::size_t k) {
            const auto report = stats::select_features(fm, p_threshold, k);
            py::list ranked;
            for (const auto& c : report.ranked) {
                ranked.append(py::make_tuple(c.feature, c.r, c.p, c.n));
            }
            return py::make_tuple(report.selected, ranked);
        },
        py::arg("matrix"), py::arg("p_threshold") = 0.2, py::arg("k") = 15,
        "Returns (selected_names, ranked [(feature, r, p, n), ...]).");

    m.def(
        "run_cv",
        [](const FeatureMatrix& fm, int k, std::uint32_t seed, const std::string& mode) {
            const auto plan = experiment::stratified_kfold(fm.target, k, seed);
            experiment::CvOptions opts;
            const auto parsed = experiment::parse_selection_mode(mode);
            if (!parsed) throw Error("invalid selection mode '" + mode + "'");
            opts.selection_mode = *parsed;
            const auto cv = experiment::run_cv(fm, plan, opts);
            py::dict out;
            out["mean_r2"] = cv.mean_r2;
            out["sd_r2"] = cv.sd_r2;
            out["mean_mae"] = cv.mean_mae;
            out["sd_mae"] = cv.sd_mae;
            out["cv_percent"] = cv.cv_percent;
            out["pooled_r"] = cv.pooled_r;
            out["pooled_p"] = cv.pooled_p;
            out["tolerance_fractions"] = cv.tolerance_fractions;
            return out;
        },
        py::arg("matrix"), py::arg("k") = 5, py::arg("seed") = 42, py::arg("mode") = "global",
        "Stratified CV summary as a dict.");

    m.def(
        "run_ablation",
        [](const FeatureMatrix& fm, int k, std::uint32_t seed) {
            const auto plan = experiment::stratified_kfold(fm.target, k, seed);
            const auto report = experiment::run_ablation(fm, plan, {});
            py::list entries;
            for (const auto& e : report.entries) {
                py::dict d;
                d["configuration"] = experiment::to_string(e.config);
                d["r2"] = e.cv.mean_r2;
                d["mae"] = e.cv.mean_mae;
                d["n_features"] = e.n_features;
                d["delta_r2"] = e.delta_r2;
                entries.append(d);
            }
            return entries;
        },
        py::arg("matrix"), py::arg("k") = 5, py::arg("seed") = 42,
        "Five-configuration ablation summary.");

    m.def("load_rr_series", [](const std::string& path) { return ingest::load_rr_series(path); },
          py::arg("path"));
    m.def(
        "load_ecg",
        [](const std::string& path, double fs) { return ingest::load_ecg(path, fs); },
        py::arg("path"), py::arg("fs_hz") = 250.0);
}
