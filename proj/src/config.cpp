#include "sleephrv/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace sleephrv {

namespace {

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw Error("unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
        }
    }
}

std::string resolve_path(const fs::path& base, const std::string& value) {
    if (value.empty()) return value;
    fs::path p(value);
    if (p.is_absolute()) return p.lexically_normal().string();
    return (base / p).lexically_normal().string();
}

void require_exists(const std::string& path, const std::string& what) {
    if (!path.empty() && !fs::exists(path)) {
        throw Error(what + " does not exist: " + path);
    }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("config parse error in " + path + ": " + e.what());
    }

    RunConfig config;
    const fs::path base = fs::path(path).parent_path();

    check_keys(doc, "", {"data", "signal", "features", "selection", "model", "cv",
                         "tolerance_bands_mmol", "output_dir"});

    if (doc.contains("data")) {
        const auto& d = doc["data"];
        check_keys(d, "data", {"clinical", "rr_dir", "ecg_dir", "stage_dir", "feature_matrix",
                               "sampling_rate_hz"});
        if (d.contains("clinical")) config.clinical_path = resolve_path(base, d["clinical"]);
        if (d.contains("rr_dir")) config.rr_dir = resolve_path(base, d["rr_dir"]);
        if (d.contains("ecg_dir")) config.ecg_dir = resolve_path(base, d["ecg_dir"]);
        if (d.contains("stage_dir")) config.stage_dir = resolve_path(base, d["stage_dir"]);
        if (d.contains("feature_matrix")) {
            config.feature_matrix = resolve_path(base, d["feature_matrix"]);
        }
        if (d.contains("sampling_rate_hz")) config.sampling_rate_hz = d["sampling_rate_hz"];
    }
    if (doc.contains("signal")) {
        const auto& s = doc["signal"];
        check_keys(s, "signal", {"artifact_window"});
        if (s.contains("artifact_window")) config.artifact_window = s["artifact_window"];
    }
    if (doc.contains("features")) {
        const auto& f = doc["features"];
        check_keys(f, "features", {"reference_age", "epsilon", "age_normalize", "psqi_age"});
        if (f.contains("reference_age")) config.age_norm.reference_age = f["reference_age"];
        if (f.contains("epsilon")) config.age_norm.epsilon = f["epsilon"];
        if (f.contains("age_normalize")) config.feature_options.age_normalize = f["age_normalize"];
        if (f.contains("psqi_age")) config.feature_options.psqi_age = f["psqi_age"];
    }
    if (doc.contains("selection")) {
        const auto& s = doc["selection"];
        check_keys(s, "selection", {"p_threshold", "top_k"});
        if (s.contains("p_threshold")) config.p_threshold = s["p_threshold"];
        if (s.contains("top_k")) config.top_k = s["top_k"];
    }
    if (doc.contains("model")) {
        const auto& m = doc["model"];
        check_keys(m, "model",
                   {"alpha_1", "alpha_2", "lambda_1", "lambda_2", "max_iter", "tol"});
        if (m.contains("alpha_1")) config.ridge.alpha_1 = m["alpha_1"];
        if (m.contains("alpha_2")) config.ridge.alpha_2 = m["alpha_2"];
        if (m.contains("lambda_1")) config.ridge.lambda_1 = m["lambda_1"];
        if (m.contains("lambda_2")) config.ridge.lambda_2 = m["lambda_2"];
        if (m.contains("max_iter")) config.ridge.max_iter = m["max_iter"];
        if (m.contains("tol")) config.ridge.tol = m["tol"];
    }
    if (doc.contains("cv")) {
        const auto& c = doc["cv"];
        check_keys(c, "cv", {"k_folds", "seed", "selection_mode"});
        if (c.contains("k_folds")) config.k_folds = c["k_folds"];
        if (c.contains("seed")) config.seed = c["seed"];
        if (c.contains("selection_mode")) {
            const auto mode = experiment::parse_selection_mode(c["selection_mode"].get<std::string>());
            if (!mode) throw Error("invalid selection_mode (use global or per-fold)");
            config.selection_mode = *mode;
        }
    }
    if (doc.contains("tolerance_bands_mmol")) {
        config.tolerance_bands = doc["tolerance_bands_mmol"].get<std::vector<double>>();
    }
    if (doc.contains("output_dir")) {
        config.output_dir = resolve_path(base, doc["output_dir"]);
    }

    if (config.clinical_path.empty() && config.feature_matrix.empty()) {
        throw Error("config needs data.clinical or data.feature_matrix");
    }
    require_exists(config.clinical_path, "clinical table");
    require_exists(config.rr_dir, "rr_dir");
    require_exists(config.ecg_dir, "ecg_dir");
    require_exists(config.stage_dir, "stage_dir");
    require_exists(config.feature_matrix, "feature matrix");
    if (config.sampling_rate_hz <= 0.0) throw Error("sampling_rate_hz must be positive");
    if (config.k_folds < 2) throw Error("k_folds must be >= 2");
    return config;
}

std::string config_to_json(const RunConfig& config) {
    json doc;   // nlohmann orders keys alphabetically: canonical output
    doc["data"]["clinical"] = config.clinical_path;
    doc["data"]["rr_dir"] = config.rr_dir;
    doc["data"]["ecg_dir"] = config.ecg_dir;
    doc["data"]["stage_dir"] = config.stage_dir;
    doc["data"]["feature_matrix"] = config.feature_matrix;
    doc["data"]["sampling_rate_hz"] = config.sampling_rate_hz;
    doc["signal"]["artifact_window"] = config.artifact_window;
    doc["features"]["reference_age"] = config.age_norm.reference_age;
    doc["features"]["epsilon"] = config.age_norm.epsilon;
    doc["features"]["age_normalize"] = config.feature_options.age_normalize;
    doc["features"]["psqi_age"] = config.feature_options.psqi_age;
    doc["selection"]["p_threshold"] = config.p_threshold;
    doc["selection"]["top_k"] = config.top_k;
    doc["model"]["alpha_1"] = config.ridge.alpha_1;
    doc["model"]["alpha_2"] = config.ridge.alpha_2;
    doc["model"]["lambda_1"] = config.ridge.lambda_1;
    doc["model"]["lambda_2"] = config.ridge.lambda_2;
    doc["model"]["max_iter"] = config.ridge.max_iter;
    doc["model"]["tol"] = config.ridge.tol;
    doc["cv"]["k_folds"] = config.k_folds;
    doc["cv"]["seed"] = config.seed;
    doc["cv"]["selection_mode"] = experiment::to_string(config.selection_mode);
    doc["tolerance_bands_mmol"] = config.tolerance_bands;
    doc["output_dir"] = config.output_dir;
    return doc.dump();
}

}  // namespace sleephrv
