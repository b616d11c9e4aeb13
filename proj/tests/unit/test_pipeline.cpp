#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "helpers.hpp"
#include "sleephrv/pipeline.hpp"
#include "sleephrv/rng.hpp"

using namespace sleephrv;
using testutil::TempDir;
using testutil::write_file;

namespace {

// Two-subject toy dataset: labeled RR files plus a clinical table.
void write_toy_dataset(const TempDir& tmp) {
    write_file(tmp.file("clinical.csv"),
               "subject_id,age,glucose_mmol_L,dbp,psqi\n"
               "A,55,5.5,80,7\n"
               "B,63,6.2,84,9\n");
    const auto rr_dir = tmp.subdir("rr");
    DeterministicRng rng(99);
    for (const char* id : {"A", "B"}) {
        std::string content;
        const char* stages[3] = {"RS", "DS", "REM"};
        for (int block = 0; block < 3; ++block) {
            for (int i = 0; i < 40; ++i) {
                const double interval = 880.0 + 40.0 * block + rng.uniform(-25.0, 25.0);
                char line[64];
                std::snprintf(line, sizeof(line), "%.1f %s\n", interval, stages[block]);
                content += line;
            }
        }
        content += "3000.0 DS\n";   // one artifact to exercise cleaning
        write_file(rr_dir + "/" + id + ".rr", content);
    }
}

RunConfig toy_config(const TempDir& tmp) {
    RunConfig config;
    config.clinical_path = tmp.file("clinical.csv");
    config.rr_dir = tmp.dir() + "/rr";
    config.output_dir = tmp.dir() + "/out";
    config.artifact_window = 21;
    return config;
}

}  // namespace

TEST_CASE("extract_features on the toy dataset") {
    TempDir tmp("extract");
    write_toy_dataset(tmp);
    const auto result = pipeline::cmd_extract_features(toy_config(tmp), 1);

    REQUIRE(result.matrix.n_rows() == 2);
    CHECK(result.qc.size() == 2);
    CHECK(result.qc[0].subject_id == "A");
    CHECK(result.qc[0].n_intervals == 121);
    CHECK(result.qc[0].n_artifacts_removed >= 1);
    CHECK(result.qc[0].n_ds > 0);
    CHECK(result.qc[0].n_rem > 0);
    CHECK(result.qc[0].n_rs > 0);

    CHECK(std::filesystem::exists(tmp.dir() + "/out/feature_matrix.csv"));
    CHECK(std::filesystem::exists(tmp.dir() + "/out/qc_report.csv"));
    CHECK_NOTHROW(result.matrix.column_index("hrv_ds_mean_rr_age_normalized"));
    CHECK_NOTHROW(result.matrix.column_index("psqi_age"));
}

TEST_CASE("extract_features: missing RR file names the subject") {
    TempDir tmp("missing_rr");
    write_toy_dataset(tmp);
    std::filesystem::remove(tmp.dir() + "/rr/B.rr");
    CHECK_THROWS_WITH_AS(pipeline::cmd_extract_features(toy_config(tmp), 1),
                         doctest::Contains("subject 'B'"), Error);
}

TEST_CASE("extract_features: outputs identical for any job count") {
    TempDir tmp("jobs");
    write_toy_dataset(tmp);

    auto config = toy_config(tmp);
    config.output_dir = tmp.dir() + "/out1";
    pipeline::cmd_extract_features(config, 1);
    config.output_dir = tmp.dir() + "/out4";
    pipeline::cmd_extract_features(config, 4);

    // the provenance line embeds the output dir; compare data rows only
    auto body = [](const std::string& text) { return text.substr(text.find('\n') + 1); };
    CHECK(body(testutil::read_file(tmp.dir() + "/out1/feature_matrix.csv")) ==
          body(testutil::read_file(tmp.dir() + "/out4/feature_matrix.csv")));
    CHECK(body(testutil::read_file(tmp.dir() + "/out1/qc_report.csv")) ==
          body(testutil::read_file(tmp.dir() + "/out4/qc_report.csv")));
}

TEST_CASE("extract_features: rerun is byte-identical") {
    TempDir tmp("rerun");
    write_toy_dataset(tmp);
    const auto config = toy_config(tmp);
    pipeline::cmd_extract_features(config, 1);
    const auto first = testutil::read_file(tmp.dir() + "/out/feature_matrix.csv");
    pipeline::cmd_extract_features(config, 1);
    const auto second = testutil::read_file(tmp.dir() + "/out/feature_matrix.csv");
    CHECK(first == second);
}

TEST_CASE("feature matrix file round-trip preserves values and missing cells") {
    FeatureMatrix m;
    m.subject_ids = {"A", "B", "C"};
    m.names = {"hrv_ds_mean_rr", "dbp"};
    m.columns = {{912.3456789012345, kNaN, 880.0}, {80.0, 77.5, kNaN}};
    m.target = {1.7047480922384253, 1.824549292051046, 1.6094379124341003};

    TempDir tmp("matrix_io");
    const auto path = tmp.file("matrix.csv");
    pipeline::write_feature_matrix(m, path, "test provenance");
    const auto loaded = pipeline::load_feature_matrix(path);

    CHECK(loaded.subject_ids == m.subject_ids);
    CHECK(loaded.names == m.names);
    CHECK(loaded.target == m.target);
    for (std::size_t j = 0; j < m.columns.size(); ++j) {
        for (std::size_t i = 0; i < m.columns[j].size(); ++i) {
            const double a = m.columns[j][i];
            const double b = loaded.columns[j][i];
            CHECK(((is_missing(a) && is_missing(b)) || a == b));
        }
    }
}

TEST_CASE("run config: parsing, overrides, and validation") {
    TempDir tmp("config");
    write_toy_dataset(tmp);

    SUBCASE("valid config with nested sections") {
        write_file(tmp.file("run.json"),
                   "{\n"
                   "  \"data\": {\"clinical\": \"clinical.csv\", \"rr_dir\": \"rr\"},\n"
                   "  \"signal\": {\"artifact_window\": 31},\n"
                   "  \"cv\": {\"k_folds\": 3, \"seed\": 7, \"selection_mode\": \"per-fold\"},\n"
                   "  \"output_dir\": \"out\"\n"
                   "}\n");
        const auto config = load_run_config(tmp.file("run.json"));
        CHECK(config.artifact_window == 31);
        CHECK(config.k_folds == 3);
        CHECK(config.seed == 7);
        CHECK(config.selection_mode == experiment::SelectionMode::per_fold);
        // relative paths resolve against the config's directory
        CHECK(std::filesystem::exists(config.clinical_path));
    }
    SUBCASE("unknown keys are rejected") {
        write_file(tmp.file("typo.json"),
                   "{\"data\": {\"clinical\": \"clinical.csv\", \"rr_dir\": \"rr\"},"
                   " \"sigal\": {}}");
        CHECK_THROWS_WITH_AS(load_run_config(tmp.file("typo.json")),
                             doctest::Contains("unknown config key"), Error);
    }
    SUBCASE("nonexistent data path is rejected") {
        write_file(tmp.file("bad.json"),
                   "{\"data\": {\"clinical\": \"nope.csv\", \"rr_dir\": \"rr\"}}");
        CHECK_THROWS_AS(load_run_config(tmp.file("bad.json")), Error);
    }
    SUBCASE("config echo is canonical json") {
        const auto config = toy_config(tmp);
        const auto echo = config_to_json(config);
        CHECK(echo.find("\"seed\":42") != std::string::npos);
        CHECK(config_to_json(config) == echo);
    }
}

TEST_CASE("ecg-sourced subject flows through extraction") {
    TempDir tmp("ecg_subject");
    write_file(tmp.file("clinical.csv"),
               "subject_id,age,glucose_mmol_L,dbp,rr_file\n"
               "A,55,5.5,80,A.ecg\n"
               "B,60,6.0,82,B.ecg\n");

    // 40 s template trains at slightly different rates, unlabeled stages:
    // segmentation falls back to annotations, so provide .stages files
    const auto stage_dir = tmp.subdir("stages");
    for (const char* id : {"A", "B"}) {
        const std::size_t period = std::string(id) == "A" ? 230 : 260;
        const auto record = testutil::template_train(250.0, period, 40);
        std::string content;
        for (double v : record.samples_mv) {
            char line[32];
            std::snprintf(line, sizeof(line), "%.6f\n", v);
            content += line;
        }
        write_file(tmp.file(std::string(id) + ".ecg"), content);
        write_file(stage_dir + "/" + id + ".stages", "0 15 DS\n15 30 REM\n30 45 RS\n");
    }

    RunConfig config;
    config.clinical_path = tmp.file("clinical.csv");
    config.stage_dir = stage_dir;
    config.sampling_rate_hz = 250.0;
    config.artifact_window = 11;
    config.output_dir = tmp.dir() + "/out";

    const auto result = pipeline::cmd_extract_features(config, 1);
    REQUIRE(result.qc.size() == 2);
    CHECK(result.qc[0].source == "ecg");
    CHECK(result.qc[0].amplitude_pass == 1);
    CHECK(result.qc[0].n_peaks > 30);
    CHECK(result.qc[0].n_ds > 0);
    CHECK(!is_missing(result.matrix.column("hrv_ds_mean_rr")[0]));
}

TEST_CASE("ecg-sourced subject with amplitude violation aborts with the subject id") {
    TempDir tmp("ecg_amp");
    write_file(tmp.file("clinical.csv"),
               "subject_id,age,glucose_mmol_L,rr_file\n"
               "A,55,5.5,A.ecg\n"
               "B,60,6.0,B.ecg\n");
    std::string ok, bad;
    for (int i = 0; i < 1000; ++i) {
        ok += "0.5\n";
        bad += (i == 500 ? "7.5\n" : "0.5\n");
    }
    write_file(tmp.file("A.ecg"), ok);
    write_file(tmp.file("B.ecg"), bad);

    RunConfig config;
    config.clinical_path = tmp.file("clinical.csv");
    config.output_dir = tmp.dir() + "/out";

    CHECK_THROWS_WITH_AS(pipeline::cmd_extract_features(config, 1),
                         doctest::Contains("subject 'B'"), Error);
}
