#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "sleephrv/pipeline.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    int jobs = 1;
    std::string output_dir;
    std::string selection_mode;
    long long seed = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "path to the JSON run configuration")
        ->required();
    cmd->add_option("--jobs", flags.jobs, "worker threads (outputs are identical for any N)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--output", flags.output_dir, "output directory (overrides config)");
    cmd->add_option("--seed", flags.seed, "random seed (overrides config)");
    cmd->add_option("--selection-mode", flags.selection_mode,
                    "feature selection mode: global or per-fold (overrides config)");
}

sleephrv::RunConfig resolve(const CommonFlags& flags) {
    sleephrv::RunConfig config = sleephrv::load_run_config(flags.config_path);
    if (!flags.output_dir.empty()) config.output_dir = flags.output_dir;
    if (flags.seed >= 0) config.seed = static_cast<std::uint32_t>(flags.seed);
    if (!flags.selection_mode.empty()) {
        const auto mode = sleephrv::experiment::parse_selection_mode(flags.selection_mode);
        if (!mode) throw sleephrv::Error("invalid --selection-mode (use global or per-fold)");
        config.selection_mode = *mode;
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sleep-aware HRV glucose prediction pipeline"};
    app.require_subcommand(1);

    CommonFlags extract_flags;
    auto* extract = app.add_subcommand(
        "extract-features", "ingest signals and write the feature matrix + QC report");
    add_common(extract, extract_flags);

    CommonFlags run_flags;
    auto* run = app.add_subcommand(
        "run", "full pipeline: extraction, selection, cross-validation, ablation, reports");
    add_common(run, run_flags);

    CommonFlags ablate_flags;
    std::string configs_csv;
    auto* ablate = app.add_subcommand("ablate", "ablation study only");
    add_common(ablate, ablate_flags);
    ablate->add_option("--configs", configs_csv,
                       "comma-separated subset of Full,NoAgeNorm,NoSleepHrv,EcgOnly,ClinicalOnly");

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) {
            sleephrv::pipeline::cmd_extract_features(resolve(extract_flags), extract_flags.jobs);
        } else if (run->parsed()) {
            const auto result = sleephrv::pipeline::cmd_run(resolve(run_flags), run_flags.jobs);
            std::cout << result.summary;
        } else if (ablate->parsed()) {
            std::vector<sleephrv::experiment::AblationConfig> subset;
            std::size_t start = 0;
            while (!configs_csv.empty() && start <= configs_csv.size()) {
                const std::size_t comma = configs_csv.find(',', start);
                const std::string token =
                    configs_csv.substr(start, comma == std::string::npos ? comma : comma - start);
                if (!token.empty()) {
                    const auto c = sleephrv::experiment::parse_ablation_config(token);
                    if (!c) throw sleephrv::Error("unknown ablation config '" + token + "'");
                    subset.push_back(*c);
                }
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            const auto report =
                sleephrv::pipeline::cmd_ablate(resolve(ablate_flags), ablate_flags.jobs, subset);
            for (const auto& entry : report.entries) {
                std::cout << sleephrv::experiment::to_string(entry.config)
                          << " r2=" << entry.cv.mean_r2 << " mae=" << entry.cv.mean_mae
                          << " features=" << entry.n_features << " delta=" << entry.delta_r2
                          << '\n';
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
