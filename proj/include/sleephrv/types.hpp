#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sleephrv {

// Library-wide error type; every precondition / contract violation throws this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// Sleep stages as consumed from annotations (classification itself is upstream).
enum class Stage : int { ds = 0, rem = 1, rs = 2 };

inline constexpr std::array<Stage, 3> kAllStages{Stage::ds, Stage::rem, Stage::rs};

// Per-interval label value meaning "no stage assigned".
inline constexpr int kNoStageLabel = -1;

std::string to_string(Stage s);
std::string stage_token(Stage s);                     // DS | REM | RS
std::optional<Stage> parse_stage(std::string_view token);

// Uniformly sampled single-lead voltage series.
struct EcgRecord {
    std::vector<double> samples_mv;
    double fs_hz = 0.0;

    std::size_t size() const { return samples_mv.size(); }
    double duration_s() const {
        return fs_hz > 0.0 ? static_cast<double>(samples_mv.size()) / fs_hz : 0.0;
    }
};

// Detected R-peak sample indices, strictly increasing.
struct PeakList {
    std::vector<std::size_t> indices;

    std::size_t size() const { return indices.size(); }
};

// Beat-to-beat substrate for HRV. All vectors are either empty or sized
// like intervals_ms; stages holds Stage values cast to int, or
// kNoStageLabel. out_of_range marks intervals flagged at load time
// (kept, not dropped -- cleaning happens in ecg::remove_artifacts).
struct RrSeries {
    std::vector<double> intervals_ms;
    std::vector<double> onsets_s;
    std::vector<int> stages;
    std::vector<std::uint8_t> out_of_range;

    std::size_t size() const { return intervals_ms.size(); }
    bool has_stage_labels() const { return !stages.empty(); }
};

// One subject's demographics and clinical measurements. clinical is
// aligned with Cohort::clinical_names; missing entries are NaN.
struct SubjectRecord {
    std::string id;
    double age_years = 0.0;
    double glucose_mmol_l = 0.0;
    std::vector<double> clinical;
    std::string signal_ref;     // optional path to this subject's RR/ECG file
};

struct Cohort {
    std::vector<std::string> clinical_names;
    std::vector<SubjectRecord> subjects;

    std::size_t size() const { return subjects.size(); }
};

// Sleep-stage annotation: non-overlapping [start, end) intervals sorted by start.
struct StageAnnotation {
    struct Interval {
        double start_s = 0.0;
        double end_s = 0.0;
        Stage stage = Stage::ds;
    };
    std::vector<Interval> intervals;

    bool empty() const { return intervals.empty(); }
    void validate() const;      // throws Error on overlap / disorder / start >= end
};

// Named feature columns x subjects plus log-glucose target.
// columns[j][i] is feature j of subject i; NaN marks a missing value.
struct FeatureMatrix {
    std::vector<std::string> subject_ids;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<double> target;
    std::vector<std::string> warnings;

    std::size_t n_rows() const { return subject_ids.size(); }
    std::size_t n_cols() const { return names.size(); }
    std::size_t column_index(std::string_view name) const;   // throws if absent
    const std::vector<double>& column(std::string_view name) const;
};

}  // namespace sleephrv
