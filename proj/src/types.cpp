#include "sleephrv/types.hpp"

#include <algorithm>

namespace sleephrv {

std::string to_string(Stage s) {
    switch (s) {
        case Stage::ds: return "ds";
        case Stage::rem: return "rem";
        case Stage::rs: return "rs";
    }
    throw Error("unknown stage value");
}

std::string stage_token(Stage s) {
    switch (s) {
        case Stage::ds: return "DS";
        case Stage::rem: return "REM";
        case Stage::rs: return "RS";
    }
    throw Error("unknown stage value");
}

std::optional<Stage> parse_stage(std::string_view token) {
    std::string t(token);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
    if (t == "DS") return Stage::ds;
    if (t == "REM") return Stage::rem;
    if (t == "RS") return Stage::rs;
    return std::nullopt;
}

void StageAnnotation::validate() const {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto& iv = intervals[i];
        if (!(iv.start_s < iv.end_s)) {
            throw Error("stage annotation interval with start >= end");
        }
        if (i > 0 && intervals[i - 1].end_s > iv.start_s) {
            throw Error("stage annotation intervals overlap or are unsorted");
        }
    }
}

std::size_t FeatureMatrix::column_index(std::string_view name) const {
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (names[j] == name) return j;
    }
    throw Error("no such feature column: " + std::string(name));
}

const std::vector<double>& FeatureMatrix::column(std::string_view name) const {
    return columns[column_index(name)];
}

}  // namespace sleephrv
