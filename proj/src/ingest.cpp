#include "sleephrv/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "dsv.hpp"

namespace sleephrv::ingest {

namespace {

// Tokens split on any of space/tab/comma/semicolon, empties dropped.
std::vector<std::string> tokenize(std::string_view line) {
    std::vector<std::string> out;
    std::string current;
    for (char c : line) {
        if (c == ' ' || c == '\t' || c == ',' || c == ';' || c == '\r') {
            if (!current.empty()) {
                out.push_back(current);
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

bool is_comment_or_blank(const std::string& line) {
    const std::string s = dsv::strip(line);
    return s.empty() || s[0] == '#';
}

}  // namespace

Cohort load_clinical_table(const std::string& path) {
    const auto lines = dsv::read_lines(path);
    if (lines.empty()) throw Error("clinical table is empty: " + path);

    const char delim = dsv::sniff_delimiter(lines[0]);
    std::vector<std::string> header;
    for (const auto& cell : dsv::split(lines[0], delim)) header.push_back(dsv::strip(cell));

    auto find_col = [&](std::string_view name) -> std::size_t {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (header[j] == name) return j;
        }
        throw Error("missing mandatory column '" + std::string(name) + "' in " + path);
    };
    const std::size_t id_col = find_col("subject_id");
    const std::size_t age_col = find_col("age");
    const std::size_t glucose_col = find_col("glucose_mmol_L");

    // optional signal reference column
    std::size_t ref_col = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "rr_file") ref_col = j;
    }

    Cohort cohort;
    std::vector<std::size_t> clinical_cols;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j == id_col || j == age_col || j == glucose_col || j == ref_col) continue;
        if (header[j].empty()) throw Error("empty column name in header of " + path);
        cohort.clinical_names.push_back(header[j]);
        clinical_cols.push_back(j);
    }

    std::set<std::string> seen_ids;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (is_comment_or_blank(lines[i])) continue;
        const auto cells = dsv::split(lines[i], delim);
        if (cells.size() != header.size()) {
            throw Error("row " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) +
                        " fields, header has " + std::to_string(header.size()) + " in " + path);
        }
        SubjectRecord subject;
        subject.id = dsv::strip(cells[id_col]);
        if (subject.id.empty()) throw Error("empty subject_id at row " + std::to_string(i + 1));
        if (!seen_ids.insert(subject.id).second) {
            throw Error("duplicate subject_id '" + subject.id + "' in " + path);
        }

        const auto age = dsv::parse_double(cells[age_col]);
        if (!age) throw Error("non-numeric age for subject '" + subject.id + "'");
        if (*age <= 0.0) throw Error("non-physiological age for subject '" + subject.id + "'");
        subject.age_years = *age;

        const auto glucose = dsv::parse_double(cells[glucose_col]);
        if (!glucose) throw Error("non-numeric glucose_mmol_L for subject '" + subject.id + "'");
        if (*glucose <= 0.0) {
            throw Error("non-physiological glucose for subject '" + subject.id + "'");
        }
        subject.glucose_mmol_l = *glucose;

        if (ref_col < header.size()) subject.signal_ref = dsv::strip(cells[ref_col]);

        for (std::size_t c = 0; c < clinical_cols.size(); ++c) {
            const std::string cell = dsv::strip(cells[clinical_cols[c]]);
            if (cell.empty()) {
                subject.clinical.push_back(kNaN);
                continue;
            }
            const auto value = dsv::parse_double(cell);
            if (!value) {
                throw Error("non-numeric value '" + cell + "' in column '" +
                            cohort.clinical_names[c] + "' for subject '" + subject.id + "'");
            }
            subject.clinical.push_back(*value);
        }
        cohort.subjects.push_back(std::move(subject));
    }

    if (cohort.subjects.size() < 2) {
        throw Error("cohort needs at least 2 subjects, got " +
                    std::to_string(cohort.subjects.size()) + " in " + path);
    }
    return cohort;
}

void save_clinical_table(const Cohort& cohort, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);

    const bool any_ref = std::any_of(cohort.subjects.begin(), cohort.subjects.end(),
                                     [](const SubjectRecord& s) { return !s.signal_ref.empty(); });

    out << "subject_id,age,glucose_mmol_L";
    for (const auto& name : cohort.clinical_names) out << ',' << name;
    if (any_ref) out << ",rr_file";
    out << '\n';

    for (const auto& s : cohort.subjects) {
        out << s.id << ',' << dsv::format_full(s.age_years) << ','
            << dsv::format_full(s.glucose_mmol_l);
        for (double v : s.clinical) {
            out << ',';
            if (!is_missing(v)) out << dsv::format_full(v);
        }
        if (any_ref) out << ',' << s.signal_ref;
        out << '\n';
    }
}

RrSeries load_rr_series(const std::string& path) {
    const auto lines = dsv::read_lines(path);

    RrSeries rr;
    bool any_label = false;
    std::vector<int> labels;
    double cumulative_ms = 0.0;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_comment_or_blank(lines[i])) continue;
        const auto tokens = tokenize(lines[i]);
        const auto interval = dsv::parse_double(tokens[0]);
        if (!interval) {
            throw Error("unparsable RR interval at line " + std::to_string(i + 1) + " of " + path);
        }
        if (*interval <= 0.0) {
            throw Error("non-positive RR interval at line " + std::to_string(i + 1) + " of " + path);
        }
        rr.onsets_s.push_back(cumulative_ms / 1000.0);
        rr.intervals_ms.push_back(*interval);
        cumulative_ms += *interval;
        rr.out_of_range.push_back(*interval < kRrRangeLowMs || *interval > kRrRangeHighMs ? 1 : 0);

        int label = kNoStageLabel;
        if (tokens.size() >= 2) {
            const auto stage = parse_stage(tokens[1]);
            if (!stage) {
                throw Error("unknown stage token '" + tokens[1] + "' at line " +
                            std::to_string(i + 1) + " of " + path);
            }
            label = static_cast<int>(*stage);
            any_label = true;
        }
        labels.push_back(label);
    }

    if (rr.intervals_ms.empty()) throw Error("RR file has no intervals: " + path);
    if (any_label) rr.stages = std::move(labels);
    return rr;
}

EcgRecord load_ecg(const std::string& path, double fs_hz) {
    if (fs_hz <= 0.0) throw Error("invalid sampling rate: " + std::to_string(fs_hz));
    const auto lines = dsv::read_lines(path);

    EcgRecord record;
    record.fs_hz = fs_hz;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_comment_or_blank(lines[i])) continue;
        const auto sample = dsv::parse_double(lines[i]);
        if (!sample) {
            throw Error("unparsable ECG sample at line " + std::to_string(i + 1) + " of " + path);
        }
        record.samples_mv.push_back(*sample);
    }
    if (record.samples_mv.empty()) throw Error("ECG file has no samples: " + path);
    return record;
}

StageAnnotation load_stage_annotation(const std::string& path) {
    const auto lines = dsv::read_lines(path);

    StageAnnotation ann;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_comment_or_blank(lines[i])) continue;
        const auto tokens = tokenize(lines[i]);
        if (tokens.size() != 3) {
            throw Error("expected 'start end stage' at line " + std::to_string(i + 1) + " of " + path);
        }
        const auto start = dsv::parse_double(tokens[0]);
        const auto end = dsv::parse_double(tokens[1]);
        const auto stage = parse_stage(tokens[2]);
        if (!start || !end || !stage) {
            throw Error("unparsable stage annotation at line " + std::to_string(i + 1) + " of " + path);
        }
        ann.intervals.push_back({*start, *end, *stage});
    }
    ann.validate();
    return ann;
}

}  // namespace sleephrv::ingest
