#pragma once

#include <string>

#include "sleephrv/types.hpp"

namespace sleephrv::ingest {

// Accepted RR interval range in ms; values outside are kept but flagged.
inline constexpr double kRrRangeLowMs = 200.0;
inline constexpr double kRrRangeHighMs = 4000.0;

// Loads a delimiter-separated clinical table (header row; delimiter sniffed
// from {tab, comma, semicolon}). Mandatory columns: subject_id, age,
// glucose_mmol_L. Every other numeric column is carried through under its
// header name; an optional rr_file column becomes SubjectRecord::signal_ref.
Cohort load_clinical_table(const std::string& path);

// Writes a cohort back in the same format (comma-separated, %.17g), such
// that reloading yields a field-for-field identical cohort.
void save_clinical_table(const Cohort& cohort, const std::string& path);

// One RR interval (ms) per line, optional second column with a stage token
// (DS|REM|RS). Onsets are reconstructed as cumulative sums starting at 0 s.
RrSeries load_rr_series(const std::string& path);

// One voltage sample (mV) per line; fs attached as stated, no resampling.
EcgRecord load_ecg(const std::string& path, double fs_hz);

// Stage annotation file: "start_s end_s STAGE" per line (whitespace or
// delimiter separated). Validated on load.
StageAnnotation load_stage_annotation(const std::string& path);

}  // namespace sleephrv::ingest
