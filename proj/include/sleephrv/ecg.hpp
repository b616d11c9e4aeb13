#pragma once

#include "sleephrv/types.hpp"

namespace sleephrv::ecg {

inline constexpr double kAmplitudeLimitMv = 5.0;
inline constexpr int kDefaultArtifactWindow = 51;

struct AmplitudeReport {
    double max_abs_mv = 0.0;
    bool pass = false;
};

// Scaling validation against the physiological amplitude range (+-5 mV).
AmplitudeReport validate_amplitude(const EcgRecord& ecg);

// Adaptive-threshold R-peak detection (Pan-Tompkins lineage):
// band-pass 5-15 Hz, five-point derivative, squaring, 150 ms moving-window
// integration, dual signal/noise thresholds, 200 ms refractory, search-back
// at 1.66x the running RR average. Peak indices are refined back onto the
// raw signal. Requires fs >= 100 Hz and at least 2 s of signal.
PeakList detect_r_peaks(const EcgRecord& ecg);

// intervals[i] = (indices[i+1]-indices[i])/fs*1000, onsets[i] = indices[i]/fs.
RrSeries peaks_to_rr(const PeakList& peaks, double fs_hz);

// One-pass statistical artifact removal: interval i is kept iff
// |rr_i - mean(W_i)| <= 3*sd(W_i), where W_i is the centered window of
// `window` neighbors around i (self excluded, clipped at the edges).
// Zero-variance windows retain all members. Order is preserved.
RrSeries remove_artifacts(const RrSeries& rr, int window = kDefaultArtifactWindow);

// Per-stage split of an RR series. An interval belongs to stage s iff its
// onset lies inside an s-labeled annotation interval; intervals outside all
// annotations are discarded. With an empty annotation, per-interval stage
// labels on the series are used directly.
struct StageSplit {
    RrSeries ds;
    RrSeries rem;
    RrSeries rs;

    const RrSeries& at(Stage s) const;
    RrSeries& at(Stage s);
};

StageSplit segment_by_stage(const RrSeries& rr, const StageAnnotation& ann);

}  // namespace sleephrv::ecg
