#include "sleephrv/ecg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace sleephrv::ecg {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kBandLowHz = 5.0;
constexpr double kBandHighHz = 15.0;
constexpr double kMwiSeconds = 0.150;
constexpr double kRefractorySeconds = 0.200;
constexpr double kSearchBackFactor = 1.66;
constexpr std::size_t kRrHistory = 8;
constexpr double kMinFsHz = 100.0;
constexpr double kMinDurationS = 2.0;

struct Biquad {
    double b0, b1, b2, a1, a2;

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(x.size());
        double z1 = 0.0, z2 = 0.0;   // direct form II transposed, zero initial state
        for (std::size_t n = 0; n < x.size(); ++n) {
            const double out = b0 * x[n] + z1;
            z1 = b1 * x[n] - a1 * out + z2;
            z2 = b2 * x[n] - a2 * out;
            y[n] = out;
        }
        return y;
    }
};

Biquad butterworth_lowpass(double fc, double fs) {
    const double w0 = 2.0 * kPi * fc / fs;
    const double c = std::cos(w0);
    const double alpha = std::sin(w0) / std::sqrt(2.0);
    const double a0 = 1.0 + alpha;
    return {(1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0,
            -2.0 * c / a0, (1.0 - alpha) / a0};
}

Biquad butterworth_highpass(double fc, double fs) {
    const double w0 = 2.0 * kPi * fc / fs;
    const double c = std::cos(w0);
    const double alpha = std::sin(w0) / std::sqrt(2.0);
    const double a0 = 1.0 + alpha;
    return {(1.0 + c) / 2.0 / a0, -(1.0 + c) / a0, (1.0 + c) / 2.0 / a0,
            -2.0 * c / a0, (1.0 - alpha) / a0};
}

// Five-point derivative, samples before the record treated as zero.
std::vector<double> five_point_derivative(const std::vector<double>& x) {
    std::vector<double> y(x.size());
    auto at = [&](std::ptrdiff_t i) { return i >= 0 ? x[static_cast<std::size_t>(i)] : 0.0; };
    for (std::size_t n = 0; n < x.size(); ++n) {
        const auto i = static_cast<std::ptrdiff_t>(n);
        y[n] = (2.0 * at(i) + at(i - 1) - at(i - 3) - 2.0 * at(i - 4)) / 8.0;
    }
    return y;
}

std::vector<double> moving_window_integral(const std::vector<double>& x, std::size_t window) {
    std::vector<double> y(x.size());
    double running = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        running += x[n];
        if (n >= window) running -= x[n - window];
        y[n] = running / static_cast<double>(window);
    }
    return y;
}

// First index of the maximum value in [lo, hi] (inclusive, clipped).
std::size_t argmax_range(const std::vector<double>& x, std::ptrdiff_t lo, std::ptrdiff_t hi) {
    lo = std::max<std::ptrdiff_t>(lo, 0);
    hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(x.size()) - 1);
    std::size_t best = static_cast<std::size_t>(lo);
    for (auto i = lo; i <= hi; ++i) {
        if (x[static_cast<std::size_t>(i)] > x[best]) best = static_cast<std::size_t>(i);
    }
    return best;
}

}  // namespace

AmplitudeReport validate_amplitude(const EcgRecord& ecg) {
    if (ecg.samples_mv.empty()) throw Error("empty ECG record");
    double max_abs = 0.0;
    for (double v : ecg.samples_mv) max_abs = std::max(max_abs, std::abs(v));
    return {max_abs, max_abs <= kAmplitudeLimitMv};
}

PeakList detect_r_peaks(const EcgRecord& ecg) {
    if (ecg.fs_hz < kMinFsHz) {
        throw Error("sampling rate too low for QRS filter design (need >= 100 Hz)");
    }
    if (ecg.duration_s() < kMinDurationS) {
        throw Error("ECG record shorter than 2 s");
    }
    const double fs = ecg.fs_hz;
    const auto refractory = static_cast<std::ptrdiff_t>(std::lround(kRefractorySeconds * fs));
    const auto mwi_window = static_cast<std::size_t>(std::lround(kMwiSeconds * fs));
    const auto bp_search = static_cast<std::ptrdiff_t>(std::lround(0.200 * fs));
    const auto raw_search = static_cast<std::ptrdiff_t>(std::lround(0.040 * fs));

    const auto bandpassed =
        butterworth_lowpass(kBandHighHz, fs).apply(butterworth_highpass(kBandLowHz, fs).apply(ecg.samples_mv));
    auto mwi = five_point_derivative(bandpassed);
    for (double& v : mwi) v *= v;
    mwi = moving_window_integral(mwi, mwi_window);

    // Candidate fiducials: strict-left local maxima of the integrated signal.
    std::vector<std::pair<std::size_t, double>> candidates;
    for (std::size_t i = 1; i + 1 < mwi.size(); ++i) {
        if (mwi[i] > mwi[i - 1] && mwi[i] >= mwi[i + 1] && mwi[i] > 0.0) {
            candidates.emplace_back(i, mwi[i]);
        }
    }

    PeakList peaks;
    double spk = 0.0, npk = 0.0;
    bool any_qrs = false;
    double thr1 = 0.0;
    std::ptrdiff_t last_fid = -1;
    std::ptrdiff_t last_r = -1;
    std::deque<double> rr_history;   // in samples, between refined peaks
    std::vector<std::pair<std::size_t, double>> pending;   // sub-threshold since last QRS

    auto refine = [&](std::size_t fid) -> std::size_t {
        const auto f = static_cast<std::ptrdiff_t>(fid);
        const std::size_t bp_idx = argmax_range(bandpassed, f - bp_search, f);
        const auto b = static_cast<std::ptrdiff_t>(bp_idx);
        return argmax_range(ecg.samples_mv, b - raw_search, b + raw_search);
    };

    auto accept = [&](std::size_t fid, double pk, bool from_search_back) -> bool {
        const std::size_t r_idx = refine(fid);
        if (last_r >= 0) {
            const auto gap = static_cast<std::ptrdiff_t>(r_idx) - last_r;
            if (gap < refractory) return false;   // refined positions collide
            rr_history.push_back(static_cast<double>(gap));
            if (rr_history.size() > kRrHistory) rr_history.pop_front();
        }
        if (!any_qrs) {
            spk = pk;   // bootstrap the signal estimate from the first detection
            any_qrs = true;
        } else if (from_search_back) {
            spk = 0.25 * pk + 0.75 * spk;
        } else {
            spk = 0.125 * pk + 0.875 * spk;
        }
        thr1 = npk + 0.25 * (spk - npk);
        last_fid = static_cast<std::ptrdiff_t>(fid);
        last_r = static_cast<std::ptrdiff_t>(r_idx);
        peaks.indices.push_back(r_idx);
        return true;
    };

    for (const auto& [fid, pk] : candidates) {
        const auto f = static_cast<std::ptrdiff_t>(fid);

        // Search-back: a missed stretch longer than 1.66x the running RR
        // average re-examines sub-threshold candidates against thr1/2.
        if (any_qrs && !rr_history.empty() && f - last_fid > kSearchBackFactor *
                (std::accumulate(rr_history.begin(), rr_history.end(), 0.0) /
                 static_cast<double>(rr_history.size()))) {
            const double thr2 = 0.5 * thr1;
            std::size_t best = pending.size();
            for (std::size_t j = 0; j < pending.size(); ++j) {
                const auto pf = static_cast<std::ptrdiff_t>(pending[j].first);
                if (pf - last_fid < refractory || pending[j].second <= thr2) continue;
                if (best == pending.size() || pending[j].second > pending[best].second) best = j;
            }
            if (best < pending.size()) {
                const auto found = pending[best];
                if (accept(found.first, found.second, true)) {
                    std::vector<std::pair<std::size_t, double>> rest;
                    for (const auto& c : pending) {
                        if (c.first > found.first) rest.push_back(c);
                    }
                    pending = std::move(rest);
                }
            }
        }

        if (last_fid >= 0 && f - last_fid < refractory) continue;

        if (pk > thr1) {
            if (accept(fid, pk, false)) {
                pending.clear();
                continue;
            }
        }
        npk = 0.125 * pk + 0.875 * npk;
        thr1 = npk + 0.25 * (spk - npk);
        pending.emplace_back(fid, pk);
    }

    return peaks;
}

RrSeries peaks_to_rr(const PeakList& peaks, double fs_hz) {
    if (fs_hz <= 0.0) throw Error("invalid sampling rate");
    if (peaks.indices.size() < 2) throw Error("need at least 2 peaks to form RR intervals");

    RrSeries rr;
    rr.intervals_ms.reserve(peaks.indices.size() - 1);
    rr.onsets_s.reserve(peaks.indices.size() - 1);
    for (std::size_t i = 0; i + 1 < peaks.indices.size(); ++i) {
        if (peaks.indices[i + 1] <= peaks.indices[i]) {
            throw Error("peak indices not strictly increasing");
        }
        const double gap = static_cast<double>(peaks.indices[i + 1] - peaks.indices[i]);
        rr.intervals_ms.push_back(gap / fs_hz * 1000.0);
        rr.onsets_s.push_back(static_cast<double>(peaks.indices[i]) / fs_hz);
    }
    return rr;
}

RrSeries remove_artifacts(const RrSeries& rr, int window) {
    if (window < 3) throw Error("artifact window must be >= 3");
    const std::size_t n = rr.size();
    if (n < 3) throw Error("artifact removal needs at least 3 intervals");

    const std::size_t half = static_cast<std::size_t>(window) / 2;
    std::vector<bool> keep(n, true);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i > half ? i - half : 0;
        const std::size_t hi = std::min(i + half, n - 1);

        // neighbors exclude the interval under test
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t j = lo; j <= hi; ++j) {
            if (j == i) continue;
            sum += rr.intervals_ms[j];
            ++count;
        }
        if (count < 2) continue;   // too few neighbors to estimate spread
        const double mean = sum / static_cast<double>(count);
        double ssq = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) {
            if (j == i) continue;
            const double d = rr.intervals_ms[j] - mean;
            ssq += d * d;
        }
        const double sd = std::sqrt(ssq / static_cast<double>(count - 1));
        if (sd == 0.0) continue;   // zero-variance window retains all members
        keep[i] = std::abs(rr.intervals_ms[i] - mean) <= 3.0 * sd;
    }

    RrSeries cleaned;
    for (std::size_t i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        cleaned.intervals_ms.push_back(rr.intervals_ms[i]);
        if (!rr.onsets_s.empty()) cleaned.onsets_s.push_back(rr.onsets_s[i]);
        if (!rr.stages.empty()) cleaned.stages.push_back(rr.stages[i]);
        if (!rr.out_of_range.empty()) cleaned.out_of_range.push_back(rr.out_of_range[i]);
    }
    return cleaned;
}

const RrSeries& StageSplit::at(Stage s) const {
    switch (s) {
        case Stage::ds: return ds;
        case Stage::rem: return rem;
        case Stage::rs: return rs;
    }
    throw Error("unknown stage value");
}

RrSeries& StageSplit::at(Stage s) {
    switch (s) {
        case Stage::ds: return ds;
        case Stage::rem: return rem;
        case Stage::rs: return rs;
    }
    throw Error("unknown stage value");
}

StageSplit segment_by_stage(const RrSeries& rr, const StageAnnotation& ann) {
    ann.validate();
    StageSplit split;

    auto push = [](RrSeries& dest, const RrSeries& src, std::size_t i) {
        dest.intervals_ms.push_back(src.intervals_ms[i]);
        if (!src.onsets_s.empty()) dest.onsets_s.push_back(src.onsets_s[i]);
        if (!src.out_of_range.empty()) dest.out_of_range.push_back(src.out_of_range[i]);
    };

    if (ann.empty()) {
        // fallback: use per-interval labels carried by the series
        if (!rr.has_stage_labels()) return split;
        for (std::size_t i = 0; i < rr.size(); ++i) {
            if (rr.stages[i] == kNoStageLabel) continue;
            push(split.at(static_cast<Stage>(rr.stages[i])), rr, i);
        }
        return split;
    }

    if (rr.onsets_s.size() != rr.size()) throw Error("RR series has no onsets");
    std::size_t a = 0;
    for (std::size_t i = 0; i < rr.size(); ++i) {
        const double onset = rr.onsets_s[i];
        while (a < ann.intervals.size() && ann.intervals[a].end_s <= onset) ++a;
        if (a >= ann.intervals.size()) break;
        const auto& iv = ann.intervals[a];
        if (onset >= iv.start_s && onset < iv.end_s) {
            push(split.at(iv.stage), rr, i);
        }
    }
    return split;
}

}  // namespace sleephrv::ecg
