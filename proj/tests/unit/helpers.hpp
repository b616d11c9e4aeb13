#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sleephrv/types.hpp"

namespace testutil {

// Scratch directory under the build tree, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("sleephrv_test_" + tag + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string dir() const { return path_.string(); }
    std::string subdir(const std::string& name) const {
        const auto p = path_ / name;
        std::filesystem::create_directories(p);
        return p.string();
    }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Gaussian-mixture QRS-like template: dominant R spike at template_center
// with Q/S dips, zero outside. Duration 120 ms.
inline std::vector<double> qrs_template(double fs) {
    const int len = static_cast<int>(std::lround(0.120 * fs));
    const double center = 0.060;
    std::vector<double> t(static_cast<std::size_t>(len), 0.0);
    for (int i = 0; i < len; ++i) {
        const double x = static_cast<double>(i) / fs;
        const double r = 1.2 * std::exp(-std::pow(x - center, 2) / (2.0 * 0.010 * 0.010));
        const double q = -0.25 * std::exp(-std::pow(x - center + 0.025, 2) / (2.0 * 0.008 * 0.008));
        const double s = -0.30 * std::exp(-std::pow(x - center - 0.030, 2) / (2.0 * 0.010 * 0.010));
        t[static_cast<std::size_t>(i)] = r + q + s;
    }
    return t;
}

// Tiles the template every `period` samples over `n_beats` beats, with
// `lead_in` zero samples in front.
inline sleephrv::EcgRecord template_train(double fs, std::size_t period, std::size_t n_beats,
                                          std::size_t lead_in = 0) {
    const auto tmpl = qrs_template(fs);
    sleephrv::EcgRecord ecg;
    ecg.fs_hz = fs;
    ecg.samples_mv.assign(lead_in + period * n_beats + tmpl.size(), 0.0);
    for (std::size_t b = 0; b < n_beats; ++b) {
        const std::size_t start = lead_in + b * period;
        for (std::size_t i = 0; i < tmpl.size(); ++i) {
            ecg.samples_mv[start + i] += tmpl[i];
        }
    }
    return ecg;
}

// Sample index of the template's R maximum.
inline std::size_t template_r_offset(double fs) {
    const auto tmpl = qrs_template(fs);
    std::size_t best = 0;
    for (std::size_t i = 1; i < tmpl.size(); ++i) {
        if (tmpl[i] > tmpl[best]) best = i;
    }
    return best;
}

}  // namespace testutil
