#pragma once

// Test-only reference implementations, kept independent of the library's
// computation paths: direct-definition HRV recomputation, Student-t CDF by
// adaptive Simpson quadrature of the density, textbook two-pass Pearson r,
// and a Gauss-Jordan closed-form ridge solver (no Eigen).

#include <cstddef>
#include <vector>

namespace oracle {

struct Hrv {
    double mean_rr;
    double rmssd;
    double sdnn;
    double pnn50;
    double rr_range;
};

Hrv hrv_direct(const std::vector<double>& intervals_ms);

double student_t_cdf_quadrature(double t, double df);
double student_t_two_sided_p_quadrature(double t, double df);

double pearson_r_two_pass(const std::vector<double>& x, const std::vector<double>& y);

// Solves (X_c^T X_c + kappa I) w = X_c^T y_c on centered data by
// Gauss-Jordan elimination; returns weights plus intercept = mean(y) - mean(x).w.
struct RidgeSolution {
    std::vector<double> weights;
    double intercept;
};

RidgeSolution ridge_closed_form(const std::vector<std::vector<double>>& columns,
                                const std::vector<double>& y, double kappa);

// One-pass 3-sigma artifact filter recomputed directly from its definition:
// centered window of `window` neighbors (self excluded, clipped), sample SD.
std::vector<bool> artifact_keep_mask(const std::vector<double>& intervals, int window);

}  // namespace oracle
