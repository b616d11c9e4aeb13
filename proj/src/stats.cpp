#include "sleephrv/stats.hpp"

#include <algorithm>
#include <cmath>

namespace sleephrv::stats {

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw Error("incomplete beta continued fraction did not converge");
}

struct PairStats {
    double r;
    std::size_t n;
};

// One-pass co-moment accumulation (Welford) over non-missing pairs.
PairStats pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("pearson: length mismatch");
    double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (is_missing(x[i]) || is_missing(y[i])) continue;
        ++n;
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        mx += dx / static_cast<double>(n);
        my += dy / static_cast<double>(n);
        sxx += dx * (x[i] - mx);
        syy += dy * (y[i] - my);
        sxy += dx * (y[i] - my);
    }
    if (n < 3) throw Error("pearson needs at least 3 complete pairs");
    if (sxx <= 0.0 || syy <= 0.0) throw Error("zero variance in pearson input");
    const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    return {r, n};
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw Error("incomplete_beta requires a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) throw Error("degrees of freedom must be positive");
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double student_t_cdf(double t, double df) {
    const double tail = 0.5 * student_t_two_sided_p(t, df);
    return t >= 0.0 ? 1.0 - tail : tail;
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
    const auto [r, n] = pearson_r(x, y);
    CorrelationResult result;
    result.r = r;
    result.n = n;
    const double df = static_cast<double>(n - 2);
    const double one_minus_r2 = (1.0 - r) * (1.0 + r);
    if (one_minus_r2 <= 0.0) {
        result.p = 0.0;   // |r| = 1, t diverges
    } else {
        const double t = r * std::sqrt(df / one_minus_r2);
        result.p = student_t_two_sided_p(t, df);
    }
    return result;
}

SelectionReport select_features(const FeatureMatrix& m, double p_threshold, std::size_t k) {
    if (m.n_cols() == 0) throw Error("feature matrix has no columns");
    SelectionReport report;
    report.p_threshold = p_threshold;
    report.k = k;

    for (std::size_t j = 0; j < m.n_cols(); ++j) {
        try {
            CorrelationResult c = pearson(m.columns[j], m.target);
            c.feature = m.names[j];
            report.ranked.push_back(std::move(c));
        } catch (const Error& e) {
            report.warnings.push_back("skipped column " + m.names[j] + ": " + e.what());
        }
    }

    std::sort(report.ranked.begin(), report.ranked.end(),
              [](const CorrelationResult& a, const CorrelationResult& b) {
                  const double aa = std::abs(a.r), bb = std::abs(b.r);
                  if (aa != bb) return aa > bb;
                  return a.feature < b.feature;   // deterministic tie-break
              });

    for (const auto& c : report.ranked) {
        if (report.selected.size() >= k) break;
        if (c.p < p_threshold) report.selected.push_back(c.feature);
    }
    if (report.selected.empty()) {
        report.warnings.push_back("no feature passed the p < " + std::to_string(p_threshold) +
                                  " threshold; selection is empty");
    }
    return report;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("paired_t_test: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) throw Error("paired_t_test needs at least 2 pairs");

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += (a[i] - b[i]);
    mean /= static_cast<double>(n);
    double ssq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dev = (a[i] - b[i]) - mean;
        ssq += dev * dev;
    }
    const double sd = std::sqrt(ssq / static_cast<double>(n - 1));
    if (sd == 0.0) throw Error("zero-variance differences");

    TTestResult result;
    result.n = n;
    result.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    result.p = student_t_two_sided_p(result.t, static_cast<double>(n - 1));
    return result;
}

}  // namespace sleephrv::stats
