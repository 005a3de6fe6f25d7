#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ifslab/errors.hpp"

namespace ifslab {

inline double mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

inline double variance(std::span<const double> xs) {
    // population variance
    double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

inline double skewness(std::span<const double> xs) {
    double m = mean(xs);
    double s2 = 0.0, s3 = 0.0;
    for (double x : xs) {
        double d = x - m;
        s2 += d * d;
        s3 += d * d * d;
    }
    double n = static_cast<double>(xs.size());
    s2 /= n;
    s3 /= n;
    return s2 > 0.0 ? s3 / std::pow(s2, 1.5) : 0.0;
}

inline double excess_kurtosis(std::span<const double> xs) {
    double m = mean(xs);
    double s2 = 0.0, s4 = 0.0;
    for (double x : xs) {
        double d = x - m;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    double n = static_cast<double>(xs.size());
    s2 /= n;
    s4 /= n;
    return s2 > 0.0 ? s4 / (s2 * s2) - 3.0 : 0.0;
}

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

// Empirical quantile (linear interpolation between order statistics).
inline double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw FitDegenerateError("quantile of empty sample");
    std::sort(xs.begin(), xs.end());
    double pos = q * (static_cast<double>(xs.size()) - 1.0);
    std::size_t i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= xs.size()) return xs.back();
    double w = pos - static_cast<double>(i);
    return xs[i] * (1.0 - w) + xs[i + 1] * w;
}

// One-sample Kolmogorov statistic sup_x |F_n(x) - F(x)| against a reference CDF.
inline double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
    if (xs.empty()) throw FitDegenerateError("ks_one_sample on empty sample");
    std::sort(xs.begin(), xs.end());
    double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    }
    return d;
}

// Two-sample Kolmogorov statistic sup_x |F_n(x) - G_m(x)|.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw FitDegenerateError("ks_two_sample on empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw FitDegenerateError("fit_line needs at least two points");
    double mx = mean(xs), my = mean(ys);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw FitDegenerateError("fit_line: abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

}  // namespace ifslab
