#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ifslab/errors.hpp"
#include "ifslab/functions.hpp"
#include "ifslab/geometry.hpp"

namespace ifslab {

// Parameters of the weighted Lipschitz norms. The admissible range for the
// spectral-decomposition arguments is 0 < alpha < beta < 1/2.
struct NormParams {
    double alpha = 0.2;
    double beta = 0.4;
    Vec base_point;

    void validate() const {
        if (!(alpha > 0.0 && alpha < beta && beta < 0.5))
            throw ConfigError("norm parameters must satisfy 0 < alpha < beta < 1/2");
    }
};

// Weighted sup norm: max over the sample of |f(x)| / (1 + d(x, x0)^beta).
// Sample maxima are lower bounds on the sup; all consumers use the shared
// probe protocol so values are comparable across modules.
inline double n_beta(const FunctionHandle& f, const NormParams& params, std::span<const Vec> points,
                     Metric metric) {
    if (points.empty()) throw ConfigError("n_beta needs a nonempty sample");
    double best = 0.0;
    for (const auto& x : points) {
        double v = f(x);
        if (!std::isfinite(v)) throw NonFiniteError("function evaluated to a non-finite value");
        double w = std::fabs(v) / (1.0 + std::pow(distance(x, params.base_point, metric), params.beta));
        best = std::max(best, w);
    }
    return best;
}

// Weighted Hoelder seminorm: max over pairs of
// |f(x) - f(y)| / (d(x, y)^alpha (1 + d(x, x0)^beta)), both orientations.
inline double m_alpha_beta(const FunctionHandle& f, const NormParams& params,
                           std::span<const std::pair<Vec, Vec>> pairs, Metric metric) {
    double best = 0.0;
    for (const auto& [x, y] : pairs) {
        double fx = f(x), fy = f(y);
        if (!std::isfinite(fx) || !std::isfinite(fy))
            throw NonFiniteError("function evaluated to a non-finite value");
        double num = std::fabs(fx - fy);
        double dxy = std::pow(distance(x, y, metric), params.alpha);
        double wx = 1.0 + std::pow(distance(x, params.base_point, metric), params.beta);
        double wy = 1.0 + std::pow(distance(y, params.base_point, metric), params.beta);
        best = std::max(best, std::max(num / (dxy * wx), num / (dxy * wy)));
    }
    return best;
}

inline double weighted_norm(const FunctionHandle& f, const NormParams& params, std::span<const Vec> points,
                            std::span<const std::pair<Vec, Vec>> pairs, Metric metric) {
    return n_beta(f, params, points, metric) + m_alpha_beta(f, params, pairs, metric);
}

// Bounded-Lipschitz norm (alpha = 1, beta = 0): sup |f| + max difference quotient.
inline double lipschitz_norm(const FunctionHandle& f, std::span<const Vec> points,
                             std::span<const std::pair<Vec, Vec>> pairs, Metric metric) {
    double sup = 0.0;
    for (const auto& x : points) {
        double v = f(x);
        if (!std::isfinite(v)) throw NonFiniteError("function evaluated to a non-finite value");
        sup = std::max(sup, std::fabs(v));
    }
    double lip = 0.0;
    for (const auto& [x, y] : pairs) lip = std::max(lip, std::fabs(f(x) - f(y)) / distance(x, y, metric));
    return sup + lip;
}

}  // namespace ifslab
