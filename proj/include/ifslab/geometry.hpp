#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ifslab/errors.hpp"

namespace ifslab {

// A point or vector in R^d. Plain storage; invariants (finite coordinates,
// matching dimension) are enforced by validate_system and the JSON loader.
using Vec = std::vector<double>;

enum class Metric { euclidean, sup, manhattan };

inline std::string metric_name(Metric m) {
    switch (m) {
        case Metric::euclidean: return "euclidean";
        case Metric::sup: return "sup";
        case Metric::manhattan: return "manhattan";
    }
    return "?";
}

inline Metric metric_from_name(const std::string& s) {
    if (s == "euclidean") return Metric::euclidean;
    if (s == "sup") return Metric::sup;
    if (s == "manhattan") return Metric::manhattan;
    throw ConfigError("unknown metric: " + s);
}

inline double distance(const Vec& a, const Vec& b, Metric m) {
    double acc = 0.0;
    switch (m) {
        case Metric::euclidean:
            for (std::size_t i = 0; i < a.size(); ++i) {
                double d = a[i] - b[i];
                acc += d * d;
            }
            return std::sqrt(acc);
        case Metric::sup:
            for (std::size_t i = 0; i < a.size(); ++i) acc = std::max(acc, std::fabs(a[i] - b[i]));
            return acc;
        case Metric::manhattan:
            for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
            return acc;
    }
    return acc;
}

// Dual norm of a linear functional x -> slope . x with respect to the metric:
// |slope . (x - y)| <= dual_norm(slope) * d(x, y). Gives analytic Lipschitz
// constants for affine expressions.
inline double dual_norm(const Vec& slope, Metric m) {
    double acc = 0.0;
    switch (m) {
        case Metric::euclidean:
            for (double s : slope) acc += s * s;
            return std::sqrt(acc);
        case Metric::sup:  // d = max |dx_i|  =>  dual is l1
            for (double s : slope) acc += std::fabs(s);
            return acc;
        case Metric::manhattan:  // d = sum |dx_i|  =>  dual is sup
            for (double s : slope) acc = std::max(acc, std::fabs(s));
            return acc;
    }
    return acc;
}

// Axis-aligned box; the estimation domain for every sup-type quantity.
struct Box {
    Vec lo;
    Vec hi;

    std::size_t dim() const { return lo.size(); }

    bool contains(const Vec& x) const {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }

    bool degenerate(double min_side = 1e-6) const {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (hi[i] - lo[i] < min_side) return true;
        return lo.empty();
    }

    Vec corner(std::size_t mask) const {
        Vec c(lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i) c[i] = (mask >> i) & 1 ? hi[i] : lo[i];
        return c;
    }

    std::size_t corner_count() const { return std::size_t{1} << dim(); }
};

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace ifslab
