#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "ifslab/errors.hpp"
#include "ifslab/geometry.hpp"
#include "ifslab/linalg.hpp"

namespace ifslab {

// One map of the family: x -> matrix * x + offset.
struct AffineMap {
    std::vector<double> matrix;  // row-major d x d
    Vec offset;
    // Operator norm of `matrix` under the system metric; an upper bound on
    // d(Tx, Ty) / d(x, y), tight for the Euclidean metric. Filled by finalize().
    double cached_lipschitz = 0.0;

    Vec apply(const Vec& x) const {
        Vec y(offset.size());
        apply_into(x, y);
        return y;
    }

    // out must not alias x
    void apply_into(const Vec& x, Vec& out) const {
        std::size_t d = offset.size();
        out.resize(d);
        for (std::size_t i = 0; i < d; ++i) {
            double acc = offset[i];
            for (std::size_t j = 0; j < d; ++j) acc += matrix[i * d + j] * x[j];
            out[i] = acc;
        }
    }
};

// Probability expressions form a closed language so that Lipschitz constants
// and positivity bounds are analytic rather than estimated.
struct ProbExpr {
    struct Constant {
        double value = 0.0;
    };
    struct ClippedAffine {
        Vec slope;
        double intercept = 0.0;
        double lo = 0.0;  // clip range, must sit inside (0, 1)
        double hi = 1.0;
    };
    // Interpreted jointly: if any expression is Softmax, all must be, and the
    // field is softmax(weights_i . x + bias_i).
    struct Softmax {
        Vec weights;
        double bias = 0.0;
    };

    std::variant<Constant, ClippedAffine, Softmax> node;

    bool is_softmax() const { return std::holds_alternative<Softmax>(node); }

    // Raw (pre-normalization) value; softmax components return the exponent
    // argument and are combined by the field.
    double raw_eval(const Vec& x) const {
        if (const auto* c = std::get_if<Constant>(&node)) return c->value;
        if (const auto* a = std::get_if<ClippedAffine>(&node)) {
            double v = a->intercept;
            for (std::size_t i = 0; i < a->slope.size(); ++i) v += a->slope[i] * x[i];
            return std::min(std::max(v, a->lo), a->hi);
        }
        const auto& s = std::get<Softmax>(node);
        double v = s.bias;
        for (std::size_t i = 0; i < s.weights.size(); ++i) v += s.weights[i] * x[i];
        return v;
    }

    // Analytic lower bound on the expression's value over any domain, when one
    // exists (used for the strict-positivity check).
    double analytic_lower_bound() const {
        if (const auto* c = std::get_if<Constant>(&node)) return c->value;
        if (const auto* a = std::get_if<ClippedAffine>(&node)) return a->lo;
        return 0.0;  // softmax is strictly positive but with no uniform bound
    }
};

struct ProbabilityField {
    enum class Normalization { exact, renormalize };

    std::vector<ProbExpr> exprs;
    Normalization normalization = Normalization::exact;
    // Analytic Lipschitz constants per component w.r.t. the system metric;
    // filled by finalize(). In renormalize mode these use an inf-of-sum
    // estimated on the finalize probe lattice.
    std::vector<double> lipschitz_bounds;

    std::size_t size() const { return exprs.size(); }

    bool any_softmax() const {
        for (const auto& e : exprs)
            if (e.is_softmax()) return true;
        return false;
    }
    bool all_softmax() const {
        for (const auto& e : exprs)
            if (!e.is_softmax()) return false;
        return !exprs.empty();
    }
};

// The studied system: map family, probability field, metric, base point and
// the box over which every sup-type quantity is estimated. Immutable after
// finalize(); all operations on it are pure.
struct IfsSystem {
    std::size_t dimension = 0;
    std::vector<AffineMap> maps;
    ProbabilityField field;
    Metric metric = Metric::euclidean;
    Vec base_point;
    Box domain_box;
    std::string name;

    std::size_t map_count() const { return maps.size(); }
};

// Deterministic probe lattice over the box, used by validation and by the
// finalize-time estimates. Roughly `target` points spread per dimension.
inline std::vector<Vec> probe_lattice(const Box& box, std::size_t target = 1000) {
    std::size_t d = box.dim();
    std::size_t per_dim = d == 0 ? 0 : static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(target), 1.0 / static_cast<double>(d))));
    per_dim = std::max<std::size_t>(per_dim, 2);
    std::vector<Vec> pts;
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= per_dim;
    pts.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        Vec x(d);
        std::size_t rem = idx;
        for (std::size_t i = 0; i < d; ++i) {
            std::size_t k = rem % per_dim;
            rem /= per_dim;
            double t = static_cast<double>(k) / static_cast<double>(per_dim - 1);
            x[i] = box.lo[i] + t * (box.hi[i] - box.lo[i]);
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

namespace detail {

inline double softmax_component_lipschitz(const std::vector<ProbExpr>& exprs, std::size_t i, Metric m) {
    // grad p_i = p_i (w_i - sum_j p_j w_j); since the mean is a convex
    // combination, |grad| <= p_i (1 - p_i) max_j |w_i - w_j| <= max_j |w_i - w_j| / 4.
    const auto& wi = std::get<ProbExpr::Softmax>(exprs[i].node).weights;
    double worst = 0.0;
    for (std::size_t j = 0; j < exprs.size(); ++j) {
        if (j == i) continue;
        const auto& wj = std::get<ProbExpr::Softmax>(exprs[j].node).weights;
        Vec diff(wi.size());
        for (std::size_t c = 0; c < wi.size(); ++c) diff[c] = wi[c] - wj[c];
        worst = std::max(worst, dual_norm(diff, m));
    }
    return worst / 4.0;
}

inline double raw_expr_lipschitz(const ProbExpr& e, Metric m) {
    if (std::holds_alternative<ProbExpr::Constant>(e.node)) return 0.0;
    if (const auto* a = std::get_if<ProbExpr::ClippedAffine>(&e.node)) return dual_norm(a->slope, m);
    return 0.0;  // handled jointly for softmax
}

}  // namespace detail

// Computes the cached per-map Lipschitz constants and the field's analytic
// Lipschitz bounds. Call once after construction; loaders do this for you.
inline void finalize(IfsSystem& system) {
    for (auto& map : system.maps)
        map.cached_lipschitz = induced_operator_norm(map.matrix, system.dimension, system.metric);

    auto& field = system.field;
    field.lipschitz_bounds.assign(field.size(), 0.0);
    if (field.all_softmax()) {
        for (std::size_t i = 0; i < field.size(); ++i)
            field.lipschitz_bounds[i] = detail::softmax_component_lipschitz(field.exprs, i, system.metric);
        return;
    }
    std::vector<double> raw(field.size());
    double raw_sum_lip = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        raw[i] = detail::raw_expr_lipschitz(field.exprs[i], system.metric);
        raw_sum_lip += raw[i];
    }
    if (field.normalization == ProbabilityField::Normalization::exact) {
        field.lipschitz_bounds = raw;
    } else {
        // quotient rule: Lip(raw_i / s) <= (Lip(raw_i) + sum_j Lip(raw_j)) / inf s,
        // with inf s estimated on the probe lattice
        double s_min = std::numeric_limits<double>::infinity();
        for (const auto& x : probe_lattice(system.domain_box)) {
            double s = 0.0;
            for (const auto& e : field.exprs) s += e.raw_eval(x);
            s_min = std::min(s_min, s);
        }
        if (!(s_min > 0.0)) s_min = std::numeric_limits<double>::min();
        for (std::size_t i = 0; i < field.size(); ++i)
            field.lipschitz_bounds[i] = (raw[i] + raw_sum_lip) / s_min;
    }
}

// Evaluates the probability field at x into a simplex vector. Softmax fields
// are combined jointly (numerically stable); other fields are renormalized by
// their sum, which is a no-op up to rounding in exact mode.
inline void evaluate_probabilities_into(const IfsSystem& system, const Vec& x, Vec& p) {
    const auto& field = system.field;
    std::size_t k = field.size();
    p.resize(k);
    if (field.all_softmax()) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < k; ++i) {
            p[i] = field.exprs[i].raw_eval(x);
            if (!std::isfinite(p[i])) throw NonFiniteError("softmax exponent is not finite");
            m = std::max(m, p[i]);
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            p[i] = std::exp(p[i] - m);
            sum += p[i];
        }
        for (std::size_t i = 0; i < k; ++i) p[i] /= sum;
        return;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        p[i] = field.exprs[i].raw_eval(x);
        if (!std::isfinite(p[i])) throw NonFiniteError("probability expression is not finite");
        sum += p[i];
    }
    if (sum <= 0.0) throw DegenerateFieldError("all probability expressions are zero");
    for (std::size_t i = 0; i < k; ++i) p[i] /= sum;
}

inline Vec evaluate_probabilities(const IfsSystem& system, const Vec& x) {
    Vec p;
    evaluate_probabilities_into(system, x, p);
    return p;
}

inline Vec apply_map(const IfsSystem& system, std::size_t i, const Vec& x) {
    if (i >= system.maps.size()) throw IndexOutOfRangeError("map index out of range");
    return system.maps[i].apply(x);
}

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    bool ok() const { return violations.empty(); }
};

// Structural validation. Errors are the report's content; nothing throws.
inline ValidationReport validate_system(const IfsSystem& system) {
    ValidationReport rep;
    auto violation = [&rep](const std::string& s) { rep.violations.push_back(s); };

    std::size_t d = system.dimension;
    if (d < 1) violation("dimension must be >= 1");
    if (system.maps.empty()) violation("no maps");
    if (system.maps.size() != system.field.size())
        violation("length mismatch: " + std::to_string(system.maps.size()) + " maps vs " +
                  std::to_string(system.field.size()) + " probability expressions");
    for (std::size_t i = 0; i < system.maps.size(); ++i) {
        if (system.maps[i].matrix.size() != d * d || system.maps[i].offset.size() != d)
            violation("map " + std::to_string(i) + " has wrong dimensions");
        else if (!all_finite(system.maps[i].matrix) || !all_finite(system.maps[i].offset))
            violation("map " + std::to_string(i) + " has non-finite entries");
    }
    if (system.base_point.size() != d) violation("base point has wrong dimension");
    if (system.domain_box.lo.size() != d || system.domain_box.hi.size() != d) {
        violation("domain box has wrong dimension");
        return rep;  // probes below would be meaningless
    }
    for (std::size_t i = 0; i < d; ++i)
        if (!(system.domain_box.lo[i] <= system.domain_box.hi[i]))
            violation("domain box is empty in coordinate " + std::to_string(i));
    if (system.base_point.size() == d && !system.domain_box.contains(system.base_point))
        violation("base point lies outside the domain box");

    if (system.field.any_softmax() && !system.field.all_softmax())
        violation("softmax components must cover the whole field");
    for (std::size_t i = 0; i < system.field.size(); ++i) {
        const auto& e = system.field.exprs[i];
        if (const auto* c = std::get_if<ProbExpr::Constant>(&e.node)) {
            if (!(c->value >= 0.0 && c->value <= 1.0))
                violation("constant probability " + std::to_string(i) + " outside [0,1]");
        } else if (const auto* a = std::get_if<ProbExpr::ClippedAffine>(&e.node)) {
            if (a->slope.size() != d) violation("probability " + std::to_string(i) + " has wrong slope dimension");
            if (!(a->lo < a->hi) || !(a->lo > 0.0) || !(a->hi < 1.0))
                violation("clip range of probability " + std::to_string(i) + " must sit inside (0,1)");
        }
    }

    if (!rep.violations.empty()) return rep;

    // probe-grid checks: simplex property and bounded image of the box
    bool exact = system.field.normalization == ProbabilityField::Normalization::exact &&
                 !system.field.all_softmax();
    double worst_sum_dev = 0.0;
    bool degenerate_somewhere = false;
    for (const auto& x : probe_lattice(system.domain_box)) {
        double sum = 0.0;
        bool bad = false;
        for (const auto& e : system.field.exprs) {
            double v = e.raw_eval(x);
            if (e.is_softmax()) continue;
            if (!std::isfinite(v)) {
                violation("probability expression not finite on the box");
                return rep;
            }
            if (v < 0.0 || v > 1.0) bad = true;
            sum += v;
        }
        if (bad) {
            violation("a probability expression leaves [0,1] on the box");
            return rep;
        }
        if (!system.field.all_softmax()) {
            if (sum <= 0.0) degenerate_somewhere = true;
            if (exact) worst_sum_dev = std::max(worst_sum_dev, std::fabs(sum - 1.0));
        }
    }
    if (exact && worst_sum_dev > 1e-9)
        violation("field does not sum to 1 (exact mode, max deviation " + std::to_string(worst_sum_dev) + ")");
    if (degenerate_somewhere)
        violation("field sums to zero somewhere on the box");

    // boundedness of each map's image: corners plus the Lipschitz bound
    for (std::size_t i = 0; i < system.maps.size(); ++i) {
        const auto& map = system.maps[i];
        double worst = 0.0;
        for (std::size_t c = 0; c < system.domain_box.corner_count(); ++c) {
            Vec img = map.apply(system.domain_box.corner(c));
            if (!all_finite(img)) {
                violation("map " + std::to_string(i) + " sends a box corner to a non-finite point");
                break;
            }
            worst = std::max(worst, distance(img, system.base_point, system.metric));
        }
        if (!std::isfinite(map.cached_lipschitz))
            violation("map " + std::to_string(i) + " has a non-finite Lipschitz bound");
        (void)worst;  // finite corners + finite Lipschitz bound => bounded image
    }

    rep.warnings.push_back("sup-type conditions are estimated over the domain box only");
    return rep;
}

}  // namespace ifslab
