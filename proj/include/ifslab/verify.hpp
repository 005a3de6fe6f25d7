#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "ifslab/errors.hpp"
#include "ifslab/sampling.hpp"
#include "ifslab/system.hpp"

namespace ifslab {

// Numerical estimates of the average-contraction ratio and the moment /
// regularity constants of the studied system. All sups are box-restricted
// maxima over the shared probe protocol, so every value is a lower bound on
// the corresponding sup; reports carry the sample size used.

struct ContractionReport {
    double rho_hat = 0.0;
    Vec witness_x, witness_y, witness_z;  // argmax triple
    std::size_t pairs_tested = 0;
    double min_separation = 1e-6;
    bool passed = false;  // rho_hat < 1
    std::size_t sample_size = 0;
    bool box_restricted = true;  // caveat: sups estimated over the domain box only
};

struct ConditionsReport {
    double h0_sup = 0.0;  // sup of the average distance-ratio (same supremand as rho)
    double h1_sup = 0.0;  // sup of the averaged moment quotient
    double h2_sup = 0.0;  // sup of the weighted-image sum against field Lipschitz bounds
    bool h4_sufficient = false;  // all probabilities strictly positive on the box
    double min_probability = 0.0;
    std::size_t sample_size = 0;
    bool box_restricted = true;
};

// The averaged contraction supremand  sum_i d(T_i y, T_i z) p_i(x) / d(y, z).
inline double contraction_supremand(const IfsSystem& system, const Vec& x, const Vec& y, const Vec& z) {
    Vec p = evaluate_probabilities(system, x);
    double dyz = distance(y, z, system.metric);
    double acc = 0.0;
    for (std::size_t i = 0; i < system.maps.size(); ++i)
        acc += distance(system.maps[i].apply(y), system.maps[i].apply(z), system.metric) * p[i];
    return acc / dyz;
}

namespace detail {

inline std::vector<Vec> field_table(const IfsSystem& system, const std::vector<Vec>& points) {
    std::vector<Vec> table;
    table.reserve(points.size());
    for (const auto& x : points) table.push_back(evaluate_probabilities(system, x));
    return table;
}

// max over tabulated x of sum_i ratio_i p_i(x); returns (value, argmax index)
inline std::pair<double, std::size_t> max_weighted(const std::vector<Vec>& table, const Vec& ratios) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t t = 0; t < table.size(); ++t) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ratios.size(); ++i) acc += ratios[i] * table[t][i];
        if (acc > best) {
            best = acc;
            arg = t;
        }
    }
    return {best, arg};
}

inline std::optional<double> analytic_box_infimum(const ProbExpr& e, const Box& box) {
    if (const auto* c = std::get_if<ProbExpr::Constant>(&e.node)) return c->value;
    if (const auto* a = std::get_if<ProbExpr::ClippedAffine>(&e.node)) {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < box.corner_count(); ++m) {
            Vec corner = box.corner(m);
            double v = a->intercept;
            for (std::size_t i = 0; i < a->slope.size(); ++i) v += a->slope[i] * corner[i];
            worst = std::min(worst, v);
        }
        return std::min(std::max(worst, a->lo), a->hi);
    }
    return std::nullopt;  // softmax: strictly positive, but no closed-form box infimum
}

}  // namespace detail

inline ContractionReport estimate_contraction_ratio(const IfsSystem& system, std::size_t samples,
                                                    std::uint64_t seed) {
    if (samples < 1) throw ConfigError("estimate_contraction_ratio needs samples >= 1");
    ProbeSet probes = make_probe_set(system.domain_box, samples, seed);
    if (probes.pairs.empty())
        throw DegenerateBoxError("domain box admits no point pair at the minimum separation");

    std::vector<Vec> table = detail::field_table(system, probes.points);

    ContractionReport rep;
    rep.min_separation = probes.min_separation;
    rep.sample_size = probes.points.size();
    rep.pairs_tested = probes.pairs.size();
    rep.rho_hat = -std::numeric_limits<double>::infinity();
    Vec ratios(system.maps.size());
    for (const auto& [y, z] : probes.pairs) {
        double dyz = distance(y, z, system.metric);
        for (std::size_t i = 0; i < system.maps.size(); ++i)
            ratios[i] = distance(system.maps[i].apply(y), system.maps[i].apply(z), system.metric) / dyz;
        auto [value, arg] = detail::max_weighted(table, ratios);
        if (value > rep.rho_hat) {
            rep.rho_hat = value;
            rep.witness_x = probes.points[arg];
            rep.witness_y = y;
            rep.witness_z = z;
        }
    }
    rep.passed = rep.rho_hat < 1.0;
    return rep;
}

inline ConditionsReport check_moment_conditions(const IfsSystem& system, std::size_t samples,
                                                std::uint64_t seed) {
    if (samples < 1) throw ConfigError("check_moment_conditions needs samples >= 1");
    ProbeSet probes = make_probe_set(system.domain_box, samples, seed);
    if (probes.pairs.empty())
        throw DegenerateBoxError("domain box admits no point pair at the minimum separation");

    std::vector<Vec> table = detail::field_table(system, probes.points);
    const Vec& x0 = system.base_point;
    std::size_t k = system.maps.size();

    ConditionsReport rep;
    rep.sample_size = probes.points.size();

    // same supremand as the contraction estimate, over the same sample
    rep.h0_sup = estimate_contraction_ratio(system, samples, seed).rho_hat;

    // averaged moment quotient: for each y, sum_i d(T_i y, x0) p_i(x) / (1 + d(y, x0))
    Vec ratios(k);
    for (const auto& y : probes.points) {
        double denom = 1.0 + distance(y, x0, system.metric);
        for (std::size_t i = 0; i < k; ++i) ratios[i] = distance(system.maps[i].apply(y), x0, system.metric) / denom;
        rep.h1_sup = std::max(rep.h1_sup, detail::max_weighted(table, ratios).first);
    }

    // weighted-image sum against the analytic field Lipschitz bounds
    for (const auto& x : probes.points) {
        double denom = 1.0 + distance(x, x0, system.metric);
        double acc = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            acc += distance(system.maps[i].apply(x), x0, system.metric) / denom * system.field.lipschitz_bounds[i];
        rep.h2_sup = std::max(rep.h2_sup, acc);
    }

    // strict positivity: analytic box infima where the expression language
    // provides them, sampled infima otherwise
    rep.min_probability = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
        auto analytic = detail::analytic_box_infimum(system.field.exprs[i], system.domain_box);
        double inf_i;
        if (analytic && system.field.normalization == ProbabilityField::Normalization::exact &&
            !system.field.all_softmax()) {
            inf_i = *analytic;
        } else {
            inf_i = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < table.size(); ++t) inf_i = std::min(inf_i, table[t][i]);
        }
        rep.min_probability = std::min(rep.min_probability, inf_i);
    }
    rep.h4_sufficient = rep.min_probability > 0.0;
    return rep;
}

}  // namespace ifslab
