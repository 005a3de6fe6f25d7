#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ifslab/cdf.hpp"
#include "ifslab/errors.hpp"
#include "ifslab/functions.hpp"
#include "ifslab/rng.hpp"
#include "ifslab/stats.hpp"

namespace ifslab {

// ---------------------------------------------------------------------------
// CDF modulus of continuity

struct ModulusReport {
    std::vector<double> deltas;
    std::vector<double> w_values;  // w_F(delta), nondecreasing
    std::vector<std::pair<double, double>> fitted_min_c;  // (gamma, min C with w <= C |log d|^-gamma)
};

namespace detail {

// fixed evaluation lattice for the modulus: shifts are taken from the same
// t-grid for every delta so the reported values are monotone by construction
inline std::vector<Vec> modulus_lattice(const Box& box, double delta_max, std::size_t target = 4096) {
    Box enlarged = box;
    for (std::size_t j = 0; j < box.dim(); ++j) enlarged.lo[j] -= delta_max;
    return probe_lattice(enlarged, target);
}

inline double modulus_value(const CdfSource& cdf, const std::vector<Vec>& lattice, double delta) {
    double w = 0.0;
    for (const auto& t : lattice) {
        Vec shifted = t;
        for (double& c : shifted) c += delta;
        w = std::max(w, cdf.cdf(shifted) - cdf.cdf(t));
    }
    return w;
}

}  // namespace detail

// w_F(delta) = sup_t [F(t + delta 1) - F(t)], the componentwise-shift modulus
// (for d > 1 this dominates every per-coordinate modulus).
inline ModulusReport modulus_of_continuity(const CdfSource& cdf, const Box& box,
                                           std::vector<double> deltas,
                                           std::vector<double> gammas = {2.0}) {
    if (deltas.empty()) throw ConfigError("modulus needs at least one delta");
    for (double d : deltas)
        if (!(d > 0.0 && d < 0.5)) throw ConfigError("modulus deltas must lie in (0, 1/2)");
    std::sort(deltas.begin(), deltas.end());
    ModulusReport rep;
    rep.deltas = deltas;
    std::vector<Vec> lattice = detail::modulus_lattice(box, deltas.back());
    for (double d : deltas) rep.w_values.push_back(detail::modulus_value(cdf, lattice, d));
    for (double g : gammas) {
        double c = 0.0;
        for (std::size_t i = 0; i < deltas.size(); ++i)
            c = std::max(c, rep.w_values[i] * std::pow(std::fabs(std::log(deltas[i])), g));
        rep.fitted_min_c.emplace_back(g, c);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// rectangle-class bracket covers

struct Bracket {
    FunctionHandle lower, upper;
    double eps = 0.0;            // target L^r gap
    double lip_norm_bound = 0.0; // bounded-Lipschitz norm of both envelopes: 1 + d/eta
    Vec window_lo, window_hi;    // thresholds covered by this bracket
};

struct BracketingCover {
    std::vector<Bracket> brackets;
    double eps = 0.0;
    double r = 1.5;
    double a_budget = 0.0;       // envelope-norm budget exp(C eps^{-1/gamma})
    double budget_c = 0.0;       // C actually used (calibrated when requested)
    double gamma = 2.0;
    std::size_t count = 0;
    double eta = 0.0;            // ramp width of the envelopes
    std::size_t validity_sample_size = 0;
    std::size_t validity_violations = 0;
    double max_gap_mass_bound = 0.0;  // exact-F bound on sup over brackets of ||u-l||_r^r
    std::vector<std::vector<double>> thresholds;  // per axis, including box endpoints
};

struct BracketParams {
    double eps = 0.1;
    double r = 1.5;       // L^r gap exponent, in (1, 2)
    double gamma = 2.0;   // budget shape, > 1
    double budget_c = 0.0;  // exponent constant; <= 0 requests calibration
    std::size_t probe_points = 10'000;
    std::uint64_t probe_seed = 20260809;
};

namespace detail {

inline FunctionHandle product_ramp(const Vec& t, double eta) {
    FunctionHandle f = FunctionHandle::ramp(0, t[0], eta);
    for (std::size_t j = 1; j < t.size(); ++j) f = FunctionHandle::product(std::move(f), FunctionHandle::ramp(j, t[j], eta));
    return f;
}

}  // namespace detail

// Constructive cover of the rectangle class by smoothed-indicator brackets:
// thresholds at marginal quantiles with mass spacing eps^r / (2d), ramp
// envelopes of width eta with the smoothing mass controlled through w_F.
// The count realizes the O(eps^{-dr}) scaling; it is an upper bound on the
// minimal bracketing number.
inline BracketingCover build_rectangle_cover(const CdfSource& cdf, const Box& box, BracketParams params) {
    std::size_t d = box.dim();
    if (d < 1 || d > 2) throw ConfigError("rectangle covers support d in {1, 2}");
    if (!(params.r > 1.0 && params.r < 2.0)) throw ConfigError("bracket exponent r must lie in (1, 2)");
    if (!(params.gamma > 1.0)) throw ConfigError("budget shape gamma must exceed 1");
    if (!(params.eps > 0.0)) throw ConfigError("bracket eps must be positive");

    BracketingCover cover;
    cover.eps = params.eps;
    cover.r = params.r;
    cover.gamma = params.gamma;

    if (params.eps >= 1.0) {
        // the whole class fits in the trivial bracket [0, 1]
        Bracket b;
        b.lower = FunctionHandle::constant(0.0);
        b.upper = FunctionHandle::constant(1.0);
        b.eps = params.eps;
        b.lip_norm_bound = 1.0;
        b.window_lo.assign(d, -std::numeric_limits<double>::max());
        b.window_hi.assign(d, std::numeric_limits<double>::max());
        cover.brackets.push_back(std::move(b));
        cover.count = 1;
        cover.budget_c = params.budget_c > 0.0 ? params.budget_c : 1.0;
        cover.a_budget = std::exp(cover.budget_c * std::pow(params.eps, -1.0 / params.gamma));
        cover.eta = 0.0;
        return cover;
    }

    double mass_spacing = std::pow(params.eps, params.r) / (2.0 * static_cast<double>(d));

    // per-axis thresholds at quantiles of the marginal, pinned to the box
    cover.thresholds.assign(d, {});
    for (std::size_t j = 0; j < d; ++j) {
        auto& ts = cover.thresholds[j];
        ts.push_back(box.lo[j]);
        for (double q = mass_spacing; q < 1.0; q += mass_spacing) {
            double t = cdf.marginal_quantile(j, q);
            if (t > ts.back() && t < box.hi[j]) ts.push_back(t);
        }
        ts.push_back(box.hi[j]);
    }

    // largest ramp width with smoothing mass (through w_F) below the spacing
    std::vector<Vec> lattice = detail::modulus_lattice(box, 1.0);
    double eta_hi = 0.0;
    for (std::size_t j = 0; j < d; ++j) eta_hi = std::max(eta_hi, 0.5 * (box.hi[j] - box.lo[j]));
    double lo = 0.0, hi = eta_hi;
    if (detail::modulus_value(cdf, lattice, 2.0 * hi) <= mass_spacing) {
        lo = hi;
    } else {
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            (detail::modulus_value(cdf, lattice, 2.0 * mid) <= mass_spacing ? lo : hi) = mid;
        }
    }
    double eta = lo;
    if (!(eta > 0.0))
        throw BudgetInfeasibleError("binding constraint: smoothing mass (w_F stays above the spacing)");

    // exact-F safety check on the gap mass; shrink eta if the bound overshoots
    auto gap_mass_bound = [&](double e) {
        double worst = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t w = 0; w + 1 < cover.thresholds[j].size(); ++w) {
                double massj = cdf.marginal_cdf(j, cover.thresholds[j][w + 1] + e) -
                               cdf.marginal_cdf(j, cover.thresholds[j][w] - e);
                worst = std::max(worst, massj);
            }
        return worst * static_cast<double>(d);
    };
    double target = std::pow(params.eps, params.r);
    for (int it = 0; it < 60 && gap_mass_bound(eta) > target; ++it) eta *= 0.5;
    cover.max_gap_mass_bound = gap_mass_bound(eta);
    if (cover.max_gap_mass_bound > target)
        throw BudgetInfeasibleError("binding constraint: smoothing mass (atomic reference distribution)");
    cover.eta = eta;

    double a_required = 1.0 + static_cast<double>(d) / eta;
    if (params.budget_c > 0.0) {
        cover.budget_c = params.budget_c;
        cover.a_budget = std::exp(cover.budget_c * std::pow(params.eps, -1.0 / params.gamma));
        if (a_required > cover.a_budget)
            throw BudgetInfeasibleError(
                "binding constraint: lipschitz budget (need A >= " + std::to_string(a_required) +
                ", budget " + std::to_string(cover.a_budget) + ")");
    } else {
        // calibrated budget: twice the required envelope norm, reported as the
        // implied exponent constant
        cover.a_budget = 2.0 * a_required;
        cover.budget_c = std::log(cover.a_budget) * std::pow(params.eps, 1.0 / params.gamma);
    }

    // product-ramp brackets over consecutive threshold windows
    std::vector<std::size_t> window_counts(d);
    std::size_t total = 1;
    for (std::size_t j = 0; j < d; ++j) {
        window_counts[j] = cover.thresholds[j].size() - 1;
        total *= window_counts[j];
    }
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        Vec wlo(d), whi(d);
        for (std::size_t j = 0; j < d; ++j) {
            std::size_t w = rem % window_counts[j];
            rem /= window_counts[j];
            wlo[j] = cover.thresholds[j][w];
            whi[j] = cover.thresholds[j][w + 1];
        }
        Bracket b;
        Vec lower_t(d);
        for (std::size_t j = 0; j < d; ++j) lower_t[j] = wlo[j] - eta;
        b.lower = detail::product_ramp(lower_t, eta);
        b.upper = detail::product_ramp(whi, eta);
        b.eps = params.eps;
        b.lip_norm_bound = a_required;
        b.window_lo = std::move(wlo);
        b.window_hi = std::move(whi);
        cover.brackets.push_back(std::move(b));
    }
    cover.count = cover.brackets.size();

    // sandwich validity on a seeded probe sample over a slightly enlarged box
    Box probe_box = box;
    for (std::size_t j = 0; j < d; ++j) {
        probe_box.lo[j] -= 2.0 * eta;
        probe_box.hi[j] += 2.0 * eta;
    }
    RngStream rng = RngStream::derive(params.probe_seed, rng_tag::probe, 2);
    std::vector<Vec> probes(params.probe_points, Vec(d));
    for (auto& x : probes)
        for (std::size_t j = 0; j < d; ++j)
            x[j] = probe_box.lo[j] + rng.uniform01() * (probe_box.hi[j] - probe_box.lo[j]);
    cover.validity_sample_size = probes.size();
    for (const auto& b : cover.brackets) {
        for (const auto& x : probes) {
            double l = b.lower(x), u = b.upper(x);
            auto indicator = [&x, d](const Vec& t) {
                for (std::size_t j = 0; j < d; ++j)
                    if (x[j] > t[j]) return 0.0;
                return 1.0;
            };
            // endpoints suffice: the indicator is monotone in the threshold
            if (l > u || l > indicator(b.window_lo) || indicator(b.window_hi) > u)
                ++cover.validity_violations;
        }
    }
    return cover;
}

inline std::size_t bracketing_number(const CdfSource& cdf, const Box& box, BracketParams params) {
    return build_rectangle_cover(cdf, box, params).count;
}

// ---------------------------------------------------------------------------
// scaling and integral checks

struct SlopeReport {
    double slope = 0.0;
    double intercept = 0.0;
    double expected = 0.0;  // d * r
    bool passed = false;    // slope within [0.8, 1.3] * expected
};

// log-log slope of the bracketing counts against 1/eps
inline SlopeReport check_scaling(std::span<const std::pair<double, std::size_t>> counts, std::size_t d,
                                 double r) {
    if (counts.size() < 4) throw FitDegenerateError("scaling check needs at least 4 ladder points");
    std::vector<double> xs, ys;
    for (const auto& [eps, count] : counts) {
        xs.push_back(std::log(1.0 / eps));
        ys.push_back(std::log(static_cast<double>(count)));
    }
    LineFit fit = fit_line(xs, ys);
    SlopeReport rep;
    rep.slope = fit.slope;
    rep.intercept = fit.intercept;
    rep.expected = static_cast<double>(d) * r;
    rep.passed = rep.slope >= 0.8 * rep.expected && rep.slope <= 1.3 * rep.expected;
    return rep;
}

struct IntegralReport {
    double exponent = 0.0;  // fitted power of delta^c sup_{eps >= delta} N(eps)
    bool passed = false;    // exponent > -1 (integrable near 0 for polynomial N)
    std::vector<double> integrand;  // evaluated on the ladder
    double c = 0.0, gamma = 0.0, budget_c = 0.0;
};

// Integrability of delta^c sup_{eps >= delta} N(eps, exp(C eps^{-1/gamma}), ...):
// with polynomial counts the integrand's fitted power must exceed -1.
inline IntegralReport check_bracketing_integral(std::span<const std::pair<double, std::size_t>> counts,
                                                double c, double gamma, double budget_c) {
    if (counts.size() < 2) throw FitDegenerateError("integral check needs at least 2 ladder points");
    std::vector<std::pair<double, std::size_t>> ladder(counts.begin(), counts.end());
    std::sort(ladder.begin(), ladder.end());  // ascending eps
    IntegralReport rep;
    rep.c = c;
    rep.gamma = gamma;
    rep.budget_c = budget_c;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        double delta = ladder[i].first;
        std::size_t sup_n = 0;
        for (std::size_t j = i; j < ladder.size(); ++j) sup_n = std::max(sup_n, ladder[j].second);
        double value = std::pow(delta, c) * static_cast<double>(sup_n);
        rep.integrand.push_back(value);
        xs.push_back(std::log(delta));
        ys.push_back(std::log(value));
    }
    LineFit fit = fit_line(xs, ys);
    rep.exponent = fit.slope;
    rep.passed = rep.exponent > -1.0;
    return rep;
}

}  // namespace ifslab
