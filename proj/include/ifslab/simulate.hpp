#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ifslab/errors.hpp"
#include "ifslab/functions.hpp"
#include "ifslab/rng.hpp"
#include "ifslab/stats.hpp"
#include "ifslab/system.hpp"

namespace ifslab {

// A seeded sample path. States are stored flat (row per state) to keep long
// runs cache-friendly; indices[j] is the map choice that produced state j+1.
struct Trajectory {
    std::size_t dim = 1;
    std::vector<double> data;             // size() * dim
    std::vector<std::uint32_t> indices;   // size() - 1 entries
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;

    std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
    double coord(std::size_t i, std::size_t j) const { return data[i * dim + j]; }
    std::span<const double> state_span(std::size_t i) const { return {data.data() + i * dim, dim}; }
    Vec state(std::size_t i) const {
        auto s = state_span(i);
        return Vec(s.begin(), s.end());
    }

    std::vector<double> series(const FunctionHandle& f) const {
        std::vector<double> out(size());
        Vec x(dim);
        for (std::size_t i = 0; i < size(); ++i) {
            auto s = state_span(i);
            std::copy(s.begin(), s.end(), x.begin());
            out[i] = f(x);
        }
        return out;
    }

    std::vector<double> coordinate_series(std::size_t j) const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = coord(i, j);
        return out;
    }
};

namespace detail {

inline bool constant_field(const ProbabilityField& field) {
    for (const auto& e : field.exprs)
        if (!std::holds_alternative<ProbExpr::Constant>(e.node)) return false;
    return true;
}

// index of the drawn map under the right-closed inverse-CDF convention:
// i = min{ j : u <= cumsum_j }
inline std::size_t pick_index(const Vec& probs, double u) {
    double c = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        c += probs[i];
        if (u <= c) return i;
    }
    return probs.size() - 1;
}

}  // namespace detail

// One transition from x. Consumes exactly one uniform variate from `u01`.
template <typename UniformSource>
std::pair<std::size_t, Vec> step_with(const IfsSystem& system, const Vec& x, UniformSource&& u01) {
    Vec p = evaluate_probabilities(system, x);
    std::size_t i = detail::pick_index(p, u01());
    return {i, apply_map(system, i, x)};
}

inline std::pair<std::size_t, Vec> step(const IfsSystem& system, const Vec& x, RngStream& rng) {
    return step_with(system, x, [&rng] { return rng.uniform01(); });
}

// Iterates the chain from `start`, discards `burn_in` states and records `n`.
template <typename UniformSource>
Trajectory simulate_with(const IfsSystem& system, const Vec& start, std::size_t n, std::size_t burn_in,
                         UniformSource&& u01) {
    if (n < 1) throw ConfigError("simulate needs n >= 1");
    Trajectory traj;
    traj.dim = system.dimension;
    traj.burn_in = burn_in;
    traj.data.reserve(n * traj.dim);
    traj.indices.reserve(n > 0 ? n - 1 : 0);

    const bool constant = detail::constant_field(system.field);
    Vec probs;
    if (constant) probs = evaluate_probabilities(system, start);

    Vec x = start, y(system.dimension);
    Vec buf;
    for (std::size_t t = 0; t < burn_in + n; ++t) {
        if (t >= burn_in) {
            traj.data.insert(traj.data.end(), x.begin(), x.end());
            if (t + 1 == burn_in + n) break;  // last recorded state needs no transition
        }
        if (!constant) evaluate_probabilities_into(system, x, buf);
        std::size_t i = detail::pick_index(constant ? probs : buf, u01());
        system.maps[i].apply_into(x, y);
        x.swap(y);
        if (t >= burn_in) traj.indices.push_back(static_cast<std::uint32_t>(i));
    }
    return traj;
}

inline Trajectory simulate(const IfsSystem& system, const Vec& start, std::size_t n, std::size_t burn_in,
                           std::uint64_t seed, std::uint64_t replication = 0) {
    RngStream rng = RngStream::derive(seed, rng_tag::trajectory, replication);
    Trajectory traj = simulate_with(system, start, n, burn_in, [&rng] { return rng.uniform01(); });
    traj.seed = seed;
    return traj;
}

// The transition operator applied to f: (Pf)(x) = sum_i p_i(x) f(T_i x).
inline double apply_operator(const IfsSystem& system, const FunctionHandle& f, const Vec& x) {
    Vec p = evaluate_probabilities(system, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < system.maps.size(); ++i) acc += p[i] * f(system.maps[i].apply(x));
    if (!std::isfinite(acc)) throw NonFiniteError("operator application is not finite");
    return acc;
}

struct TreeResult {
    double value = 0.0;
    double pruned_mass = 0.0;   // probability mass of pruned branches
    double leaf_prob_sum = 0.0; // mass reaching depth n (leaf_prob_sum + pruned_mass ~ 1)
    std::size_t paths = 0;
};

namespace detail {

inline void tree_recurse(const IfsSystem& system, const FunctionHandle& f, const Vec& x, std::size_t depth,
                         double prob, double prune, TreeResult& out) {
    if (prob < prune) {
        out.pruned_mass += prob;
        return;
    }
    if (depth == 0) {
        out.value += prob * f(x);
        out.leaf_prob_sum += prob;
        ++out.paths;
        return;
    }
    Vec p = evaluate_probabilities(system, x);
    for (std::size_t i = 0; i < system.maps.size(); ++i)
        tree_recurse(system, f, system.maps[i].apply(x), depth - 1, prob * p[i], prune, out);
}

}  // namespace detail

// (P^n f)(x) by exact enumeration of all length-n index words. The error from
// pruning is bounded by pruned_mass * sup |f|.
inline TreeResult iterate_operator_tree(const IfsSystem& system, const FunctionHandle& f, const Vec& x,
                                        std::size_t n, double prune = 1e-15,
                                        std::size_t budget = 10'000'000) {
    double paths = std::pow(static_cast<double>(system.maps.size()), static_cast<double>(n));
    if (paths > static_cast<double>(budget))
        throw BudgetExceededError("exact_tree would enumerate " + std::to_string(paths) + " paths");
    TreeResult out;
    detail::tree_recurse(system, f, x, n, 1.0, prune, out);
    if (!std::isfinite(out.value)) throw NonFiniteError("operator iterate is not finite");
    return out;
}

// Unbiased Monte Carlo estimate of (P^n f)(x): averages f(X_n) over `reps`
// independent chains started at x, one derived stream per replication.
inline double iterate_operator_mc(const IfsSystem& system, const FunctionHandle& f, const Vec& x,
                                  std::size_t n, std::size_t reps, std::uint64_t seed) {
    if (reps < 1) throw ConfigError("monte_carlo needs reps >= 1");
    double acc = 0.0;
    Vec cur(system.dimension), nxt(system.dimension), probs;
    for (std::size_t r = 0; r < reps; ++r) {
        RngStream rng = RngStream::derive(seed, rng_tag::mc_operator, r);
        cur = x;
        for (std::size_t t = 0; t < n; ++t) {
            evaluate_probabilities_into(system, cur, probs);
            std::size_t i = detail::pick_index(probs, rng.uniform01());
            system.maps[i].apply_into(cur, nxt);
            cur.swap(nxt);
        }
        acc += f(cur);
    }
    return acc / static_cast<double>(reps);
}

// Empirical stand-in for the invariant measure: the post-burn-in states of a
// single trajectory with uniform weights, kept in path order so block-based
// error estimates remain possible.
struct InvariantMeasureEstimate {
    std::size_t dim = 1;
    std::vector<double> flat;  // path order, size() * dim
    Vec base_point;
    Metric metric = Metric::euclidean;
    double first_moment = 0.0;  // mean distance to the base point
    std::vector<std::vector<double>> sorted_coords;  // per-coordinate CDF grids

    std::size_t size() const { return dim == 0 ? 0 : flat.size() / dim; }

    double marginal_cdf(std::size_t axis, double t) const {
        const auto& s = sorted_coords[axis];
        return static_cast<double>(std::upper_bound(s.begin(), s.end(), t) - s.begin()) /
               static_cast<double>(s.size());
    }

    double marginal_quantile(std::size_t axis, double q) const {
        const auto& s = sorted_coords[axis];
        if (s.empty()) throw ConfigError("empty invariant-measure estimate");
        double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(s.size() - 1);
        std::size_t i = static_cast<std::size_t>(pos);
        if (i + 1 >= s.size()) return s.back();
        double w = pos - static_cast<double>(i);
        return s[i] * (1.0 - w) + s[i + 1] * w;
    }

    // joint CDF; linear scan for d > 1
    double cdf(const Vec& t) const {
        if (dim == 1) return marginal_cdf(0, t[0]);
        std::size_t count = 0;
        for (std::size_t i = 0; i < size(); ++i) {
            bool below = true;
            for (std::size_t j = 0; j < dim; ++j)
                if (flat[i * dim + j] > t[j]) {
                    below = false;
                    break;
                }
            count += below ? 1 : 0;
        }
        return static_cast<double>(count) / static_cast<double>(size());
    }

    double expect(const FunctionHandle& f) const {
        double acc = 0.0;
        Vec x(dim);
        for (std::size_t i = 0; i < size(); ++i) {
            for (std::size_t j = 0; j < dim; ++j) x[j] = flat[i * dim + j];
            acc += f(x);
        }
        return acc / static_cast<double>(size());
    }

    // mean and a batch-means standard error that tolerates serial dependence
    std::pair<double, double> expect_with_se(const FunctionHandle& f, std::size_t batches = 64) const {
        std::size_t n = size();
        batches = std::min(batches, std::max<std::size_t>(n / 2, 1));
        std::vector<double> batch_mean(batches, 0.0);
        std::vector<std::size_t> batch_count(batches, 0);
        Vec x(dim);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < dim; ++j) x[j] = flat[i * dim + j];
            double v = f(x);
            total += v;
            std::size_t b = i * batches / n;
            batch_mean[b] += v;
            batch_count[b] += 1;
        }
        for (std::size_t b = 0; b < batches; ++b) batch_mean[b] /= static_cast<double>(batch_count[b]);
        double m = total / static_cast<double>(n);
        double var_b = variance(batch_mean);
        double se = std::sqrt(var_b / static_cast<double>(batches));
        return {m, se};
    }
};

inline InvariantMeasureEstimate estimate_invariant_from(const Trajectory& traj, const Vec& base_point,
                                                        Metric metric) {
    InvariantMeasureEstimate est;
    est.dim = traj.dim;
    est.flat = traj.data;
    est.base_point = base_point;
    est.metric = metric;
    Vec x(traj.dim);
    double acc = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        auto s = traj.state_span(i);
        std::copy(s.begin(), s.end(), x.begin());
        acc += distance(x, base_point, metric);
    }
    est.first_moment = traj.size() > 0 ? acc / static_cast<double>(traj.size()) : 0.0;
    est.sorted_coords.resize(traj.dim);
    for (std::size_t j = 0; j < traj.dim; ++j) {
        est.sorted_coords[j] = traj.coordinate_series(j);
        std::sort(est.sorted_coords[j].begin(), est.sorted_coords[j].end());
    }
    return est;
}

inline InvariantMeasureEstimate estimate_invariant(const IfsSystem& system, std::size_t n,
                                                   std::size_t burn_in, std::uint64_t seed) {
    Trajectory traj = simulate(system, system.base_point, n, burn_in, seed);
    return estimate_invariant_from(traj, system.base_point, system.metric);
}

// Observed distance of P^n f from its long-run mean, with a fitted geometric
// rate. Deviations below the noise floor of the invariant-measure estimate are
// excluded from the fit so the rate is not biased by estimation error.
struct DecayReport {
    std::vector<double> deviations;  // deviations[n] for n = 0..n_max
    double theta_hat = std::numeric_limits<double>::quiet_NaN();
    double c_hat = std::numeric_limits<double>::quiet_NaN();
    std::size_t fit_lo = 0, fit_hi = 0;  // inclusive n-range used by the fit
    double nu_f = 0.0;
    double nu_f_se = 0.0;
    double noise_floor = 0.0;
    bool no_decay_information = false;
    bool passed = false;  // fit succeeded and theta_hat in (0,1)
    std::vector<std::string> flags;
};

inline DecayReport decay_report(const IfsSystem& system, const FunctionHandle& f,
                                const InvariantMeasureEstimate& nu_hat, std::size_t n_max,
                                std::span<const Vec> test_points) {
    if (n_max < 3) throw ConfigError("decay_report needs n_max >= 3");
    DecayReport rep;
    auto [nu_f, se] = nu_hat.expect_with_se(f);
    rep.nu_f = nu_f;
    rep.nu_f_se = se;
    rep.noise_floor = 10.0 * se;

    rep.deviations.assign(n_max + 1, 0.0);
    for (std::size_t n = 0; n <= n_max; ++n) {
        double worst = 0.0;
        for (const auto& x : test_points)
            worst = std::max(worst, std::fabs(iterate_operator_tree(system, f, x, n).value - nu_f));
        rep.deviations[n] = worst;
    }

    // longest initial run of usable deviations starting at n = 1
    std::size_t lo = 1, hi = 0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        if (rep.deviations[n] > rep.noise_floor)
            hi = n;
        else
            break;
    }
    if (hi < lo) {
        rep.no_decay_information = true;
        rep.flags.push_back("all deviations are within the estimation noise floor; no decay information");
        return rep;
    }
    if (hi - lo + 1 < 3)
        throw FitDegenerateError("fewer than 3 deviations above the noise floor");

    std::vector<double> xs, ys;
    for (std::size_t n = lo; n <= hi; ++n) {
        xs.push_back(static_cast<double>(n));
        ys.push_back(std::log(rep.deviations[n]));
    }
    LineFit fit = fit_line(xs, ys);
    rep.theta_hat = std::exp(fit.slope);
    rep.c_hat = std::exp(fit.intercept);
    rep.fit_lo = lo;
    rep.fit_hi = hi;
    rep.passed = rep.theta_hat > 0.0 && rep.theta_hat < 1.0;
    return rep;
}

}  // namespace ifslab
