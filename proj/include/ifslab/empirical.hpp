#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ifslab/cdf.hpp"
#include "ifslab/errors.hpp"
#include "ifslab/functions.hpp"
#include "ifslab/linalg.hpp"
#include "ifslab/rng.hpp"
#include "ifslab/simulate.hpp"
#include "ifslab/stats.hpp"
#include "ifslab/system.hpp"

namespace ifslab {

// ---------------------------------------------------------------------------
// threshold grids

// Cartesian grid of thresholds t; node t stands for the half-line (or
// rectangle) indicator 1_{(-inf, t]}. Axis 0 varies fastest in the flat order.
struct ThresholdGrid {
    std::vector<std::vector<double>> axes;
    bool covers_box = true;

    std::size_t dim() const { return axes.size(); }

    std::size_t size() const {
        std::size_t total = 1;
        for (const auto& a : axes) total *= a.size();
        return total;
    }

    Vec node(std::size_t flat) const {
        Vec t(dim());
        for (std::size_t j = 0; j < dim(); ++j) {
            t[j] = axes[j][flat % axes[j].size()];
            flat /= axes[j].size();
        }
        return t;
    }

    static ThresholdGrid from_axes(std::vector<std::vector<double>> axes, const Box* box = nullptr) {
        ThresholdGrid g;
        g.axes = std::move(axes);
        for (const auto& a : g.axes) {
            if (a.empty()) throw ConfigError("threshold grid axis is empty");
            for (std::size_t i = 1; i < a.size(); ++i)
                if (!(a[i - 1] < a[i])) throw ConfigError("thresholds must be strictly increasing");
        }
        if (box != nullptr) {
            for (std::size_t j = 0; j < g.axes.size(); ++j)
                if (g.axes[j].front() > box->lo[j] || g.axes[j].back() < box->hi[j]) g.covers_box = false;
        }
        return g;
    }

    // quantile-equispaced thresholds (equal reference mass per cell), endpoints
    // pinned to the box so the grid covers it
    static ThresholdGrid quantile(const CdfSource& ref, const Box& box, std::vector<std::size_t> counts) {
        std::vector<std::vector<double>> axes(counts.size());
        for (std::size_t j = 0; j < counts.size(); ++j) {
            std::size_t m = std::max<std::size_t>(counts[j], 2);
            std::vector<double> axis;
            axis.reserve(m);
            axis.push_back(box.lo[j]);
            for (std::size_t i = 1; i + 1 < m; ++i) {
                double q = static_cast<double>(i) / static_cast<double>(m - 1);
                double t = ref.marginal_quantile(j, q);
                if (t > axis.back()) axis.push_back(t);
            }
            if (box.hi[j] > axis.back()) axis.push_back(box.hi[j]);
            axes[j] = std::move(axis);
        }
        return from_axes(std::move(axes), &box);
    }
};

// ---------------------------------------------------------------------------
// dominance counting on grids

namespace detail {

// multi-radix in-place prefix sum (turns a cell histogram into cumulative counts)
inline void prefix_sum(std::vector<double>& a, const std::vector<std::size_t>& radix) {
    std::size_t stride = 1;
    for (std::size_t axis = 0; axis < radix.size(); ++axis) {
        std::size_t m = radix[axis];
        for (std::size_t i = 0; i < a.size(); ++i)
            if ((i / stride) % m > 0) a[i] += a[i - stride];
        stride *= m;
    }
}

// Maps states to per-axis cell digits; digit <= i  <=>  coordinate <= axes[i].
struct GridCells {
    std::vector<std::size_t> radix;   // axis size + 1 (overflow cell)
    std::vector<std::size_t> stride;  // strides of the flattened cell array
    std::size_t cells = 1;
    std::vector<std::vector<std::uint32_t>> digits;  // [axis][row]
    std::size_t rows = 0;

    GridCells(std::span<const double> flat, std::size_t dim, const ThresholdGrid& grid) {
        rows = dim == 0 ? 0 : flat.size() / dim;
        radix.resize(dim);
        stride.resize(dim);
        digits.assign(dim, {});
        for (std::size_t j = 0; j < dim; ++j) {
            radix[j] = grid.axes[j].size() + 1;
            stride[j] = cells;
            cells *= radix[j];
            digits[j].resize(rows);
            const auto& axis = grid.axes[j];
            for (std::size_t i = 0; i < rows; ++i) {
                double x = flat[i * dim + j];
                digits[j][i] = static_cast<std::uint32_t>(
                    std::lower_bound(axis.begin(), axis.end(), x) - axis.begin());
            }
        }
    }

    std::size_t cell(std::size_t row) const {
        std::size_t c = 0;
        for (std::size_t j = 0; j < radix.size(); ++j) c += stride[j] * digits[j][row];
        return c;
    }

    std::size_t cell_max(std::size_t row_a, std::size_t row_b) const {
        std::size_t c = 0;
        for (std::size_t j = 0; j < radix.size(); ++j)
            c += stride[j] * std::max(digits[j][row_a], digits[j][row_b]);
        return c;
    }

    // flat position of a grid node inside the cell array
    std::size_t node_cell(const ThresholdGrid& grid, std::size_t node_flat) const {
        std::size_t c = 0;
        for (std::size_t j = 0; j < radix.size(); ++j) {
            c += stride[j] * (node_flat % grid.axes[j].size());
            node_flat /= grid.axes[j].size();
        }
        return c;
    }
};

}  // namespace detail

// counts[node] = #states dominated by the node (componentwise <=)
inline std::vector<double> count_below_nodes(std::span<const double> flat, std::size_t dim,
                                             const ThresholdGrid& grid) {
    std::size_t m = grid.size();
    std::vector<double> counts(m, 0.0);
    if (dim == 1) {
        std::vector<double> sorted(flat.begin(), flat.end());
        std::sort(sorted.begin(), sorted.end());
        const auto& axis = grid.axes[0];
        for (std::size_t i = 0; i < m; ++i)
            counts[i] = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), axis[i]) -
                                            sorted.begin());
        return counts;
    }
    detail::GridCells cells(flat, dim, grid);
    std::vector<double> hist(cells.cells, 0.0);
    for (std::size_t i = 0; i < cells.rows; ++i) hist[cells.cell(i)] += 1.0;
    detail::prefix_sum(hist, cells.radix);
    for (std::size_t node = 0; node < m; ++node) counts[node] = hist[cells.node_cell(grid, node)];
    return counts;
}

// ---------------------------------------------------------------------------
// the empirical process

struct EmpiricalProcessResult {
    ThresholdGrid grid;
    std::vector<double> values;  // U_n at each node, flat grid order
    std::size_t n = 0;
    std::string mean_ref;
};

inline std::vector<double> node_cdf_values(const ThresholdGrid& grid, const CdfSource& ref) {
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = ref.cdf(grid.node(i));
    return f;
}

inline std::vector<double> empirical_process_values(const Trajectory& traj, const ThresholdGrid& grid,
                                                    std::span<const double> node_cdf) {
    if (traj.size() < 1) throw ConfigError("empirical process needs at least one state");
    std::vector<double> counts = count_below_nodes(traj.data, traj.dim, grid);
    double n = static_cast<double>(traj.size());
    double root = std::sqrt(n);
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = (counts[i] - n * node_cdf[i]) / root;
    return values;
}

inline EmpiricalProcessResult empirical_process(const Trajectory& traj, const ThresholdGrid& grid,
                                                const CdfSource& mean_ref) {
    if (mean_ref.empty()) throw MissingMeanRefError("empirical process needs a mean reference");
    EmpiricalProcessResult out;
    out.grid = grid;
    out.values = empirical_process_values(traj, grid, node_cdf_values(grid, mean_ref));
    out.n = traj.size();
    out.mean_ref = mean_ref.description();
    return out;
}

inline double ks_statistic(const EmpiricalProcessResult& result) {
    double best = 0.0;
    for (double v : result.values) best = std::max(best, std::fabs(v));
    return best;
}

// ---------------------------------------------------------------------------
// long-run variance

struct CutoffParams {
    double tol_mult = 2.0;      // tolerance = tol_mult / sqrt(n) * gamma_0
    std::size_t consecutive = 5;  // sub-tolerance lags required to stop
    std::size_t cap = 200;
};

struct LongRunVariance {
    double value = 0.0;
    double gamma0 = 0.0;
    std::size_t cutoff = 0;
    bool decayed = true;  // false if the cap was reached without triggering
    std::size_t n = 0;
};

// sigma^2 = gamma_0 + 2 sum_{k=1}^K gamma_k with the adaptive cutoff K: the
// last lag before the first run of `consecutive` sub-tolerance lags.
inline LongRunVariance long_run_sigma2(std::span<const double> series, CutoffParams params = {}) {
    std::size_t n = series.size();
    std::size_t cap = std::min(params.cap, n / 100);
    if (n < 200 || cap < 1) throw ConfigError("series too short for long-run variance estimation");
    double m = mean(series);
    auto gamma = [&](std::size_t k) {
        double acc = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) acc += (series[i] - m) * (series[i + k] - m);
        return acc / static_cast<double>(n);
    };
    LongRunVariance out;
    out.n = n;
    out.gamma0 = gamma(0);
    double tol = params.tol_mult / std::sqrt(static_cast<double>(n)) * out.gamma0;
    std::vector<double> gammas;  // gammas[k-1] = gamma_k
    std::size_t run = 0;
    std::size_t cutoff = cap;
    out.decayed = false;
    for (std::size_t k = 1; k <= cap; ++k) {
        gammas.push_back(gamma(k));
        run = std::fabs(gammas.back()) < tol ? run + 1 : 0;
        if (run >= params.consecutive) {
            cutoff = k - params.consecutive;
            out.decayed = true;
            break;
        }
    }
    out.cutoff = cutoff;
    out.value = out.gamma0;
    for (std::size_t k = 1; k <= cutoff; ++k) out.value += 2.0 * gammas[k - 1];
    return out;
}

inline LongRunVariance long_run_sigma2(const Trajectory& traj, const FunctionHandle& f,
                                       CutoffParams params = {}) {
    return long_run_sigma2(traj.series(f), params);
}

// ---------------------------------------------------------------------------
// covariance kernel of the limit process

struct CovarianceKernel {
    ThresholdGrid grid;
    std::vector<double> matrix;  // m x m, row-major, symmetrized
    std::size_t lag_cutoff = 0;
    std::vector<double> sigma2_diag;
    bool decayed = true;
    std::size_t n = 0;

    double at(std::size_t s, std::size_t t) const { return matrix[s * grid.size() + t]; }
};

// kernel(s,t) = sum_{k>=0} cov(1{X_0<=s}, 1{X_k<=t}) + sum_{k>=1} cov(1{X_k<=s}, 1{X_0<=t}),
// truncated at a cutoff shared across nodes (the max of the per-node adaptive
// cutoffs of the indicator autocovariances).
inline CovarianceKernel covariance_kernel(const Trajectory& traj, const ThresholdGrid& grid,
                                          CutoffParams params = {}) {
    std::size_t n = traj.size();
    std::size_t cap = std::min(params.cap, n / 100);
    if (n < 200 || cap < 1) throw ConfigError("trajectory too short for kernel estimation");
    std::size_t m = grid.size();
    double dn = static_cast<double>(n);

    detail::GridCells cells(traj.data, traj.dim, grid);
    std::vector<std::size_t> node_cell(m);
    for (std::size_t i = 0; i < m; ++i) node_cell[i] = cells.node_cell(grid, i);

    // counts over the whole path: node means
    std::vector<double> cnt_all(cells.cells, 0.0);
    for (std::size_t i = 0; i < n; ++i) cnt_all[cells.cell(i)] += 1.0;
    detail::prefix_sum(cnt_all, cells.radix);
    std::vector<double> mean_node(m);
    for (std::size_t i = 0; i < m; ++i) mean_node[i] = cnt_all[node_cell[i]] / dn;

    // counts over a leading/trailing window, per node
    auto window_counts = [&](std::size_t from, std::size_t to) {
        std::vector<double> h(cells.cells, 0.0);
        for (std::size_t i = from; i < to; ++i) h[cells.cell(i)] += 1.0;
        detail::prefix_sum(h, cells.radix);
        std::vector<double> out(m);
        for (std::size_t i = 0; i < m; ++i) out[i] = h[node_cell[i]];
        return out;
    };

    // pass 1: per-node indicator autocovariances, adaptive shared cutoff
    std::vector<double> gamma0(m);
    std::vector<double> tol(m);
    std::vector<std::size_t> run(m, 0), node_cutoff(m, cap);
    std::vector<bool> triggered(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        double p = mean_node[i];
        gamma0[i] = p * (1.0 - p);
        tol[i] = params.tol_mult / std::sqrt(dn) * gamma0[i];
        if (gamma0[i] <= 1e-15) {  // constant indicator: nothing to sum
            triggered[i] = true;
            node_cutoff[i] = 0;
        }
    }
    std::size_t remaining = 0;
    for (bool t : triggered) remaining += t ? 0 : 1;
    std::vector<double> hist(cells.cells);
    for (std::size_t k = 1; k <= cap && remaining > 0; ++k) {
        std::fill(hist.begin(), hist.end(), 0.0);
        for (std::size_t i = 0; i + k < n; ++i) hist[cells.cell_max(i, i + k)] += 1.0;
        detail::prefix_sum(hist, cells.radix);
        std::vector<double> lead = window_counts(0, n - k);
        std::vector<double> trail = window_counts(k, n);
        for (std::size_t t = 0; t < m; ++t) {
            if (triggered[t]) continue;
            double p = mean_node[t];
            double g = (hist[node_cell[t]] - p * lead[t] - p * trail[t] +
                        static_cast<double>(n - k) * p * p) /
                       dn;
            run[t] = std::fabs(g) < tol[t] ? run[t] + 1 : 0;
            if (run[t] >= params.consecutive) {
                triggered[t] = true;
                node_cutoff[t] = k - params.consecutive;
                --remaining;
            }
        }
    }
    CovarianceKernel kernel;
    kernel.grid = grid;
    kernel.n = n;
    kernel.decayed = remaining == 0;
    kernel.lag_cutoff = 0;
    for (std::size_t i = 0; i < m; ++i) kernel.lag_cutoff = std::max(kernel.lag_cutoff, node_cutoff[i]);

    // pass 2: accumulate cross-covariances up to the shared cutoff
    kernel.matrix.assign(m * m, 0.0);
    std::vector<std::size_t> radix2;
    radix2.reserve(cells.radix.size() * 2);
    for (std::size_t pass = 0; pass < 2; ++pass)
        for (std::size_t r : cells.radix) radix2.push_back(r);
    std::vector<double> joint(cells.cells * cells.cells, 0.0);
    for (std::size_t k = 0; k <= kernel.lag_cutoff; ++k) {
        std::fill(joint.begin(), joint.end(), 0.0);
        for (std::size_t i = 0; i + k < n; ++i)
            joint[cells.cell(i) * cells.cells + cells.cell(i + k)] += 1.0;
        detail::prefix_sum(joint, radix2);
        std::vector<double> lead = window_counts(0, n - k);
        std::vector<double> trail = window_counts(k, n);
        double nk = static_cast<double>(n - k);
        for (std::size_t s = 0; s < m; ++s) {
            for (std::size_t t = 0; t < m; ++t) {
                // flat joint layout: the lagged factor X_{i+k} occupies the fast
                // digit block, so #{X_i <= s, X_{i+k} <= t} sits at t + C*s
                double joint_count = joint[node_cell[t] + cells.cells * node_cell[s]];
                // cov(1{X_0 <= s}, 1{X_k <= t}) over the n-k aligned pairs
                double g = (joint_count - mean_node[t] * lead[s] - mean_node[s] * trail[t] +
                            nk * mean_node[s] * mean_node[t]) /
                           dn;
                if (k == 0)
                    kernel.matrix[s * m + t] += g;
                else {
                    kernel.matrix[s * m + t] += g;
                    kernel.matrix[t * m + s] += g;
                }
            }
        }
    }
    // symmetrize (construction is symmetric up to rounding)
    for (std::size_t s = 0; s < m; ++s)
        for (std::size_t t = s + 1; t < m; ++t) {
            double v = 0.5 * (kernel.matrix[s * m + t] + kernel.matrix[t * m + s]);
            kernel.matrix[s * m + t] = v;
            kernel.matrix[t * m + s] = v;
        }
    kernel.sigma2_diag.resize(m);
    for (std::size_t s = 0; s < m; ++s) kernel.sigma2_diag[s] = kernel.matrix[s * m + s];
    return kernel;
}

// ---------------------------------------------------------------------------
// sampling the limit Gaussian process

struct GaussianSupSamples {
    std::vector<double> sup_abs;  // sup over grid nodes of |W| per draw
    double clipped_mass = 0.0;    // eigenvalue mass removed to restore psd
    double trace = 0.0;
    double min_eigenvalue = 0.0;
};

inline Eigen::MatrixXd kernel_as_eigen(const CovarianceKernel& kernel) {
    std::size_t m = kernel.grid.size();
    Eigen::MatrixXd cov(m, m);
    for (std::size_t s = 0; s < m; ++s)
        for (std::size_t t = 0; t < m; ++t)
            cov(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = kernel.at(s, t);
    return cov;
}

// Draws centered Gaussian vectors with the (psd-clipped) kernel covariance via
// a symmetric eigen square root and returns sup |W| per draw.
inline GaussianSupSamples simulate_limit_gaussian(const CovarianceKernel& kernel, std::size_t reps,
                                                  std::uint64_t seed) {
    SymmetricFactor fac = symmetric_sqrt(kernel_as_eigen(kernel));
    GaussianSupSamples out;
    out.clipped_mass = fac.clipped_mass;
    out.trace = fac.trace;
    out.min_eigenvalue = fac.min_eigenvalue;
    if (fac.trace > 0.0 && fac.clipped_mass > 0.01 * fac.trace)
        throw ClipTooLargeError("clipped eigenvalue mass exceeds 1% of the kernel trace");
    std::size_t m = kernel.grid.size();
    out.sup_abs.resize(reps);
    Eigen::VectorXd z(m);
    for (std::size_t r = 0; r < reps; ++r) {
        RngStream rng = RngStream::derive(seed, rng_tag::gaussian, r);
        for (std::size_t i = 0; i < m; ++i) z(static_cast<Eigen::Index>(i)) = rng.normal();
        Eigen::VectorXd w = fac.factor * z;
        out.sup_abs[r] = w.cwiseAbs().maxCoeff();
    }
    return out;
}

// full draws, for tests that check the reproduced covariance
inline std::vector<Vec> simulate_limit_gaussian_draws(const CovarianceKernel& kernel, std::size_t reps,
                                                      std::uint64_t seed) {
    SymmetricFactor fac = symmetric_sqrt(kernel_as_eigen(kernel));
    std::size_t m = kernel.grid.size();
    std::vector<Vec> draws(reps, Vec(m));
    Eigen::VectorXd z(m);
    for (std::size_t r = 0; r < reps; ++r) {
        RngStream rng = RngStream::derive(seed, rng_tag::gaussian, r);
        for (std::size_t i = 0; i < m; ++i) z(static_cast<Eigen::Index>(i)) = rng.normal();
        Eigen::VectorXd w = fac.factor * z;
        for (std::size_t i = 0; i < m; ++i) draws[r][i] = w(static_cast<Eigen::Index>(i));
    }
    return draws;
}

// ---------------------------------------------------------------------------
// scalar CLT diagnostic

struct CltOptions {
    std::size_t burn_in = 1000;
    std::optional<double> mean;    // E f under the invariant measure
    std::optional<double> sigma2;  // long-run variance of f
    std::size_t master_n = 0;      // 0: 100x the replication length
};

struct NormalityReport {
    double ks_stat = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double sigma2_used = 0.0;
    double mean_used = 0.0;
    std::size_t n = 0, reps = 0;
    bool degenerate = false;
    std::vector<double> standardized;
};

namespace detail {

// sum of f(X_k) - mean over one fresh chain replication
template <typename UniformSource>
double chain_partial_sum(const IfsSystem& system, const FunctionHandle& f, std::size_t n,
                         std::size_t burn_in, double mean_value, UniformSource&& u01) {
    const bool constant = constant_field(system.field);
    Vec probs;
    if (constant) probs = evaluate_probabilities(system, system.base_point);
    Vec x = system.base_point, y(system.dimension), buf;
    double acc = 0.0;
    for (std::size_t t = 0; t < burn_in + n; ++t) {
        if (t >= burn_in) acc += f(x) - mean_value;
        if (t + 1 == burn_in + n) break;
        if (!constant) evaluate_probabilities_into(system, x, buf);
        std::size_t i = pick_index(constant ? probs : buf, u01());
        system.maps[i].apply_into(x, y);
        x.swap(y);
    }
    return acc;
}

}  // namespace detail

// Distribution of the standardized partial sums S_n / (sigma sqrt(n)) over
// independent replications, compared against the standard normal.
inline NormalityReport clt_diagnostic(const IfsSystem& system, const FunctionHandle& f, std::size_t n,
                                      std::size_t reps, std::uint64_t seed, CltOptions opts = {}) {
    NormalityReport rep;
    rep.n = n;
    rep.reps = reps;
    double mean_value, sigma2;
    if (opts.mean && opts.sigma2) {
        mean_value = *opts.mean;
        sigma2 = *opts.sigma2;
    } else {
        std::size_t master_n = opts.master_n > 0 ? opts.master_n : 100 * n;
        Trajectory master = simulate(system, system.base_point, master_n, opts.burn_in, seed, 0);
        std::vector<double> series = master.series(f);
        mean_value = opts.mean ? *opts.mean : mean(series);
        sigma2 = opts.sigma2 ? *opts.sigma2 : long_run_sigma2(series).value;
    }
    rep.mean_used = mean_value;
    rep.sigma2_used = sigma2;
    double scale = std::max(1.0, f.sup_bound());
    if (sigma2 <= 1e-12 * scale * scale) {
        rep.degenerate = true;  // N(0,0) limit: standardization is skipped
        return rep;
    }
    double denom = std::sqrt(sigma2 * static_cast<double>(n));
    rep.standardized.resize(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        RngStream rng = RngStream::derive(seed, rng_tag::replication, r + 1);
        double s = detail::chain_partial_sum(system, f, n, opts.burn_in, mean_value,
                                             [&rng] { return rng.uniform01(); });
        rep.standardized[r] = s / denom;
    }
    rep.ks_stat = ks_one_sample(rep.standardized, [](double x) { return standard_normal_cdf(x); });
    rep.skewness = ifslab::skewness(rep.standardized);
    rep.excess_kurtosis = ifslab::excess_kurtosis(rep.standardized);
    return rep;
}

// ---------------------------------------------------------------------------
// empirical CLT diagnostic

struct EcltOptions {
    std::size_t burn_in = 1000;
    std::size_t kernel_n = 0;     // 0: 100x the replication length
    std::size_t gauss_reps = 4000;
    CdfSource mean_ref;           // empty: empirical, from the kernel run
};

struct ComparisonReport {
    std::vector<double> chain_stats;     // ks statistic per chain replication
    std::vector<double> gaussian_stats;  // sup |W| per limit draw
    double chain_median = 0.0, chain_q90 = 0.0;
    double gauss_median = 0.0, gauss_q90 = 0.0;
    double rel_diff_median = 0.0, rel_diff_q90 = 0.0;
    double two_sample_ks = 0.0;
    double clipped_mass = 0.0;
    std::size_t lag_cutoff = 0;
    std::size_t n = 0, reps = 0;
    std::string mean_ref;
};

// Shared core: compares the ks-statistic distribution of `reps` replications
// produced by `factory` with the sup-distribution of the limit Gaussian.
template <typename TrajectoryFactory>
ComparisonReport eclt_compare(TrajectoryFactory&& factory, const ThresholdGrid& grid,
                              const CdfSource& mean_ref, const CovarianceKernel& kernel,
                              std::size_t reps, std::size_t gauss_reps, std::uint64_t seed) {
    if (mean_ref.empty()) throw MissingMeanRefError("eclt comparison needs a mean reference");
    ComparisonReport rep;
    rep.mean_ref = mean_ref.description();
    std::vector<double> node_cdf = node_cdf_values(grid, mean_ref);
    rep.chain_stats.resize(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        Trajectory traj = factory(r);
        std::vector<double> values = empirical_process_values(traj, grid, node_cdf);
        double best = 0.0;
        for (double v : values) best = std::max(best, std::fabs(v));
        rep.chain_stats[r] = best;
        rep.n = traj.size();
    }
    GaussianSupSamples gauss = simulate_limit_gaussian(kernel, gauss_reps, seed);
    rep.gaussian_stats = gauss.sup_abs;
    rep.clipped_mass = gauss.clipped_mass;
    rep.lag_cutoff = kernel.lag_cutoff;
    rep.reps = reps;
    rep.chain_median = quantile(rep.chain_stats, 0.5);
    rep.chain_q90 = quantile(rep.chain_stats, 0.9);
    rep.gauss_median = quantile(rep.gaussian_stats, 0.5);
    rep.gauss_q90 = quantile(rep.gaussian_stats, 0.9);
    auto rel = [](double a, double b) { return b != 0.0 ? std::fabs(a - b) / std::fabs(b) : std::fabs(a); };
    rep.rel_diff_median = rel(rep.chain_median, rep.gauss_median);
    rep.rel_diff_q90 = rel(rep.chain_q90, rep.gauss_q90);
    if (rep.chain_median == 0.0 && rep.gauss_median == 0.0) {
        rep.two_sample_ks = 0.0;  // both degenerate at zero
    } else {
        rep.two_sample_ks = ks_two_sample(rep.chain_stats, rep.gaussian_stats);
    }
    return rep;
}

inline ComparisonReport eclt_diagnostic(const IfsSystem& system, const ThresholdGrid& grid, std::size_t n,
                                        std::size_t reps, std::uint64_t seed, EcltOptions opts = {}) {
    std::size_t kernel_n = opts.kernel_n > 0 ? opts.kernel_n : 100 * n;
    Trajectory long_run = simulate(system, system.base_point, kernel_n, opts.burn_in, seed, 0);
    CovarianceKernel kernel = covariance_kernel(long_run, grid);
    CdfSource mean_ref = opts.mean_ref;
    if (mean_ref.empty())
        mean_ref = CdfSource::empirical(estimate_invariant_from(long_run, system.base_point, system.metric));
    auto factory = [&](std::size_t r) {
        return simulate(system, system.base_point, n, opts.burn_in, seed, r + 1);
    };
    return eclt_compare(factory, grid, mean_ref, kernel, reps, opts.gauss_reps, seed);
}

// ---------------------------------------------------------------------------
// moment growth

struct GrowthOptions {
    std::size_t burn_in = 1000;
    std::optional<double> mean;
    std::optional<double> sigma2;
    double r = 1.5;           // exponent of the weak norm
    std::size_t master_n = 0; // 0: auto
};

struct GrowthReport {
    std::size_t p = 1;
    std::vector<std::size_t> n_list;
    std::vector<double> moments;     // empirical E[S_n^{2p}]
    std::vector<double> var_over_n;  // Var(S_n) / n
    std::vector<double> bounds;      // sum_i n^i ||f||_r^i log^{2p-i}(||f||_BL + 1)
    double fitted_c = 0.0;           // max moment/bound ratio; dominance holds with it
    double var_spread = 0.0;         // max/min - 1 across n_list
    bool var_ok = false;
    double kurtosis_ratio = 0.0;     // E[S_n^4] / (n^2 sigma^4) at the largest n (p = 2)
    double f_r_norm = 0.0, f_bl_norm = 0.0, sigma2_used = 0.0, mean_used = 0.0;
};

inline GrowthReport moment_growth_check(const IfsSystem& system, const FunctionHandle& f,
                                        std::vector<std::size_t> n_list, std::size_t reps,
                                        std::uint64_t seed, std::size_t p, GrowthOptions opts = {}) {
    if (p != 1 && p != 2) throw ConfigError("moment growth check supports p in {1, 2}");
    if (f.sup_bound() > 1.0 + 1e-9) throw ConfigError("moment growth check needs ||f||_inf <= 1");
    GrowthReport rep;
    rep.p = p;
    rep.n_list = n_list;
    std::size_t max_n = 0;
    for (std::size_t n : n_list) max_n = std::max(max_n, n);

    std::size_t master_n = opts.master_n > 0 ? opts.master_n : std::min<std::size_t>(100 * max_n, 2'000'000);
    Trajectory master = simulate(system, system.base_point, master_n, opts.burn_in, seed, 0);
    std::vector<double> series = master.series(f);
    rep.mean_used = opts.mean ? *opts.mean : mean(series);
    rep.sigma2_used = opts.sigma2 ? *opts.sigma2 : long_run_sigma2(series).value;
    double racc = 0.0;
    for (double v : series) racc += std::pow(std::fabs(v), opts.r);
    rep.f_r_norm = std::pow(racc / static_cast<double>(series.size()), 1.0 / opts.r);
    rep.f_bl_norm = f.bl_norm_bound();

    double logterm = std::log(rep.f_bl_norm + 1.0);
    std::uint64_t rep_stream = 1;
    for (std::size_t n : n_list) {
        std::vector<double> sums(reps);
        for (std::size_t r = 0; r < reps; ++r, ++rep_stream) {
            RngStream rng = RngStream::derive(seed, rng_tag::replication, rep_stream);
            sums[r] = detail::chain_partial_sum(system, f, n, opts.burn_in, rep.mean_used,
                                                [&rng] { return rng.uniform01(); });
        }
        double m2p = 0.0;
        for (double s : sums) m2p += std::pow(s, 2.0 * static_cast<double>(p));
        m2p /= static_cast<double>(reps);
        rep.moments.push_back(m2p);
        rep.var_over_n.push_back(variance(sums) / static_cast<double>(n));

        double bound = 0.0;
        for (std::size_t i = 0; i <= p; ++i)
            bound += std::pow(static_cast<double>(n), static_cast<double>(i)) *
                     std::pow(rep.f_r_norm, static_cast<double>(i)) *
                     std::pow(logterm, static_cast<double>(2 * p - i));
        rep.bounds.push_back(bound);
    }
    for (std::size_t i = 0; i < rep.moments.size(); ++i)
        rep.fitted_c = std::max(rep.fitted_c, rep.bounds[i] > 0.0 ? rep.moments[i] / rep.bounds[i] : 0.0);
    double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0;
    for (double v : rep.var_over_n) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    rep.var_spread = vmin > 0.0 ? vmax / vmin - 1.0 : 0.0;
    rep.var_ok = rep.var_spread <= 0.10;
    if (p == 2 && !rep.moments.empty()) {
        std::size_t last = rep.moments.size() - 1;
        double n = static_cast<double>(rep.n_list[last]);
        rep.kurtosis_ratio = rep.moments[last] / (n * n * rep.sigma2_used * rep.sigma2_used);
    }
    return rep;
}

}  // namespace ifslab
