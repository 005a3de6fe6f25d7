#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "ifslab/errors.hpp"
#include "ifslab/functions.hpp"
#include "ifslab/geometry.hpp"
#include "ifslab/simulate.hpp"

namespace ifslab {

// Reference distribution used to center the empirical process, to place
// quantile grids and to build bracket covers. Either analytic (closed-form
// invariant measure, as for the halving reference system) or the empirical
// measure of an independent long run, whose estimation error is carried along.
class CdfSource {
  public:
    CdfSource() = default;

    static CdfSource uniform_box(const Box& box) {
        CdfSource s;
        s.kind_ = Kind::uniform;
        s.box_ = box;
        s.description_ = "analytic:uniform-box";
        return s;
    }

    static CdfSource empirical(InvariantMeasureEstimate estimate, double se = 0.0) {
        CdfSource s;
        s.kind_ = Kind::empirical;
        s.est_ = std::make_shared<InvariantMeasureEstimate>(std::move(estimate));
        s.se_ = se > 0.0 ? se : 1.0 / std::sqrt(static_cast<double>(s.est_->size()));
        s.description_ = "empirical:longrun(n=" + std::to_string(s.est_->size()) + ")";
        return s;
    }

    // custom analytic scalar CDF (d = 1); quantiles fall back to bisection
    static CdfSource analytic1d(std::function<double(double)> cdf, double lo, double hi,
                                std::string name = "analytic:custom") {
        CdfSource s;
        s.kind_ = Kind::analytic1d;
        s.fn_ = std::move(cdf);
        s.box_ = Box{{lo}, {hi}};
        s.description_ = std::move(name);
        return s;
    }

    bool empty() const { return kind_ == Kind::none; }
    bool is_analytic() const { return kind_ == Kind::uniform || kind_ == Kind::analytic1d; }
    double standard_error() const { return se_; }
    const std::string& description() const { return description_; }

    std::size_t dim() const {
        switch (kind_) {
            case Kind::uniform: return box_.dim();
            case Kind::empirical: return est_->dim;
            case Kind::analytic1d: return 1;
            case Kind::none: break;
        }
        return 0;
    }

    double marginal_cdf(std::size_t axis, double t) const {
        switch (kind_) {
            case Kind::uniform: {
                double w = box_.hi[axis] - box_.lo[axis];
                return std::clamp((t - box_.lo[axis]) / w, 0.0, 1.0);
            }
            case Kind::empirical: return est_->marginal_cdf(axis, t);
            case Kind::analytic1d: return fn_(t);
            case Kind::none: break;
        }
        throw MissingMeanRefError("no reference distribution configured");
    }

    // joint CDF (marginals are independent in the analytic cases)
    double cdf(const Vec& t) const {
        switch (kind_) {
            case Kind::uniform: {
                double acc = 1.0;
                for (std::size_t j = 0; j < box_.dim(); ++j) acc *= marginal_cdf(j, t[j]);
                return acc;
            }
            case Kind::empirical: return est_->cdf(t);
            case Kind::analytic1d: return fn_(t[0]);
            case Kind::none: break;
        }
        throw MissingMeanRefError("no reference distribution configured");
    }

    double marginal_quantile(std::size_t axis, double q) const {
        q = std::clamp(q, 0.0, 1.0);
        switch (kind_) {
            case Kind::uniform: return box_.lo[axis] + q * (box_.hi[axis] - box_.lo[axis]);
            case Kind::empirical: return est_->marginal_quantile(axis, q);
            case Kind::analytic1d: {
                double lo = box_.lo[0], hi = box_.hi[0];
                for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::fabs(hi)); ++it) {
                    double mid = 0.5 * (lo + hi);
                    (fn_(mid) < q ? lo : hi) = mid;
                }
                return 0.5 * (lo + hi);
            }
            case Kind::none: break;
        }
        throw MissingMeanRefError("no reference distribution configured");
    }

    // E f under the reference; quadrature through the quantile transform for
    // analytic sources, sample mean for empirical ones
    double expect(const FunctionHandle& f) const {
        if (kind_ == Kind::empirical) return est_->expect(f);
        if (kind_ == Kind::none) throw MissingMeanRefError("no reference distribution configured");
        std::size_t d = dim();
        if (d > 2) throw ConfigError("analytic expectations implemented for d <= 2 only");
        const std::size_t nodes = 1024;  // composite Simpson per axis
        auto simpson_weight = [nodes](std::size_t i) {
            if (i == 0 || i == nodes) return 1.0;
            return i % 2 == 1 ? 4.0 : 2.0;
        };
        double h = 1.0 / static_cast<double>(nodes);
        if (d == 1) {
            double acc = 0.0;
            Vec x(1);
            for (std::size_t i = 0; i <= nodes; ++i) {
                x[0] = marginal_quantile(0, static_cast<double>(i) * h);
                acc += simpson_weight(i) * f(x);
            }
            return acc * h / 3.0;
        }
        double acc = 0.0;
        Vec x(2);
        for (std::size_t i = 0; i <= nodes; ++i) {
            x[0] = marginal_quantile(0, static_cast<double>(i) * h);
            double inner = 0.0;
            for (std::size_t j = 0; j <= nodes; ++j) {
                x[1] = marginal_quantile(1, static_cast<double>(j) * h);
                inner += simpson_weight(j) * f(x);
            }
            acc += simpson_weight(i) * inner * h / 3.0;
        }
        return acc * h / 3.0;
    }

  private:
    enum class Kind { none, uniform, empirical, analytic1d };
    Kind kind_ = Kind::none;
    Box box_;
    std::shared_ptr<const InvariantMeasureEstimate> est_;
    std::function<double(double)> fn_;
    double se_ = 0.0;
    std::string description_ = "none";
};

}  // namespace ifslab
