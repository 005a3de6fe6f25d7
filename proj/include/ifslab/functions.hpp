#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>

#include "ifslab/geometry.hpp"

namespace ifslab {

// Test functions come from a closed family (affine, ramps, sigmoid ramps,
// products, sums, scalings) so that sup and Lipschitz bounds are analytic.
// The declared bounds are upper bounds; the tight values matter only where a
// construction states them (see the bracket envelopes).
class FunctionHandle {
  public:
    FunctionHandle() { *this = constant(0.0); }

    double operator()(const Vec& x) const { return node_->eval(x); }

    double sup_bound() const { return sup_; }
    double lipschitz_bound() const { return lip_; }
    // ||f|| in the bounded-Lipschitz norm: sup |f| + Lip(f)
    double bl_norm_bound() const { return sup_ + lip_; }
    const std::string& describe() const { return desc_; }

    static FunctionHandle constant(double c) {
        return FunctionHandle(Node::make(Node::Kind::constant, c), std::fabs(c), 0.0,
                              "const(" + trim(c) + ")");
    }

    // f(x) = slope . x + intercept; sup bound computed over the box corners
    static FunctionHandle affine(Vec slope, double intercept, const Box& box, Metric metric) {
        double lo = intercept, hi = intercept;
        for (std::size_t i = 0; i < slope.size(); ++i) {
            lo += slope[i] * (slope[i] >= 0.0 ? box.lo[i] : box.hi[i]);
            hi += slope[i] * (slope[i] >= 0.0 ? box.hi[i] : box.lo[i]);
        }
        auto n = Node::make(Node::Kind::affine, intercept);
        n->slope = slope;
        return FunctionHandle(std::move(n), std::max(std::fabs(lo), std::fabs(hi)), dual_norm(slope, metric),
                              "affine");
    }

    // coordinate projection x -> x[axis]
    static FunctionHandle coordinate(std::size_t axis, const Box& box, Metric metric) {
        Vec slope(box.dim(), 0.0);
        slope[axis] = 1.0;
        FunctionHandle f = affine(std::move(slope), 0.0, box, metric);
        f.desc_ = box.dim() == 1 ? "id" : "coord(" + std::to_string(axis) + ")";
        return f;
    }

    // ramp(t, eta): 1 on (-inf, t], linear down to 0 at t + eta. The one-sided
    // smoothing of the half-line indicator used by the bracket envelopes.
    static FunctionHandle ramp(std::size_t axis, double t, double eta) {
        auto n = Node::make(Node::Kind::ramp, t, eta);
        n->axis = axis;
        return FunctionHandle(std::move(n), 1.0, 1.0 / eta,
                              "ramp(axis=" + std::to_string(axis) + ",t=" + trim(t) + ",eta=" + trim(eta) + ")");
    }

    // logistic ramp centered at t with scale eta (Lipschitz 1/(4 eta))
    static FunctionHandle sigmoid(std::size_t axis, double t, double eta) {
        auto n = Node::make(Node::Kind::sigmoid, t, eta);
        n->axis = axis;
        return FunctionHandle(std::move(n), 1.0, 0.25 / eta,
                              "sigmoid(axis=" + std::to_string(axis) + ",t=" + trim(t) + ",eta=" + trim(eta) + ")");
    }

    static FunctionHandle product(FunctionHandle f, FunctionHandle g) {
        double sup = f.sup_ * g.sup_;
        double lip = f.lip_ * g.sup_ + g.lip_ * f.sup_;
        std::string d = "(" + f.desc_ + ")*(" + g.desc_ + ")";
        auto n = Node::make(Node::Kind::product);
        n->left = f.node_;
        n->right = g.node_;
        return FunctionHandle(std::move(n), sup, lip, std::move(d));
    }

    static FunctionHandle sum(FunctionHandle f, FunctionHandle g) {
        double sup = f.sup_ + g.sup_;
        double lip = f.lip_ + g.lip_;
        std::string d = "(" + f.desc_ + ")+(" + g.desc_ + ")";
        auto n = Node::make(Node::Kind::sum);
        n->left = f.node_;
        n->right = g.node_;
        return FunctionHandle(std::move(n), sup, lip, std::move(d));
    }

    static FunctionHandle scaled(double c, FunctionHandle f) {
        auto n = Node::make(Node::Kind::scale, c);
        n->left = f.node_;
        return FunctionHandle(std::move(n), std::fabs(c) * f.sup_, std::fabs(c) * f.lip_,
                              trim(c) + "*(" + f.desc_ + ")");
    }

  private:
    struct Node {
        enum class Kind { constant, affine, ramp, sigmoid, product, sum, scale };
        Kind kind;
        double a = 0.0;  // constant value / intercept / threshold / scale factor
        double b = 0.0;  // eta
        std::size_t axis = 0;
        Vec slope;
        std::shared_ptr<const Node> left, right;

        static std::shared_ptr<Node> make(Kind k, double a = 0.0, double b = 0.0) {
            auto n = std::make_shared<Node>();
            n->kind = k;
            n->a = a;
            n->b = b;
            return n;
        }

        double eval(const Vec& x) const {
            switch (kind) {
                case Kind::constant: return a;
                case Kind::affine: {
                    double v = a;
                    for (std::size_t i = 0; i < slope.size(); ++i) v += slope[i] * x[i];
                    return v;
                }
                case Kind::ramp: return std::clamp((a - x[axis]) / b + 1.0, 0.0, 1.0);
                case Kind::sigmoid: return 1.0 / (1.0 + std::exp(-(a - x[axis]) / b));
                case Kind::product: return left->eval(x) * right->eval(x);
                case Kind::sum: return left->eval(x) + right->eval(x);
                case Kind::scale: return a * left->eval(x);
            }
            return 0.0;
        }
    };

    FunctionHandle(std::shared_ptr<const Node> node, double sup, double lip, std::string desc)
        : node_(std::move(node)), sup_(sup), lip_(lip), desc_(std::move(desc)) {}

    static std::string trim(double v) {
        std::string s = std::to_string(v);
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    std::shared_ptr<const Node> node_;
    double sup_;
    double lip_;
    std::string desc_;
};

}  // namespace ifslab
