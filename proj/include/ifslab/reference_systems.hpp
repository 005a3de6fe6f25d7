#pragma once

#include <vector>

#include "ifslab/system.hpp"

namespace ifslab {

// The two reference systems used throughout the tests, plus variants.
//
// HALF:  T0 x = x/2, T1 x = x/2 + 1/2, p = (1/2, 1/2) on [0,1].
//        Its invariant measure is exactly Uniform[0,1].
// TILT:  same maps with place-dependent field p0(x) = (2+x)/4, p1(x) = (2-x)/4.

inline IfsSystem make_half() {
    IfsSystem s;
    s.dimension = 1;
    s.metric = Metric::euclidean;
    s.name = "half";
    s.maps = {AffineMap{{0.5}, {0.0}, 0.0}, AffineMap{{0.5}, {0.5}, 0.0}};
    s.field.exprs = {ProbExpr{ProbExpr::Constant{0.5}}, ProbExpr{ProbExpr::Constant{0.5}}};
    s.field.normalization = ProbabilityField::Normalization::exact;
    s.base_point = {0.0};
    s.domain_box = Box{{0.0}, {1.0}};
    finalize(s);
    return s;
}

inline IfsSystem make_tilt() {
    IfsSystem s;
    s.dimension = 1;
    s.metric = Metric::euclidean;
    s.name = "tilt";
    s.maps = {AffineMap{{0.5}, {0.0}, 0.0}, AffineMap{{0.5}, {0.5}, 0.0}};
    // (2+x)/4 ranges over [0.5, 0.75] and (2-x)/4 over [0.25, 0.5] on the box;
    // the clip bounds record those ranges and never bite inside it.
    s.field.exprs = {ProbExpr{ProbExpr::ClippedAffine{{0.25}, 0.5, 0.5, 0.75}},
                     ProbExpr{ProbExpr::ClippedAffine{{-0.25}, 0.5, 0.25, 0.5}}};
    s.field.normalization = ProbabilityField::Normalization::exact;
    s.base_point = {0.0};
    s.domain_box = Box{{0.0}, {1.0}};
    finalize(s);
    return s;
}

// HALF with the second map replaced by the expanding x -> 2x; fails the
// contraction gate with average ratio 1.25.
inline IfsSystem make_half_expanding() {
    IfsSystem s = make_half();
    s.name = "half-expanding";
    s.maps[1] = AffineMap{{2.0}, {0.0}, 0.0};
    finalize(s);
    return s;
}

// Single contracting map T0 x = x/2; the chain collapses to the fixed point 0.
inline IfsSystem make_single_halving() {
    IfsSystem s;
    s.dimension = 1;
    s.metric = Metric::euclidean;
    s.name = "single-halving";
    s.maps = {AffineMap{{0.5}, {0.0}, 0.0}};
    s.field.exprs = {ProbExpr{ProbExpr::Constant{1.0}}};
    s.field.normalization = ProbabilityField::Normalization::exact;
    s.base_point = {0.0};
    s.domain_box = Box{{0.0}, {1.0}};
    finalize(s);
    return s;
}

// Constant-map injection: every T_i is the constant map x -> c_i, chosen with
// equal probability, so the chain is i.i.d. from the first step on. Used as a
// classical-statistics oracle for the dependent-data estimators.
inline IfsSystem make_constant_injection(const std::vector<double>& values) {
    IfsSystem s;
    s.dimension = 1;
    s.metric = Metric::euclidean;
    s.name = "constant-injection";
    double p = 1.0 / static_cast<double>(values.size());
    for (double c : values) {
        s.maps.push_back(AffineMap{{0.0}, {c}, 0.0});
        s.field.exprs.push_back(ProbExpr{ProbExpr::Constant{p}});
    }
    s.field.normalization = ProbabilityField::Normalization::exact;
    s.base_point = {0.0};
    s.domain_box = Box{{0.0}, {1.0}};
    finalize(s);
    return s;
}

}  // namespace ifslab
