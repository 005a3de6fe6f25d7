#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "ifslab/geometry.hpp"

namespace ifslab {

// Operator norm of a d x d matrix (row-major) induced by the given metric.
// Euclidean: spectral norm; sup: max absolute row sum; manhattan: max
// absolute column sum. All three are tight bounds on d(Ax, Ay) / d(x, y).
inline double induced_operator_norm(const std::vector<double>& matrix, std::size_t d, Metric m) {
    if (m == Metric::euclidean) {
        Eigen::MatrixXd a(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = matrix[i * d + j];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
        return svd.singularValues()(0);
    }
    double best = 0.0;
    if (m == Metric::sup) {
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += std::fabs(matrix[i * d + j]);
            best = std::max(best, s);
        }
    } else {
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) s += std::fabs(matrix[i * d + j]);
            best = std::max(best, s);
        }
    }
    return best;
}

struct SymmetricFactor {
    // factor such that factor * z (z standard normal) has the requested
    // covariance after eigenvalue clipping
    Eigen::MatrixXd factor;
    double clipped_mass = 0.0;  // sum of |negative eigenvalues| set to zero
    double trace = 0.0;
    double min_eigenvalue = 0.0;
};

// Symmetric square-root factorization with negative-eigenvalue clipping.
inline SymmetricFactor symmetric_sqrt(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const auto& vals = es.eigenvalues();
    SymmetricFactor out;
    out.trace = cov.trace();
    out.min_eigenvalue = vals(0);
    Eigen::VectorXd clipped(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        if (vals(i) < 0.0) {
            out.clipped_mass += -vals(i);
            clipped(i) = 0.0;
        } else {
            clipped(i) = std::sqrt(vals(i));
        }
    }
    out.factor = es.eigenvectors() * clipped.asDiagonal();
    return out;
}

}  // namespace ifslab
