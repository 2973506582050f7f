#pragma once

// Squared-exponential kernel algebra for the transformed approximate additive
// GP: the weighted additive correlation r_A, the product correlation r_Z and
// their (1 - eta, eta) mixture.

#include <utility>

#include "bomm/core.hpp"

namespace bomm {

struct KernelParams {
    /// Additive weights, non-negative and summing to one.
    VectorXd w;
    /// Additive length-scales, one per dimension.
    VectorXd theta_A;
    /// Product length-scales, one per dimension.
    VectorXd theta_Z;

    std::size_t dims() const { return static_cast<std::size_t>(w.size()); }
    /// Uniform weights with the given length-scales.
    static KernelParams uniform(std::size_t d, double theta_A = 0.5, double theta_Z = 0.5);
    /// Throws ParameterError when an invariant fails.
    void validate() const;
};

/// sum_l w_l exp(-((x_l - y_l) / theta_A_l)^2).
double r_additive(const VectorXd& x, const VectorXd& y, const KernelParams& p);

/// exp(-sum_l ((x_l - y_l) / theta_Z_l)^2).
double r_product(const VectorXd& x, const VectorXd& y, const KernelParams& p);

MatrixXd gram_additive(const MatrixXd& X, const KernelParams& p);
MatrixXd gram_product(const MatrixXd& X, const KernelParams& p);

/// (1 - eta) R_A + eta R_Z + nugget * I.
MatrixXd gram_mixture(const MatrixXd& X, double eta, const KernelParams& p, double nugget);

/// Kernel evaluations of x_new against every design row: (r_A, r_Z).
std::pair<VectorXd, VectorXd> cross_vectors(const MatrixXd& X, const VectorXd& x_new, const KernelParams& p);

constexpr double kBaseNugget = 1e-8;
constexpr double kMaxNugget = 1e-4;

struct GramFactor {
    Eigen::LLT<MatrixXd> llt;
    /// Nugget actually added to the diagonal.
    double nugget = 0.0;
    int escalations = 0;

    double log_det() const;
    VectorXd solve(const VectorXd& b) const { return llt.solve(b); }
};

/// Cholesky of `gram + nugget * I` (gram given without nugget), starting at
/// base_nugget and escalating x10 up to kMaxNugget. Throws ConditioningError
/// when every attempt fails. Escalations emit a warning.
GramFactor factorize_gram(const MatrixXd& gram, double base_nugget = kBaseNugget, bool quiet = false);

}  // namespace bomm
