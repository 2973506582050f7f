#pragma once

#include <cmath>
#include <utility>

#include "bomm/core.hpp"

namespace bomm {

/// One-parameter Box-Cox link. `inverse` maps positive data to the latent
/// scale, `forward` maps latent values back to data.
///
/// The increasing form (z^lambda - 1) / lambda is used for every lambda != 0,
/// including lambda < 0; it differs from a sign-flipped variant only by an
/// affine map of the latent scale. For |lambda| < 1e-8 the log branch is used.
class BoxCox {
public:
    static constexpr double kLogThreshold = 1e-8;
    static constexpr double kMinLambda = -2.0;
    static constexpr double kMaxLambda = 2.0;

    explicit BoxCox(double lambda = 1.0);

    double lambda() const { return lambda_; }

    /// Data -> latent. Throws RangeError for z <= 0.
    double inverse(double z) const;
    VectorXd inverse(const VectorXd& z) const;

    /// Latent -> data. Throws RangeError (naming the admissible interval)
    /// when y lies outside the image of `inverse`.
    double forward(double y) const;

    /// d inverse / dz = z^(lambda - 1).
    double d_inverse_dz(double z) const;

    /// sum_i log(d inverse / dz)(z_i) = (lambda - 1) sum_i log z_i.
    double log_jacobian(const VectorXd& z) const;

    /// Admissible latent interval (lo, hi); infinite ends when unbounded.
    std::pair<double, double> latent_range() const;

private:
    bool log_branch() const { return std::abs(lambda_) < kLogThreshold; }
    double lambda_;
};

}  // namespace bomm
