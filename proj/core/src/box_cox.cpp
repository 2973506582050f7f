#include "bomm/box_cox.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bomm {

namespace {

void require_positive(double z) {
    if (!(z > 0.0)) {
        std::ostringstream os;
        os << "Box-Cox input must be strictly positive, got " << z;
        throw RangeError(os.str());
    }
}

}  // namespace

BoxCox::BoxCox(double lambda) : lambda_(lambda) {
    if (!std::isfinite(lambda)) throw ParameterError("Box-Cox lambda must be finite");
}

double BoxCox::inverse(double z) const {
    require_positive(z);
    if (log_branch()) return std::log(z);
    // expm1 keeps accuracy for small lambda * log z.
    return std::expm1(lambda_ * std::log(z)) / lambda_;
}

VectorXd BoxCox::inverse(const VectorXd& z) const {
    VectorXd out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = inverse(z[i]);
    return out;
}

std::pair<double, double> BoxCox::latent_range() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (log_branch()) return {-inf, inf};
    if (lambda_ > 0.0) return {-1.0 / lambda_, inf};
    return {-inf, -1.0 / lambda_};
}

double BoxCox::forward(double y) const {
    if (!std::isfinite(y)) throw RangeError("Box-Cox forward needs a finite latent value");
    if (log_branch()) return std::exp(y);
    const auto [lo, hi] = latent_range();
    if (!(y > lo && y < hi)) {
        std::ostringstream os;
        os << "latent value " << y << " outside Box-Cox range (" << lo << ", " << hi << ") for lambda " << lambda_;
        throw RangeError(os.str());
    }
    return std::exp(std::log1p(lambda_ * y) / lambda_);
}

double BoxCox::d_inverse_dz(double z) const {
    require_positive(z);
    return std::exp((lambda_ - 1.0) * std::log(z));
}

double BoxCox::log_jacobian(const VectorXd& z) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        require_positive(z[i]);
        s += std::log(z[i]);
    }
    return (lambda_ - 1.0) * s;
}

}  // namespace bomm
