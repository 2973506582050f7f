#pragma once

// Random instances for property tests.

#include <cmath>
#include <functional>

#include "bomm/design.hpp"
#include "bomm/taag.hpp"

namespace bomm::testing {

inline double log_uniform(Rng& rng, double lo, double hi) {
    return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

inline Domain random_domain(Rng& rng, std::size_t d) {
    std::vector<double> lo(d), hi(d);
    for (std::size_t l = 0; l < d; ++l) {
        lo[l] = rng.uniform(-3.0, 3.0);
        hi[l] = lo[l] + rng.uniform(0.5, 4.0);
    }
    return Domain(lo, hi);
}

/// Random LHD scaled to the domain, with responses from `f` (or positive
/// noise when f is empty).
inline Dataset random_dataset(Rng& rng, const Domain& dom, std::size_t n,
                              const std::function<double(const VectorXd&)>& f = {}) {
    const MatrixXd X = unscale_rows_from_unit(random_lhd(n, dom.dims(), rng), dom);
    VectorXd y(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = f ? f(X.row(i).transpose()) : rng.uniform(0.5, 5.0);
    return Dataset(DesignMatrix(X), y);
}

struct ParamRanges {
    double theta_lo = 0.15;
    double theta_hi = 2.0;
    double lambda_lo = -1.0;
    double lambda_hi = 1.5;
};

inline TaagParams random_params(Rng& rng, std::size_t d, double eta, const ParamRanges& r = {}) {
    TaagParams p;
    p.lambda = rng.uniform(r.lambda_lo, r.lambda_hi);
    p.mu = rng.uniform(-1.0, 1.0);
    p.sigma2 = rng.uniform(0.5, 2.0);
    p.eta = eta;
    const auto n = static_cast<Eigen::Index>(d);
    p.kernel.w.resize(n);
    p.kernel.theta_A.resize(n);
    p.kernel.theta_Z.resize(n);
    for (Eigen::Index l = 0; l < n; ++l) {
        p.kernel.w[l] = rng.uniform(0.2, 1.0);
        p.kernel.theta_A[l] = log_uniform(rng, r.theta_lo, r.theta_hi);
        p.kernel.theta_Z[l] = log_uniform(rng, r.theta_lo, r.theta_hi);
    }
    p.kernel.w /= p.kernel.w.sum();
    return p;
}

struct Instance {
    Domain dom;
    FittedTaag model;
};

inline Instance random_instance(Rng& rng, std::size_t n, std::size_t d, double eta, const ParamRanges& r = {}) {
    Domain dom = random_domain(rng, d);
    Dataset data = random_dataset(rng, dom, n);
    return {dom, condition(data, dom, random_params(rng, d, eta, r))};
}

}  // namespace bomm::testing
