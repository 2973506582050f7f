#pragma once

// Derivative-free simplex minimiser used for hyperparameter fitting.
// Coefficients adapt to the dimension (Gao & Han), which behaves better than
// the classic (1, 2, 0.5, 0.5) set beyond a handful of parameters.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace bomm::detail {

struct SimplexResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
};

template <class F>
SimplexResult nelder_mead(F&& f, const Eigen::VectorXd& x0, double fx0, double step, std::size_t max_evals,
                          double ftol = 1e-8) {
    const auto k = x0.size();
    SimplexResult res{x0, fx0, 0};
    if (k == 0 || max_evals == 0) return res;

    const double dim = static_cast<double>(k);
    const double alpha = 1.0;
    const double beta = 1.0 + 2.0 / dim;
    const double gamma = 0.75 - 1.0 / (2.0 * dim);
    const double shrink = 1.0 - 1.0 / dim;

    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(k + 1), x0);
    std::vector<double> vals(static_cast<std::size_t>(k + 1), fx0);
    std::size_t evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    for (Eigen::Index i = 0; i < k; ++i) {
        auto& p = pts[static_cast<std::size_t>(i + 1)];
        p[i] += step;
        vals[static_cast<std::size_t>(i + 1)] = eval(p);
    }

    std::vector<std::size_t> order(pts.size());
    Eigen::VectorXd centroid(k), xr(k), xe(k), xc(k);
    while (evals < max_evals) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
        const double fb = vals[best], fw = vals[worst];
        if (std::isfinite(fw) && std::abs(fw - fb) <= ftol * (std::abs(fb) + ftol)) break;

        centroid.setZero();
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (i != worst) centroid += pts[i];
        centroid /= dim;

        xr = centroid + alpha * (centroid - pts[worst]);
        const double fr = eval(xr);
        if (fr < fb) {
            xe = centroid + beta * (xr - centroid);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < fw;
        xc = outside ? Eigen::VectorXd(centroid + gamma * (xr - centroid))
                     : Eigen::VectorXd(centroid - gamma * (centroid - pts[worst]));
        const double fc = eval(xc);
        if (fc < (outside ? fr : fw)) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best) continue;
            pts[i] = pts[best] + shrink * (pts[i] - pts[best]);
            vals[i] = eval(pts[i]);
        }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    const auto idx = static_cast<std::size_t>(it - vals.begin());
    if (vals[idx] < res.value) {
        res.x = pts[idx];
        res.value = vals[idx];
    }
    res.evaluations = evals;
    return res;
}

}  // namespace bomm::detail
