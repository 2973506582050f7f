#pragma once

// Brute-force reference computations for marginal posteriors: tensor
// Gauss-Legendre quadrature over the marginalised coordinates, with the GP
// rebuilt from scratch (own kernel code, dense inverse).

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "bomm/taag.hpp"

namespace bomm::testing {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

template <unsigned N>
Rule gl_rule_fixed() {
    using G = boost::math::quadrature::gauss<double, N>;
    Rule r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double wk = 0.5 * w[k];
        if (a[k] == 0.0) {
            r.nodes.push_back(0.5);
            r.weights.push_back(wk);
            continue;
        }
        r.nodes.push_back(0.5 * (1.0 - a[k]));
        r.weights.push_back(wk);
        r.nodes.push_back(0.5 * (1.0 + a[k]));
        r.weights.push_back(wk);
    }
    return r;
}

/// Gauss-Legendre rule on [0, 1].
inline Rule gl_rule(unsigned n) {
    switch (n) {
        case 8: return gl_rule_fixed<8>();
        case 16: return gl_rule_fixed<16>();
        case 24: return gl_rule_fixed<24>();
        case 32: return gl_rule_fixed<32>();
        case 64: return gl_rule_fixed<64>();
        default: throw std::invalid_argument("unsupported rule size");
    }
}

/// Dense reference GP on the unit cube.
struct DenseGp {
    Eigen::MatrixXd U;     // unit design
    Eigen::MatrixXd Minv;  // dense inverse of the nuggeted mixture Gram
    Eigen::VectorXd q;
    TaagParams p;

    double r_add(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        double s = 0.0;
        for (Eigen::Index j = 0; j < a.size(); ++j) {
            const double t = (a[j] - b[j]) / p.kernel.theta_A[j];
            s += p.kernel.w[j] * std::exp(-t * t);
        }
        return s;
    }
    double r_prod(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        double s = 0.0;
        for (Eigen::Index j = 0; j < a.size(); ++j) {
            const double t = (a[j] - b[j]) / p.kernel.theta_Z[j];
            s += t * t;
        }
        return std::exp(-s);
    }
    double r(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        return (1.0 - p.eta) * r_add(a, b) + p.eta * r_prod(a, b);
    }
};

inline DenseGp dense_gp(const FittedTaag& model) {
    DenseGp g;
    g.p = model.params();
    const auto& dom = model.domain();
    const Eigen::MatrixXd& X = model.data().design().points();
    const auto n = X.rows(), d = X.cols();
    g.U.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            g.U(i, j) = (X(i, j) - dom.lower(static_cast<std::size_t>(j))) / dom.width(static_cast<std::size_t>(j));
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) M(i, k) = g.r(g.U.row(i).transpose(), g.U.row(k).transpose());
    M.diagonal().array() += model.nugget();
    g.Minv = M.fullPivLu().inverse();
    // Latent values recomputed from the raw responses.
    const double lam = g.p.lambda;
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double y = model.data().responses()[i] + model.data().shift();
        z[i] = std::abs(lam) < 1e-8 ? std::log(y) : (std::pow(y, lam) - 1.0) / lam;
    }
    g.q = g.Minv * (z.array() - g.p.mu).matrix();
    return g;
}

/// Odometer over the (d-1)-fold tensor grid, skipping coordinate l.
class TensorGrid {
public:
    TensorGrid(std::size_t d, std::size_t l, const Rule& rule) : d_(d), l_(l), rule_(rule), idx_(d, 0) {}

    template <class F>
    void for_each(F&& f) const {
        std::vector<std::size_t> idx(d_, 0);
        const std::size_t m = rule_.nodes.size();
        for (;;) {
            double w = 1.0;
            for (std::size_t j = 0; j < d_; ++j)
                if (j != l_) w *= rule_.weights[idx[j]];
            f(idx, w);
            std::size_t j = 0;
            for (; j < d_; ++j) {
                if (j == l_) continue;
                if (++idx[j] < m) break;
                idx[j] = 0;
            }
            if (j == d_) return;
        }
    }

private:
    std::size_t d_, l_;
    const Rule& rule_;
    std::vector<std::size_t> idx_;
};

/// Unnormalised marginal mean of the latent posterior at x_l (original
/// units), by tensor quadrature over the other coordinates.
inline double quadrature_marginal_mean(const FittedTaag& model, std::size_t l, double x_l, unsigned nodes = 64) {
    const DenseGp g = dense_gp(model);
    const auto& dom = model.domain();
    const std::size_t d = dom.dims();
    const auto n = g.U.rows();
    const Rule rule = gl_rule(nodes);
    const double t = (x_l - dom.lower(l)) / dom.width(l);
    // Per-dimension kernel tables: node k against design point i.
    std::vector<Eigen::MatrixXd> A(d), Z(d);
    for (std::size_t j = 0; j < d; ++j) {
        A[j].resize(static_cast<Eigen::Index>(rule.nodes.size()), n);
        Z[j].resize(static_cast<Eigen::Index>(rule.nodes.size()), n);
        for (std::size_t k = 0; k < rule.nodes.size(); ++k)
            for (Eigen::Index i = 0; i < n; ++i) {
                const double s = j == l ? t : rule.nodes[k];
                const double a = (s - g.U(i, static_cast<Eigen::Index>(j))) / g.p.kernel.theta_A[static_cast<Eigen::Index>(j)];
                const double z = (s - g.U(i, static_cast<Eigen::Index>(j))) / g.p.kernel.theta_Z[static_cast<Eigen::Index>(j)];
                A[j](static_cast<Eigen::Index>(k), i) = std::exp(-a * a);
                Z[j](static_cast<Eigen::Index>(k), i) = std::exp(-z * z);
            }
    }
    double total = 0.0;
    TensorGrid(d, l, rule).for_each([&](const std::vector<std::size_t>& idx, double w) {
        double h = g.p.mu;
        for (Eigen::Index i = 0; i < n; ++i) {
            double add = 0.0, prod = 1.0;
            for (std::size_t j = 0; j < d; ++j) {
                const auto k = static_cast<Eigen::Index>(j == l ? 0 : idx[j]);
                add += g.p.kernel.w[static_cast<Eigen::Index>(j)] * A[j](k, i);
                prod *= Z[j](k, i);
            }
            h += g.q[i] * ((1.0 - g.p.eta) * add + g.p.eta * prod);
        }
        total += w * h;
    });
    return dom.volume_excluding(l) * total;
}

/// Marginal posterior variance at x_l by a double tensor quadrature sum.
inline double quadrature_marginal_variance(const FittedTaag& model, std::size_t l, double x_l, unsigned nodes) {
    const DenseGp g = dense_gp(model);
    const auto& dom = model.domain();
    const std::size_t d = dom.dims();
    const auto n = g.U.rows();
    const Rule rule = gl_rule(nodes);
    const double t = (x_l - dom.lower(l)) / dom.width(l);
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> wts;
    TensorGrid(d, l, rule).for_each([&](const std::vector<std::size_t>& idx, double w) {
        Eigen::VectorXd u(static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < d; ++j) u[static_cast<Eigen::Index>(j)] = j == l ? t : rule.nodes[idx[j]];
        pts.push_back(u);
        wts.push_back(w);
    });
    double prior = 0.0;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (std::size_t a = 0; a < pts.size(); ++a) {
        for (std::size_t b = 0; b < pts.size(); ++b) prior += wts[a] * wts[b] * g.r(pts[a], pts[b]);
        for (Eigen::Index i = 0; i < n; ++i) v[i] += wts[a] * g.r(pts[a], g.U.row(i).transpose());
    }
    const double reduction = n > 0 ? v.dot(g.Minv * v) : 0.0;
    const double J = dom.volume_excluding(l);
    return J * J * g.p.sigma2 * (prior - reduction);
}

}  // namespace bomm::testing
