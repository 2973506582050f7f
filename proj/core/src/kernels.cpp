#include "bomm/kernels.hpp"

#include <cmath>
#include <sstream>

namespace bomm {

KernelParams KernelParams::uniform(std::size_t d, double theta_A, double theta_Z) {
    KernelParams p;
    const auto n = static_cast<Eigen::Index>(d);
    p.w = VectorXd::Constant(n, 1.0 / static_cast<double>(d));
    p.theta_A = VectorXd::Constant(n, theta_A);
    p.theta_Z = VectorXd::Constant(n, theta_Z);
    return p;
}

void KernelParams::validate() const {
    if (w.size() == 0) throw ParameterError("kernel parameters need at least one dimension");
    if (theta_A.size() != w.size() || theta_Z.size() != w.size())
        throw ParameterError("kernel parameter vectors differ in length");
    if ((w.array() < 0.0).any()) throw ParameterError("additive weights must be non-negative");
    if (std::abs(w.sum() - 1.0) > 1e-10) throw ParameterError("additive weights must sum to one");
    if (!(theta_A.array() > 0.0).all() || !(theta_Z.array() > 0.0).all() || !theta_A.allFinite() ||
        !theta_Z.allFinite())
        throw ParameterError("length-scales must be positive and finite");
}

double r_additive(const VectorXd& x, const VectorXd& y, const KernelParams& p) {
    double s = 0.0;
    for (Eigen::Index l = 0; l < x.size(); ++l) {
        const double t = (x[l] - y[l]) / p.theta_A[l];
        s += p.w[l] * std::exp(-t * t);
    }
    return s;
}

double r_product(const VectorXd& x, const VectorXd& y, const KernelParams& p) {
    double s = 0.0;
    for (Eigen::Index l = 0; l < x.size(); ++l) {
        const double t = (x[l] - y[l]) / p.theta_Z[l];
        s += t * t;
    }
    return std::exp(-s);
}

MatrixXd gram_additive(const MatrixXd& X, const KernelParams& p) {
    const auto n = X.rows();
    MatrixXd R(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        R(i, i) = p.w.sum();
        for (Eigen::Index j = i + 1; j < n; ++j)
            R(i, j) = R(j, i) = r_additive(X.row(i).transpose(), X.row(j).transpose(), p);
    }
    return R;
}

MatrixXd gram_product(const MatrixXd& X, const KernelParams& p) {
    const auto n = X.rows();
    MatrixXd R(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        R(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j)
            R(i, j) = R(j, i) = r_product(X.row(i).transpose(), X.row(j).transpose(), p);
    }
    return R;
}

MatrixXd gram_mixture(const MatrixXd& X, double eta, const KernelParams& p, double nugget) {
    if (!(nugget >= 0.0)) throw ParameterError("nugget must be non-negative");
    if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("eta must lie in [0, 1]");
    MatrixXd M(X.rows(), X.rows());
    M.setZero();
    if (eta < 1.0) M += (1.0 - eta) * gram_additive(X, p);
    if (eta > 0.0) M += eta * gram_product(X, p);
    M.diagonal().array() += nugget;
    return M;
}

std::pair<VectorXd, VectorXd> cross_vectors(const MatrixXd& X, const VectorXd& x_new, const KernelParams& p) {
    VectorXd ra(X.rows()), rz(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const VectorXd xi = X.row(i).transpose();
        ra[i] = r_additive(xi, x_new, p);
        rz[i] = r_product(xi, x_new, p);
    }
    return {ra, rz};
}

double GramFactor::log_det() const {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

GramFactor factorize_gram(const MatrixXd& gram, double base_nugget, bool quiet) {
    GramFactor f;
    double nugget = base_nugget;
    MatrixXd work(gram.rows(), gram.cols());
    for (;;) {
        work = gram;
        work.diagonal().array() += nugget;
        f.llt.compute(work);
        if (f.llt.info() == Eigen::Success && f.llt.matrixLLT().diagonal().minCoeff() > 0.0) {
            f.nugget = nugget;
            if (f.escalations > 0 && !quiet) {
                std::ostringstream os;
                os << "Gram nugget escalated to " << nugget;
                warn(os.str());
            }
            return f;
        }
        if (nugget >= kMaxNugget * (1.0 - 1e-12)) break;
        nugget = std::min(nugget * 10.0, kMaxNugget);
        if (nugget == 0.0) nugget = kBaseNugget;
        ++f.escalations;
    }
    std::ostringstream os;
    os << "Gram matrix not positive definite even with nugget " << kMaxNugget;
    throw ConditioningError(os.str());
}

}  // namespace bomm
