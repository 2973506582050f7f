#include "bomm/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/distributions/normal.hpp>

#include "bomm/io.hpp"

namespace bomm {

namespace {

const double kSqrtPi = std::sqrt(std::acos(-1.0));

/// int_0^1 exp(-((t - c) / theta)^2) dt.
double gauss_integral(double c, double theta) {
    return 0.5 * kSqrtPi * theta * (std::erf((1.0 - c) / theta) + std::erf(c / theta));
}

/// int_0^1 int_0^1 exp(-((s - t) / theta)^2) ds dt.
double gauss_double_integral(double theta) {
    const double r = 1.0 / theta;
    return kSqrtPi * theta * std::erf(r) - theta * theta * (-std::expm1(-r * r));
}

double bump(double t, double c, double theta) {
    const double s = (t - c) / theta;
    return std::exp(-s * s);
}

}  // namespace

TailParams TailParams::make(double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0) throw ParameterError("tail alpha must lie in (0, 1]");
    if (alpha < kMinTailAlpha) throw ParameterError("tail alpha below the 1e-3 guard");
    TailParams p;
    p.alpha = alpha;
    if (alpha == 1.0) {
        p.z_alpha = std::numeric_limits<double>::infinity();
        p.phi_z = 0.0;
        return p;
    }
    const boost::math::normal_distribution<double> std_normal;
    p.z_alpha = boost::math::quantile(std_normal, alpha);
    p.phi_z = boost::math::pdf(std_normal, p.z_alpha);
    return p;
}

MarginalEvaluator::MarginalEvaluator(const FittedTaag& model, std::size_t l) : model_(&model), l_(l) {
    const auto& dom = model.domain();
    if (l >= dom.dims()) throw ParameterError("marginal dimension out of range");
    const auto& p = model.params();
    const auto& k = p.kernel;
    const auto d = static_cast<Eigen::Index>(dom.dims());
    const auto li = static_cast<Eigen::Index>(l);
    jac_ = dom.volume_excluding(l);
    lower_ = dom.lower(l);
    width_ = dom.width(l);
    eta_ = p.eta;
    one_minus_eta_ = 1.0 - p.eta;
    w_l_ = k.w[li];
    theta_A_l_ = k.theta_A[li];
    theta_Z_l_ = k.theta_Z[li];

    const MatrixXd& X = model.design_unit();
    const auto n = X.rows();
    centre_ = n > 0 ? VectorXd(X.col(li)) : VectorXd(0);
    add_rest_ = VectorXd::Zero(n);
    prod_rest_ = VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (j == li) continue;
            add_rest_[i] += k.w[j] * gauss_integral(X(i, j), k.theta_A[j]);
            prod_rest_[i] *= gauss_integral(X(i, j), k.theta_Z[j]);
        }
    }
    const VectorXd& q = model.q();
    constant_ = jac_ * (p.mu + (n > 0 ? one_minus_eta_ * add_rest_.dot(q) : 0.0));

    double add_prior = w_l_;
    double prod_prior = 1.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (j == li) continue;
        add_prior += k.w[j] * gauss_double_integral(k.theta_A[j]);
        prod_prior *= gauss_double_integral(k.theta_Z[j]);
    }
    prior_ = one_minus_eta_ * add_prior + eta_ * prod_prior;
}

double MarginalEvaluator::unit(double x_l) const { return (x_l - lower_) / width_; }

double MarginalEvaluator::objective(double x_l) const {
    const double t = unit(x_l);
    const VectorXd& q = model_->q();
    double add = 0.0, prod = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (one_minus_eta_ > 0.0) add += q[i] * bump(t, centre_[i], theta_A_l_);
        if (eta_ > 0.0) prod += q[i] * prod_rest_[i] * bump(t, centre_[i], theta_Z_l_);
    }
    return jac_ * (one_minus_eta_ * w_l_ * add + eta_ * prod);
}

double MarginalEvaluator::mean(double x_l) const { return objective(x_l) + constant_; }

VectorXd MarginalEvaluator::integrated_cross(double t) const {
    VectorXd v(centre_.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double a = 0.0, z = 0.0;
        if (one_minus_eta_ > 0.0) a = w_l_ * bump(t, centre_[i], theta_A_l_) + add_rest_[i];
        if (eta_ > 0.0) z = bump(t, centre_[i], theta_Z_l_) * prod_rest_[i];
        v[i] = one_minus_eta_ * a + eta_ * z;
    }
    return v;
}

double MarginalEvaluator::variance(double x_l) const {
    const double sigma2 = model_->params().sigma2;
    double reduction = 0.0;
    if (centre_.size() > 0) {
        const VectorXd v = integrated_cross(unit(x_l));
        reduction = model_->factor().llt.matrixL().solve(v).squaredNorm();
    }
    return std::max(0.0, jac_ * jac_ * sigma2 * (prior_ - reduction));
}

double MarginalEvaluator::tail(double x_l, const TailParams& tail) const {
    return objective(x_l) - std::sqrt(variance(x_l)) * tail.correction();
}

double marginal_mean_objective(const FittedTaag& model, std::size_t l, double x_l) {
    return MarginalEvaluator(model, l).objective(x_l);
}

double marginal_mean(const FittedTaag& model, std::size_t l, double x_l) {
    return MarginalEvaluator(model, l).mean(x_l);
}

double marginal_variance(const FittedTaag& model, std::size_t l, double x_l) {
    return MarginalEvaluator(model, l).variance(x_l);
}

double tail_mean(const FittedTaag& model, std::size_t l, double x_l, double alpha) {
    return MarginalEvaluator(model, l).tail(x_l, TailParams::make(alpha));
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t size) {
    if (size < 2) throw ParameterError("grid needs at least two points");
    std::vector<double> g(size);
    const double denom = static_cast<double>(size - 1);
    for (std::size_t k = 0; k < size; ++k) g[k] = lo + (hi - lo) * (static_cast<double>(k) / denom);
    g.back() = hi;
    return g;
}

std::size_t argmin_index(const std::vector<double>& values) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k)
        if (values[k] < values[best] || (std::isnan(values[best]) && !std::isnan(values[k]))) best = k;
    return best;
}

double argmin_1d(const std::function<double(double)>& objective, double lo, double hi, std::size_t grid_size) {
    const auto grid = uniform_grid(lo, hi, grid_size);
    std::vector<double> vals(grid.size());
    std::transform(grid.begin(), grid.end(), vals.begin(), objective);
    return grid[argmin_index(vals)];
}

std::vector<double> MarginalPosterior::tail(const TailParams& tail) const {
    std::vector<double> out(objective.size());
    const double c = tail.correction();
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = objective[k] - (var.empty() ? 0.0 : std::sqrt(var[k])) * c;
    return out;
}

MarginalPosterior marginal_posterior(const FittedTaag& model, std::size_t l, std::size_t grid_size,
                                     bool with_variance) {
    const MarginalEvaluator ev(model, l);
    MarginalPosterior mp;
    mp.dim_index = l;
    mp.grid = uniform_grid(model.domain().lower(l), model.domain().upper(l), grid_size);
    mp.constant = ev.constant();
    mp.objective.resize(mp.grid.size());
    for (std::size_t k = 0; k < mp.grid.size(); ++k) mp.objective[k] = ev.objective(mp.grid[k]);
    if (with_variance) {
        mp.var.resize(mp.grid.size());
        for (std::size_t k = 0; k < mp.grid.size(); ++k) mp.var[k] = ev.variance(mp.grid[k]);
    }
    return mp;
}

std::vector<MarginalPosterior> marginal_posteriors(const FittedTaag& model, std::size_t grid_size,
                                                   bool with_variance) {
    std::vector<MarginalPosterior> out;
    out.reserve(model.dims());
    for (std::size_t l = 0; l < model.dims(); ++l) out.push_back(marginal_posterior(model, l, grid_size, with_variance));
    return out;
}

void write_marginal_trace(std::ostream& os, const std::vector<MarginalPosterior>& profiles, double alpha) {
    const TailParams tp = TailParams::make(alpha);
    os << "l,x,mean,var,tail_mean\n";
    for (const auto& mp : profiles) {
        const auto tail = mp.tail(tp);
        for (std::size_t k = 0; k < mp.grid.size(); ++k) {
            os << mp.dim_index + 1 << ',' << format_double(mp.grid[k]) << ','
               << format_double(mp.objective[k] + mp.constant) << ','
               << (mp.var.empty() ? std::string("") : format_double(mp.var[k])) << ',' << format_double(tail[k])
               << '\n';
        }
    }
}

}  // namespace bomm
