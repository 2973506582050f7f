#include "bomm/taag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "nelder_mead.hpp"

namespace bomm {

double TaagParams::delta() const {
    if (eta >= 1.0) return std::numeric_limits<double>::infinity();
    return eta / (1.0 - eta);
}

void TaagParams::validate(bool allow_eta_one) const {
    if (!std::isfinite(lambda)) throw ParameterError("lambda must be finite");
    if (!std::isfinite(mu)) throw ParameterError("mu must be finite");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ParameterError("sigma2 must be positive");
    if (!(eta >= 0.0) || eta > 1.0 || (eta == 1.0 && !allow_eta_one))
        throw ParameterError("eta must lie in [0, 1)");
    kernel.validate();
}

std::string to_string(SurrogateKind kind) {
    switch (kind) {
        case SurrogateKind::taag: return "taag";
        case SurrogateKind::tag: return "tag";
        case SurrogateKind::sqexp: return "sqexp";
    }
    return "unknown";
}

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kMaxEta = 1.0 - 1e-9;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

/// Profiled likelihood for given correlation matrices and latent values.
ProfiledLikelihood profile(const MatrixXd& RA, const MatrixXd& RZ, double eta, const VectorXd& z, double log_jac,
                           double base_nugget) {
    const auto n = z.size();
    MatrixXd M(n, n);
    if (eta <= 0.0)
        M = RA;
    else if (eta >= 1.0)
        M = RZ;
    else
        M = (1.0 - eta) * RA + eta * RZ;
    GramFactor f = factorize_gram(M, base_nugget, /*quiet=*/true);
    const VectorXd ones = VectorXd::Ones(n);
    const VectorXd m_one = f.solve(ones);
    const VectorXd m_z = f.solve(z);
    ProfiledLikelihood out;
    out.nugget = f.nugget;
    out.mu_hat = ones.dot(m_z) / ones.dot(m_one);
    const VectorXd r = z.array() - out.mu_hat;
    out.sigma2_hat = r.dot(f.solve(r)) / static_cast<double>(n);
    if (!(out.sigma2_hat > 0.0) || !std::isfinite(out.sigma2_hat)) {
        out.value = -std::numeric_limits<double>::infinity();
        return out;
    }
    const double nd = static_cast<double>(n);
    out.value = -0.5 * nd * (kLog2Pi + std::log(out.sigma2_hat) + 1.0) - 0.5 * f.log_det() + log_jac;
    return out;
}

struct Decoded {
    double lambda = 1.0;
    double eta = 0.0;
    VectorXd w, theta_A, theta_Z;
};

/// Maps the unconstrained search vector onto bounded parameters.
class Layout {
public:
    Layout(SurrogateKind kind, Eigen::Index d, const FitConfig& cfg)
        : kind_(kind), d_(d), log_lo_(std::log(cfg.theta_min)), log_hi_(std::log(cfg.theta_max)) {
        Eigen::Index off = 0;
        auto block = [&](Eigen::Index len) {
            blocks_.emplace_back(off, len);
            const auto start = off;
            off += len;
            return start;
        };
        switch (kind) {
            case SurrogateKind::taag:
                i_lambda_ = off;
                i_eta_ = off + 1;
                block(2);
                if (d > 1) i_w_ = block(d - 1);
                i_tA_ = block(d);
                i_tZ_ = block(d);
                break;
            case SurrogateKind::tag:
                i_lambda_ = block(1);
                if (d > 1) i_w_ = block(d - 1);
                i_tA_ = block(d);
                break;
            case SurrogateKind::sqexp:
                i_tZ_ = block(d);
                break;
        }
        size_ = off;
    }

    Eigen::Index size() const { return size_; }
    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& blocks() const { return blocks_; }

    Decoded decode(const VectorXd& u) const {
        Decoded p;
        p.lambda = i_lambda_ >= 0 ? BoxCox::kMinLambda + (BoxCox::kMaxLambda - BoxCox::kMinLambda) * logistic(u[i_lambda_])
                                  : 1.0;
        if (kind_ == SurrogateKind::taag)
            p.eta = std::min(logistic(u[i_eta_]), kMaxEta);
        else
            p.eta = kind_ == SurrogateKind::sqexp ? 1.0 : 0.0;
        p.w = VectorXd::Constant(d_, 1.0 / static_cast<double>(d_));
        if (i_w_ >= 0) {
            VectorXd logits(d_);
            logits[0] = 0.0;
            logits.tail(d_ - 1) = u.segment(i_w_, d_ - 1);
            const double m = logits.maxCoeff();
            p.w = (logits.array() - m).exp();
            p.w /= p.w.sum();
        }
        p.theta_A = VectorXd::Constant(d_, 1.0);
        p.theta_Z = VectorXd::Constant(d_, 1.0);
        if (i_tA_ >= 0) p.theta_A = theta(u.segment(i_tA_, d_));
        if (i_tZ_ >= 0) p.theta_Z = theta(u.segment(i_tZ_, d_));
        return p;
    }

    VectorXd encode(double lambda, double eta, const VectorXd& w, const VectorXd& tA, const VectorXd& tZ) const {
        VectorXd u = VectorXd::Zero(size_);
        if (i_lambda_ >= 0)
            u[i_lambda_] = logit((lambda - BoxCox::kMinLambda) / (BoxCox::kMaxLambda - BoxCox::kMinLambda));
        if (i_eta_ >= 0) u[i_eta_] = logit(eta);
        if (i_w_ >= 0)
            for (Eigen::Index l = 1; l < d_; ++l) u[i_w_ + l - 1] = std::log(w[l] / w[0]);
        if (i_tA_ >= 0) u.segment(i_tA_, d_) = untheta(tA);
        if (i_tZ_ >= 0) u.segment(i_tZ_, d_) = untheta(tZ);
        return u;
    }

private:
    VectorXd theta(const VectorXd& u) const {
        VectorXd t(u.size());
        for (Eigen::Index l = 0; l < u.size(); ++l) t[l] = std::exp(log_lo_ + (log_hi_ - log_lo_) * logistic(u[l]));
        return t;
    }
    VectorXd untheta(const VectorXd& t) const {
        VectorXd u(t.size());
        for (Eigen::Index l = 0; l < t.size(); ++l) {
            const double s = std::clamp((std::log(t[l]) - log_lo_) / (log_hi_ - log_lo_), 1e-6, 1.0 - 1e-6);
            u[l] = logit(s);
        }
        return u;
    }

    SurrogateKind kind_;
    Eigen::Index d_;
    double log_lo_, log_hi_;
    Eigen::Index i_lambda_ = -1, i_eta_ = -1, i_w_ = -1, i_tA_ = -1, i_tZ_ = -1;
    Eigen::Index size_ = 0;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks_;
};

/// Caches per-dimension squared differences and the correlation matrices of
/// the most recent length-scales, so that blocks which leave the kernels
/// untouched only pay for the Cholesky.
class Workspace {
public:
    Workspace(const MatrixXd& X, const VectorXd& z_raw, double base_nugget, SurrogateKind kind)
        : n_(X.rows()), d_(X.cols()), z_raw_(z_raw), base_nugget_(base_nugget), kind_(kind) {
        sqdiff_.reserve(static_cast<std::size_t>(d_));
        for (Eigen::Index k = 0; k < d_; ++k) {
            const VectorXd col = X.col(k);
            MatrixXd D = col.replicate(1, n_) - col.transpose().replicate(n_, 1);
            sqdiff_.push_back(D.array().square().matrix());
        }
        EA_.resize(static_cast<std::size_t>(d_));
        sum_log_z_ = z_raw.array().log().sum();
    }

    std::size_t evaluations() const { return evaluations_; }

    ProfiledLikelihood evaluate(const Decoded& p) {
        ++evaluations_;
        const bool need_A = kind_ != SurrogateKind::sqexp;
        const bool need_Z = kind_ != SurrogateKind::tag;
        if (need_A) {
            const bool tA_changed = !same(p.theta_A, tA_);
            if (tA_changed) {
                for (Eigen::Index k = 0; k < d_; ++k) {
                    const double s = 1.0 / (p.theta_A[k] * p.theta_A[k]);
                    EA_[static_cast<std::size_t>(k)] = (-s * sqdiff_[static_cast<std::size_t>(k)].array()).exp().matrix();
                }
                tA_ = p.theta_A;
            }
            if (tA_changed || !same(p.w, w_)) {
                RA_.setZero(n_, n_);
                for (Eigen::Index k = 0; k < d_; ++k) RA_ += p.w[k] * EA_[static_cast<std::size_t>(k)];
                w_ = p.w;
            }
        }
        if (need_Z && !same(p.theta_Z, tZ_)) {
            MatrixXd acc = MatrixXd::Zero(n_, n_);
            for (Eigen::Index k = 0; k < d_; ++k)
                acc += sqdiff_[static_cast<std::size_t>(k)] / (p.theta_Z[k] * p.theta_Z[k]);
            RZ_ = (-acc.array()).exp().matrix();
            tZ_ = p.theta_Z;
        }
        if (!has_lambda_ || p.lambda != lambda_) {
            z_ = BoxCox(p.lambda).inverse(z_raw_);
            lambda_ = p.lambda;
            has_lambda_ = true;
        }
        try {
            return profile(RA_, RZ_, p.eta, z_, (p.lambda - 1.0) * sum_log_z_, base_nugget_);
        } catch (const ConditioningError&) {
            ProfiledLikelihood bad;
            bad.value = -std::numeric_limits<double>::infinity();
            return bad;
        }
    }

private:
    static bool same(const VectorXd& a, const VectorXd& b) { return a.size() == b.size() && a == b; }

    Eigen::Index n_, d_;
    VectorXd z_raw_;
    double base_nugget_;
    SurrogateKind kind_;
    double sum_log_z_ = 0.0;
    std::vector<MatrixXd> sqdiff_;
    std::vector<MatrixXd> EA_;
    MatrixXd RA_, RZ_;
    VectorXd tA_, tZ_, w_, z_;
    double lambda_ = 0.0;
    bool has_lambda_ = false;
    std::size_t evaluations_ = 0;
};

struct StartState {
    VectorXd u;
    double value = std::numeric_limits<double>::infinity();  // negative log-likelihood
    bool converged = false;
};

}  // namespace

// ---------------------------------------------------------------------------

FittedTaag condition(const Dataset& data, const Domain& dom, const TaagParams& params, double base_nugget,
                     SurrogateKind kind) {
    params.validate(kind == SurrogateKind::sqexp);
    if (params.kernel.dims() != dom.dims()) throw ParameterError("kernel dimension differs from domain");
    if (data.size() > 0 && data.dims() != dom.dims()) throw DomainError("dataset and domain dimensions differ");
    FittedTaag m;
    m.params_ = params;
    m.data_ = data;
    m.domain_ = dom;
    m.kind_ = kind;
    const auto n = static_cast<Eigen::Index>(data.size());
    if (n == 0) {
        m.design_unit_ = MatrixXd(0, static_cast<Eigen::Index>(dom.dims()));
        m.latent_ = VectorXd(0);
        m.q_ = VectorXd(0);
        m.gram_A_ = MatrixXd(0, 0);
        m.gram_Z_ = MatrixXd(0, 0);
        m.factor_.nugget = base_nugget;
        return m;
    }
    data.design().check_within(dom);
    m.design_unit_ = scale_rows_to_unit(data.design().points(), dom);
    const VectorXd z_raw = data.shifted();
    const BoxCox link(params.lambda);
    m.latent_ = link.inverse(z_raw);
    m.gram_A_ = gram_additive(m.design_unit_, params.kernel);
    m.gram_Z_ = gram_product(m.design_unit_, params.kernel);
    MatrixXd M = (1.0 - params.eta) * m.gram_A_ + params.eta * m.gram_Z_;
    m.factor_ = factorize_gram(M, base_nugget);
    const VectorXd resid = m.latent_.array() - params.mu;
    m.q_ = m.factor_.solve(resid);
    const double nd = static_cast<double>(n);
    m.log_marginal_ = -0.5 * nd * (kLog2Pi + std::log(params.sigma2)) - 0.5 * m.factor_.log_det() -
                      0.5 * resid.dot(m.q_) / params.sigma2 + link.log_jacobian(z_raw);
    m.diagnostics_.log_marginal = m.log_marginal_;
    m.diagnostics_.nugget = m.factor_.nugget;
    return m;
}

double log_marginal_likelihood(const TaagParams& theta, const Dataset& data, const Domain& dom, double base_nugget) {
    if (data.size() == 0) throw InvalidDataError("likelihood needs at least one observation");
    return condition(data, dom, theta, base_nugget, theta.eta == 1.0 ? SurrogateKind::sqexp : SurrogateKind::taag)
        .log_marginal();
}

ProfiledLikelihood profiled_log_likelihood(double lambda, double eta, const KernelParams& kernel, const Dataset& data,
                                           const Domain& dom, double base_nugget) {
    if (data.size() == 0) throw InvalidDataError("likelihood needs at least one observation");
    kernel.validate();
    const MatrixXd X = scale_rows_to_unit(data.design().points(), dom);
    const VectorXd z_raw = data.shifted();
    const BoxCox link(lambda);
    return profile(gram_additive(X, kernel), gram_product(X, kernel), eta, link.inverse(z_raw),
                   link.log_jacobian(z_raw), base_nugget);
}

FittedTaag fit(const Dataset& data, const Domain& dom, const FitConfig& cfg, Rng& rng) {
    const auto n = data.size();
    const auto d = static_cast<Eigen::Index>(dom.dims());
    if (n < 2) throw FitError("fitting needs at least two observations");
    if (data.dims() != dom.dims()) throw DomainError("dataset and domain dimensions differ");
    if (cfg.multistarts < 1) throw ParameterError("fit needs at least one start");
    if (n < dom.dims() + 2) {
        std::ostringstream os;
        os << "fitting " << n << " points in " << dom.dims() << " dimensions; n >= d + 2 is recommended";
        warn(os.str());
    }
    data.design().check_within(dom);

    const MatrixXd X = scale_rows_to_unit(data.design().points(), dom);
    Workspace ws(X, data.shifted(), cfg.base_nugget, cfg.kind);
    const Layout layout(cfg.kind, d, cfg);

    auto objective = [&](const VectorXd& u) {
        const double v = ws.evaluate(layout.decode(u)).value;
        return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
    };

    auto run_cycle = [&](StartState& s) {
        const double before = s.value;
        for (const auto& [off, len] : layout.blocks()) {
            auto block_obj = [&](const VectorXd& b) {
                VectorXd u = s.u;
                u.segment(off, len) = b;
                return objective(u);
            };
            const VectorXd b0 = s.u.segment(off, len);
            const auto budget = cfg.evals_per_param * static_cast<std::size_t>(len + 1);
            auto r = detail::nelder_mead(block_obj, b0, s.value, 0.6, budget, 1e-9);
            if (r.value < s.value) {
                s.u.segment(off, len) = r.x;
                s.value = r.value;
            }
        }
        s.converged = std::isfinite(before) && before - s.value < cfg.tol;
    };

    const double eta_inits[] = {0.5, 0.1, 0.9, 0.3, 0.7};
    std::vector<StartState> starts(cfg.multistarts);
    for (std::size_t s = 0; s < cfg.multistarts; ++s) {
        Rng srng = rng.split(s);
        const double lambda0 = cfg.lambda_inits.empty() ? 1.0 : cfg.lambda_inits[s % cfg.lambda_inits.size()];
        const double eta0 = eta_inits[s % 5];
        VectorXd w0 = VectorXd::Constant(d, 1.0 / static_cast<double>(d));
        VectorXd tA = VectorXd::Constant(d, 0.5), tZ = VectorXd::Constant(d, 0.5);
        if (s > 0) {
            for (Eigen::Index l = 0; l < d; ++l) {
                tA[l] = std::exp(srng.uniform(std::log(0.1), std::log(2.0)));
                tZ[l] = std::exp(srng.uniform(std::log(0.1), std::log(2.0)));
                w0[l] = std::exp(0.3 * srng.normal());
            }
            w0 /= w0.sum();
        }
        starts[s].u = layout.encode(lambda0, eta0, w0, tA, tZ);
        starts[s].value = objective(starts[s].u);
    }

    // Screening: one cycle for every start, then the most promising continue.
    for (auto& s : starts) run_cycle(s);
    std::vector<std::size_t> order(starts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return starts[a].value < starts[b].value; });
    const std::size_t keep = std::min(cfg.refine_top, starts.size());
    for (std::size_t r = 0; r < keep; ++r) {
        auto& s = starts[order[r]];
        for (std::size_t c = 1; c < cfg.max_cycles && !s.converged && std::isfinite(s.value); ++c) run_cycle(s);
    }

    FitDiagnostics diag;
    diag.starts = starts.size();
    const StartState* best = nullptr;
    for (const auto& s : starts) {
        diag.start_values.push_back(std::isfinite(s.value) ? -s.value : -std::numeric_limits<double>::infinity());
        if (!std::isfinite(s.value)) {
            ++diag.failed_starts;
            continue;
        }
        if (!best || s.value < best->value) best = &s;
    }
    if (!best) {
        std::ostringstream os;
        os << "all " << starts.size() << " starts failed (n=" << n << ", d=" << d << ", "
           << ws.evaluations() << " likelihood evaluations)";
        throw FitError(os.str());
    }

    const Decoded p = layout.decode(best->u);
    const ProfiledLikelihood prof = ws.evaluate(p);
    TaagParams params;
    params.lambda = p.lambda;
    params.eta = p.eta;
    params.mu = prof.mu_hat;
    params.sigma2 = prof.sigma2_hat;
    params.kernel.w = p.w;
    params.kernel.theta_A = p.theta_A;
    params.kernel.theta_Z = p.theta_Z;

    FittedTaag model = condition(data, dom, params, cfg.base_nugget, cfg.kind);
    diag.evaluations = ws.evaluations();
    diag.log_marginal = prof.value;
    diag.nugget = model.factor_.nugget;
    model.diagnostics_ = std::move(diag);
    return model;
}

// ---------------------------------------------------------------------------

namespace {

VectorXd mixed_cross(const FittedTaag& m, const VectorXd& u) {
    const auto& p = m.params();
    auto [ra, rz] = cross_vectors(m.design_unit(), u, p.kernel);
    if (p.eta <= 0.0) return ra;
    if (p.eta >= 1.0) return rz;
    return (1.0 - p.eta) * ra + p.eta * rz;
}

}  // namespace

PosteriorH posterior_h_unit(const FittedTaag& model, const VectorXd& u) {
    const auto& p = model.params();
    PosteriorH out;
    if (model.size() == 0) {
        out.mean = p.mu;
        out.var = p.sigma2;
        return out;
    }
    const VectorXd r = mixed_cross(model, u);
    out.mean = p.mu + r.dot(model.q());
    const VectorXd v = model.factor().llt.matrixL().solve(r);
    const double raw = p.sigma2 * (1.0 - v.squaredNorm());
    out.clamped = raw < 0.0;
    out.var = std::clamp(raw, 0.0, p.sigma2);
    return out;
}

double posterior_h_mean_unit(const FittedTaag& model, const VectorXd& u) {
    if (model.size() == 0) return model.params().mu;
    return model.params().mu + mixed_cross(model, u).dot(model.q());
}

PosteriorH posterior_h(const FittedTaag& model, const VectorXd& x) {
    return posterior_h_unit(model, scale_to_unit(x, model.domain()));
}

double posterior_f_mean(const FittedTaag& model, const VectorXd& x) {
    const double h = posterior_h_mean_unit(model, scale_to_unit(x, model.domain()));
    const BoxCox link = model.link();
    const auto [lo, hi] = link.latent_range();
    const double shift = model.data().shift();
    if (h <= lo) {
        warn("latent mean below Box-Cox range; clamped to the boundary");
        return 0.0 - shift;
    }
    if (h >= hi) {
        warn("latent mean above Box-Cox range; clamped to the boundary");
        return std::numeric_limits<double>::infinity();
    }
    return link.forward(h) - shift;
}

std::string model_to_json(const FittedTaag& model) {
    const auto& p = model.params();
    auto vec = [](const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    nlohmann::json j;
    j["kind"] = to_string(model.kind());
    j["n"] = model.size();
    j["d"] = model.dims();
    j["lambda"] = p.lambda;
    j["mu"] = p.mu;
    j["sigma2"] = p.sigma2;
    j["eta"] = p.eta;
    j["tau2"] = p.tau2();
    j["delta"] = std::isfinite(p.delta()) ? nlohmann::json(p.delta()) : nlohmann::json(nullptr);
    j["w"] = vec(p.kernel.w);
    j["theta_A"] = vec(p.kernel.theta_A);
    j["theta_Z"] = vec(p.kernel.theta_Z);
    j["shift"] = model.data().shift();
    j["domain"] = {{"lower", model.domain().lower()}, {"upper", model.domain().upper()}};
    const auto& dg = model.diagnostics();
    j["diagnostics"] = {{"log_marginal", model.log_marginal()},
                        {"nugget", model.nugget()},
                        {"starts", dg.starts},
                        {"failed_starts", dg.failed_starts},
                        {"evaluations", dg.evaluations}};
    return j.dump(2);
}

}  // namespace bomm
