#include "bomm/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace bomm {

std::string to_string(Method m) {
    switch (m) {
        case Method::pw: return "PW";
        case Method::sbo_sqexp: return "SBO-SqExp";
        case Method::sbo_taag: return "SBO-TAAG";
        case Method::sbo_tag: return "SBO-TAG";
        case Method::bomm: return "BOMM";
        case Method::bomm_tail: return "BOMM-TAIL";
        case Method::bomm_plus: return "BOMM-PLUS";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    std::string key(name);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
        return c == '_' ? '-' : static_cast<char>(std::tolower(c));
    });
    if (key == "pw") return Method::pw;
    if (key == "sbo-sqexp") return Method::sbo_sqexp;
    if (key == "sbo-taag") return Method::sbo_taag;
    if (key == "sbo-tag") return Method::sbo_tag;
    if (key == "bomm") return Method::bomm;
    if (key == "bomm-tail") return Method::bomm_tail;
    if (key == "bomm-plus" || key == "bomm+") return Method::bomm_plus;
    throw ParameterError("unknown method '" + std::string(name) + "'");
}

std::vector<Method> parse_methods(std::string_view comma_list) {
    std::vector<Method> out;
    std::size_t pos = 0;
    while (pos <= comma_list.size()) {
        const auto next = std::min(comma_list.find(',', pos), comma_list.size());
        const auto item = comma_list.substr(pos, next - pos);
        if (!item.empty()) {
            const Method m = parse_method(item);
            if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
        }
        pos = next + 1;
    }
    if (out.empty()) throw ParameterError("no methods given");
    return out;
}

std::string to_string(Branch b) {
    switch (b) {
        case Branch::none: return "";
        case Branch::bomm: return "bomm";
        case Branch::tail: return "tail";
    }
    return "";
}

void DiagnosticConfig::validate() const {
    if (!(T >= 0.0 && T <= 1.0)) throw ParameterError("diagnostic threshold must lie in [0, 1]");
    if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("diagnostic significance must lie in (0, 1)");
    if (n_is < 100) throw ParameterError("diagnostic needs at least 100 importance samples");
    if (delta && !(*delta >= 0.0 && std::isfinite(*delta))) throw ParameterError("delta must be finite and >= 0");
}

std::vector<double> default_alpha_grid() {
    std::vector<double> g;
    for (int k = 1; k <= 20; ++k) g.push_back(k / 20.0);
    return g;
}

EstimatorResult pick_the_winner(const Dataset& data) {
    if (data.size() == 0) throw InvalidDataError("pick the winner needs at least one observation");
    const VectorXd& y = data.responses();
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < y.size(); ++i)
        if (y[i] < y[best]) best = i;
    EstimatorResult r;
    r.method = Method::pw;
    r.x_hat = data.design().row(static_cast<std::size_t>(best));
    r.f_at_x_hat = y[best];
    return r;
}

// ---------------------------------------------------------------------------
// Surrogate minimisation

namespace {

/// Kernel values of every grid point against every design point, one table
/// per dimension, so that a line search is two matrix-vector products.
class GridTables {
public:
    GridTables(const FittedTaag& model, std::size_t grid_size) : model_(model), G_(static_cast<Eigen::Index>(grid_size)) {
        const auto& p = model.params();
        const MatrixXd& X = model.design_unit();
        const auto d = X.cols(), n = X.rows();
        t_.resize(G_);
        for (Eigen::Index k = 0; k < G_; ++k) t_[k] = static_cast<double>(k) / static_cast<double>(G_ - 1);
        use_A_ = p.eta < 1.0;
        use_Z_ = p.eta > 0.0;
        A_.resize(static_cast<std::size_t>(d));
        Z_.resize(static_cast<std::size_t>(d));
        for (Eigen::Index l = 0; l < d; ++l) {
            if (use_A_) A_[l] = table(X.col(l), p.kernel.theta_A[l], n);
            if (use_Z_) Z_[l] = table(X.col(l), p.kernel.theta_Z[l], n);
        }
    }

    Eigen::Index size() const { return G_; }
    double t(Eigen::Index k) const { return t_[k]; }
    Eigen::Index nearest(double u) const {
        return std::clamp(static_cast<Eigen::Index>(std::lround(u * static_cast<double>(G_ - 1))), Eigen::Index{0},
                          G_ - 1);
    }

    /// Runs coordinate descent from grid indices `idx`; returns the final
    /// latent mean.
    double descend(std::vector<Eigen::Index>& idx, std::size_t max_sweeps) const {
        const auto& p = model_.params();
        const MatrixXd& X = model_.design_unit();
        const VectorXd& q = model_.q();
        const auto d = X.cols(), n = X.rows();
        const double a_w = 1.0 - p.eta, z_w = p.eta;

        // Running additive sums and product-kernel log values per design point.
        VectorXd add = VectorXd::Zero(n), logz = VectorXd::Zero(n);
        auto logz_term = [&](Eigen::Index l, Eigen::Index k, Eigen::Index i) {
            const double s = (t_[k] - X(i, l)) / p.kernel.theta_Z[l];
            return -s * s;
        };
        for (Eigen::Index l = 0; l < d; ++l)
            for (Eigen::Index i = 0; i < n; ++i) {
                if (use_A_) add[i] += p.kernel.w[l] * A_[l](idx[l], i);
                if (use_Z_) logz[i] += logz_term(l, idx[l], i);
            }

        VectorXd line(G_), wa(n), wz(n);
        double current = std::numeric_limits<double>::infinity();
        for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
            bool moved = false;
            for (Eigen::Index l = 0; l < d; ++l) {
                const Eigen::Index k0 = idx[l];
                line.setConstant(p.mu);
                double base = 0.0;
                if (use_A_) {
                    for (Eigen::Index i = 0; i < n; ++i) base += q[i] * (add[i] - p.kernel.w[l] * A_[l](k0, i));
                    wa = (a_w * p.kernel.w[l]) * q;
                    line.noalias() += A_[l] * wa;
                    line.array() += a_w * base;
                }
                if (use_Z_) {
                    for (Eigen::Index i = 0; i < n; ++i) wz[i] = z_w * q[i] * std::exp(logz[i] - logz_term(l, k0, i));
                    line.noalias() += Z_[l] * wz;
                }
                Eigen::Index best = k0;
                for (Eigen::Index k = 0; k < G_; ++k)
                    if (line[k] < line[best]) best = k;
                current = line[best];
                if (best != k0) {
                    for (Eigen::Index i = 0; i < n; ++i) {
                        if (use_A_) add[i] += p.kernel.w[l] * (A_[l](best, i) - A_[l](k0, i));
                        if (use_Z_) logz[i] += logz_term(l, best, i) - logz_term(l, k0, i);
                    }
                    idx[l] = best;
                    moved = true;
                }
            }
            if (!moved) break;
        }
        return current;
    }

private:
    MatrixXd table(const VectorXd& centre, double theta, Eigen::Index n) const {
        MatrixXd T(G_, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index k = 0; k < G_; ++k) {
                const double s = (t_[k] - centre[i]) / theta;
                T(k, i) = std::exp(-s * s);
            }
        return T;
    }

    const FittedTaag& model_;
    Eigen::Index G_;
    VectorXd t_;
    bool use_A_ = false, use_Z_ = false;
    std::vector<MatrixXd> A_, Z_;
};

Method sbo_method(SurrogateKind kind) {
    switch (kind) {
        case SurrogateKind::taag: return Method::sbo_taag;
        case SurrogateKind::tag: return Method::sbo_tag;
        case SurrogateKind::sqexp: return Method::sbo_sqexp;
    }
    return Method::sbo_taag;
}

}  // namespace

EstimatorResult sbo_optimize(const FittedTaag& model, const SearchConfig& cfg, Rng& rng) {
    if (cfg.starts == 0) throw ParameterError("surrogate search needs at least one start");
    if (cfg.grid_size < 2) throw ParameterError("grid needs at least two points");
    const auto d = static_cast<Eigen::Index>(model.dims());
    const GridTables tables(model, cfg.grid_size);

    std::vector<std::vector<Eigen::Index>> starts;
    auto add_unit = [&](const VectorXd& u) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
        for (Eigen::Index l = 0; l < d; ++l) idx[l] = tables.nearest(u[l]);
        starts.push_back(std::move(idx));
    };
    for (const auto& x : cfg.initial_points) {
        if (starts.size() >= cfg.starts) break;
        model.domain().check(x);
        add_unit(scale_to_unit(x, model.domain()));
    }
    const std::size_t n = model.size();
    if (n > 0) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        const VectorXd& y = model.data().responses();
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return y[static_cast<Eigen::Index>(a)] < y[static_cast<Eigen::Index>(b)];
        });
        const std::size_t from_design = std::min(n, (cfg.starts + 1) / 2);
        for (std::size_t r = 0; r < from_design && starts.size() < cfg.starts; ++r)
            add_unit(model.design_unit().row(static_cast<Eigen::Index>(order[r])).transpose());
    }
    while (starts.size() < cfg.starts) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
        for (auto& v : idx) v = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(tables.size())));
        starts.push_back(std::move(idx));
    }

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<Eigen::Index> best_idx = starts.front();
    for (auto& s : starts) {
        const double v = tables.descend(s, cfg.max_sweeps);
        if (v < best_val) {
            best_val = v;
            best_idx = s;
        }
    }
    VectorXd u(d);
    for (Eigen::Index l = 0; l < d; ++l) u[l] = tables.t(best_idx[l]);
    EstimatorResult r;
    r.method = sbo_method(model.kind());
    r.x_hat = unscale_from_unit(u, model.domain());
    return r;
}

// ---------------------------------------------------------------------------
// Marginal-mean estimators

namespace {

VectorXd argmin_profiles(const std::vector<MarginalPosterior>& profiles, const TailParams* tail) {
    VectorXd x(static_cast<Eigen::Index>(profiles.size()));
    for (std::size_t l = 0; l < profiles.size(); ++l) {
        const auto& mp = profiles[l];
        const auto k = argmin_index(tail ? mp.tail(*tail) : mp.objective);
        x[static_cast<Eigen::Index>(l)] = mp.grid[k];
    }
    return x;
}

}  // namespace

EstimatorResult bomm(const FittedTaag& model, std::size_t grid_size) {
    EstimatorResult r;
    r.method = Method::bomm;
    r.x_hat = argmin_profiles(marginal_posteriors(model, grid_size, false), nullptr);
    return r;
}

EstimatorResult bomm_tail(const FittedTaag& model, double alpha, std::size_t grid_size) {
    const TailParams tp = TailParams::make(alpha);
    const bool need_var = tp.correction() != 0.0;
    EstimatorResult r;
    r.method = Method::bomm_tail;
    r.alpha_star = alpha;
    r.x_hat = argmin_profiles(marginal_posteriors(model, grid_size, need_var), need_var ? &tp : nullptr);
    return r;
}

double select_alpha(const FittedTaag& model, const std::vector<double>& alpha_grid, std::size_t grid_size) {
    if (alpha_grid.empty()) throw ParameterError("alpha grid is empty");
    std::vector<TailParams> tails;
    for (double a : alpha_grid) tails.push_back(TailParams::make(a));
    const auto profiles = marginal_posteriors(model, grid_size, true);
    double best_alpha = alpha_grid.front();
    double best_val = std::numeric_limits<double>::infinity();
    bool first = true;
    for (const auto& tp : tails) {
        const VectorXd x = argmin_profiles(profiles, &tp);
        const double v = posterior_h_mean_unit(model, scale_to_unit(x, model.domain()));
        if (first || v < best_val || (v == best_val && tp.alpha > best_alpha)) {
            best_val = v;
            best_alpha = tp.alpha;
            first = false;
        }
    }
    return best_alpha;
}

// ---------------------------------------------------------------------------
// Non-additivity diagnostic

double eta_log_density(const FittedTaag& model, double eta, double delta) {
    if (!(eta > 0.0 && eta < 1.0)) return -std::numeric_limits<double>::infinity();
    const auto n = static_cast<Eigen::Index>(model.size());
    if (n == 0) throw DiagnosticError("diagnostic needs observations");
    const MatrixXd M = (1.0 - eta) * model.gram_A() + eta * model.gram_Z();
    GramFactor f;
    try {
        f = factorize_gram(M, model.nugget(), /*quiet=*/true);
    } catch (const ConditioningError&) {
        return -std::numeric_limits<double>::infinity();
    }
    const VectorXd r = model.latent().array() - model.params().mu;
    const double s2 = r.dot(f.solve(r)) / static_cast<double>(n);
    if (!(s2 > 0.0)) return -std::numeric_limits<double>::infinity();
    return -0.5 * static_cast<double>(n) * std::log(s2) + delta * std::log(eta) + std::log1p(-eta) -
           0.5 * f.log_det();
}

double eta_diagnostic(const FittedTaag& model, const DiagnosticConfig& cfg, Rng& rng) {
    cfg.validate();
    const double eta_hat = std::min(model.params().eta, 1.0 - 1e-9);
    const double delta = cfg.delta ? *cfg.delta : eta_hat / (1.0 - eta_hat);
    std::vector<double> etas(cfg.n_is), logw(cfg.n_is);
    double max_lw = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < cfg.n_is; ++s) {
        etas[s] = rng.uniform();
        logw[s] = eta_log_density(model, etas[s], delta);
        if (std::isfinite(logw[s])) max_lw = std::max(max_lw, logw[s]);
    }
    if (!std::isfinite(max_lw)) throw DiagnosticError("all importance weights vanished");
    double total = 0.0, above = 0.0;
    for (std::size_t s = 0; s < cfg.n_is; ++s) {
        if (!std::isfinite(logw[s])) continue;
        const double w = std::exp(logw[s] - max_lw);
        total += w;
        if (etas[s] > cfg.T) above += w;
    }
    if (!(total > 0.0) || !std::isfinite(total)) throw DiagnosticError("importance weights do not normalise");
    return std::clamp(above / total, 0.0, 1.0);
}

bool take_bomm_branch(double xi, double rho) { return xi <= 1.0 - rho; }

EstimatorResult bomm_plus(const FittedTaag& model, const PlusConfig& cfg, Rng& rng) {
    EstimatorResult r;
    std::optional<double> xi;
    try {
        xi = eta_diagnostic(model, cfg.diagnostic, rng);
    } catch (const DiagnosticError& e) {
        warn(std::string("non-additivity diagnostic failed (") + e.what() + "); using marginal means");
    }
    if (!xi || take_bomm_branch(*xi, cfg.diagnostic.rho)) {
        r = bomm(model, cfg.grid_size);
        r.branch = Branch::bomm;
    } else {
        const double alpha = select_alpha(model, cfg.alpha_grid, cfg.grid_size);
        r = bomm_tail(model, alpha, cfg.grid_size);
        r.alpha_star = alpha;
        r.branch = Branch::tail;
    }
    r.method = Method::bomm_plus;
    r.xi = xi;
    return r;
}

EstimatorResult bomm_plus(const Dataset& data, const Domain& dom, const PlusConfig& cfg, const FitConfig& fit_cfg,
                          Rng& rng) {
    Rng fit_rng = rng.split(1);
    Rng diag_rng = rng.split(2);
    const FittedTaag model = fit(data, dom, fit_cfg, fit_rng);
    return bomm_plus(model, cfg, diag_rng);
}

}  // namespace bomm
