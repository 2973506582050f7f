#pragma once

// Optimizer estimators built on a dataset or a fitted surrogate: pick the
// winner, surrogate minimisation, coordinate-wise marginal-mean minimisation
// (plain and tail) and the diagnostic switch between the two.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bomm/marginal.hpp"
#include "bomm/taag.hpp"

namespace bomm {

enum class Method { pw, sbo_sqexp, sbo_taag, sbo_tag, bomm, bomm_tail, bomm_plus };

/// Display tag: PW, SBO-SqExp, SBO-TAAG, SBO-TAG, BOMM, BOMM-TAIL, BOMM-PLUS.
std::string to_string(Method m);
/// Accepts the display tag or the lower-case CLI spelling (pw, sbo-sqexp, ...).
Method parse_method(std::string_view name);
std::vector<Method> parse_methods(std::string_view comma_list);

enum class Branch { none, bomm, tail };
std::string to_string(Branch b);

struct EstimatorResult {
    VectorXd x_hat;
    Method method = Method::pw;
    std::optional<double> xi;
    std::optional<double> alpha_star;
    std::optional<double> f_at_x_hat;
    Branch branch = Branch::none;
};

struct DiagnosticConfig {
    double T = 0.4;
    double rho = 0.3;
    std::size_t n_is = 2000;
    /// Prior exponent on eta; defaults to the fitted eta / (1 - eta).
    std::optional<double> delta;

    void validate() const;
};

/// {0.05, 0.10, ..., 0.95, 1.0}.
std::vector<double> default_alpha_grid();

/// Best observed design row; ties go to the smallest index.
EstimatorResult pick_the_winner(const Dataset& data);

struct SearchConfig {
    std::size_t starts = 20;
    std::size_t max_sweeps = 200;
    std::size_t grid_size = kDefaultGridSize;
    /// Extra starting points in the original domain, tried before the
    /// automatic ones (they count towards `starts`).
    std::vector<VectorXd> initial_points;
};

/// Minimises the plug-in surrogate by multistart coordinate descent on the
/// per-dimension grid. Starts are the best observed points, then uniform
/// grid points.
EstimatorResult sbo_optimize(const FittedTaag& model, const SearchConfig& cfg, Rng& rng);

EstimatorResult bomm(const FittedTaag& model, std::size_t grid_size = kDefaultGridSize);
EstimatorResult bomm_tail(const FittedTaag& model, double alpha, std::size_t grid_size = kDefaultGridSize);

/// Alpha minimising the latent posterior mean at the tail estimator; ties go
/// to the largest alpha.
double select_alpha(const FittedTaag& model, const std::vector<double>& alpha_grid,
                    std::size_t grid_size = kDefaultGridSize);

/// Posterior probability that eta exceeds cfg.T given the other fitted
/// parameters, by self-normalised importance sampling with a uniform
/// proposal. Throws DiagnosticError when every weight vanishes.
double eta_diagnostic(const FittedTaag& model, const DiagnosticConfig& cfg, Rng& rng);

/// Unnormalised log density of eta used by the diagnostic.
double eta_log_density(const FittedTaag& model, double eta, double delta);

/// True when the plain marginal-mean branch is taken: xi <= 1 - rho.
bool take_bomm_branch(double xi, double rho);

struct PlusConfig {
    DiagnosticConfig diagnostic;
    std::vector<double> alpha_grid = default_alpha_grid();
    std::size_t grid_size = kDefaultGridSize;
};

/// Diagnostic, then either the plain or the tail estimator. A failed
/// diagnostic falls back to the plain branch with a warning.
EstimatorResult bomm_plus(const FittedTaag& model, const PlusConfig& cfg, Rng& rng);
/// Fits the surrogate first; fit errors propagate.
EstimatorResult bomm_plus(const Dataset& data, const Domain& dom, const PlusConfig& cfg, const FitConfig& fit_cfg,
                          Rng& rng);

}  // namespace bomm
