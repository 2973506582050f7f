#pragma once

// Transformed approximate additive GP. The latent h = inverse Box-Cox of the
// (shifted) responses is modelled as a GP with mean mu and covariance
// sigma2 * [(1 - eta) r_A + eta r_Z]. Hyperparameters are fitted by
// maximising the profiled log marginal likelihood (mu and sigma2 in closed
// form, Box-Cox Jacobian included). All kernel work happens on the unit cube;
// length-scales are in unit-cube units.

#include <string>
#include <vector>

#include "bomm/box_cox.hpp"
#include "bomm/core.hpp"
#include "bomm/kernels.hpp"

namespace bomm {

struct TaagParams {
    double lambda = 1.0;
    double mu = 0.0;
    double sigma2 = 1.0;
    double eta = 0.0;
    KernelParams kernel;

    double tau2() const { return sigma2 * (1.0 - eta); }
    /// eta / (1 - eta); infinite at eta == 1.
    double delta() const;
    /// eta == 1 is only admissible for the plain squared-exponential surrogate.
    void validate(bool allow_eta_one = false) const;
};

/// Which restriction of the model to fit.
enum class SurrogateKind {
    taag,   ///< everything free
    tag,    ///< eta fixed at 0 (transformed additive GP)
    sqexp,  ///< eta fixed at 1, lambda fixed at 1 (anisotropic squared-exponential GP)
};

std::string to_string(SurrogateKind kind);

struct FitConfig {
    SurrogateKind kind = SurrogateKind::taag;
    std::size_t multistarts = 10;
    /// Starts carried from the screening cycle into full refinement.
    std::size_t refine_top = 3;
    std::size_t max_cycles = 8;
    /// Nelder-Mead evaluations per block and cycle, per block parameter (+1).
    std::size_t evals_per_param = 40;
    /// Stop cycling once a full cycle gains less than this in log-likelihood.
    double tol = 1e-4;
    double base_nugget = kBaseNugget;
    double theta_min = 1e-2;
    double theta_max = 10.0;
    std::vector<double> lambda_inits{-1.0, 0.0, 0.5, 1.0};
};

struct FitDiagnostics {
    double log_marginal = 0.0;
    double nugget = 0.0;
    std::size_t starts = 0;
    std::size_t failed_starts = 0;
    std::size_t evaluations = 0;
    /// Profiled log-likelihood reached by each start after its final cycle.
    std::vector<double> start_values;
};

class FittedTaag {
public:
    const TaagParams& params() const { return params_; }
    const Dataset& data() const { return data_; }
    const Domain& domain() const { return domain_; }
    SurrogateKind kind() const { return kind_; }
    /// Design scaled to the unit cube.
    const MatrixXd& design_unit() const { return design_unit_; }
    /// Box-Cox inverse of the shifted responses.
    const VectorXd& latent() const { return latent_; }
    /// Solves [(1 - eta) R_A + eta R_Z + nugget I] q = latent - mu 1.
    const VectorXd& q() const { return q_; }
    const GramFactor& factor() const { return factor_; }
    /// Correlation matrices without nugget.
    const MatrixXd& gram_A() const { return gram_A_; }
    const MatrixXd& gram_Z() const { return gram_Z_; }
    double nugget() const { return factor_.nugget; }
    double log_marginal() const { return log_marginal_; }
    const FitDiagnostics& diagnostics() const { return diagnostics_; }
    BoxCox link() const { return BoxCox(params_.lambda); }
    std::size_t size() const { return data_.size(); }
    std::size_t dims() const { return domain_.dims(); }

private:
    friend FittedTaag condition(const Dataset&, const Domain&, const TaagParams&, double, SurrogateKind);
    friend FittedTaag fit(const Dataset&, const Domain&, const FitConfig&, Rng&);

    TaagParams params_;
    Dataset data_;
    Domain domain_;
    SurrogateKind kind_ = SurrogateKind::taag;
    MatrixXd design_unit_;
    VectorXd latent_;
    VectorXd q_;
    GramFactor factor_;
    MatrixXd gram_A_;
    MatrixXd gram_Z_;
    double log_marginal_ = 0.0;
    FitDiagnostics diagnostics_;
};

/// Builds the posterior for fixed parameters (no optimisation). The dataset
/// may be empty, giving the prior.
FittedTaag condition(const Dataset& data, const Domain& dom, const TaagParams& params,
                     double base_nugget = kBaseNugget, SurrogateKind kind = SurrogateKind::taag);

/// log N(latent; mu 1, sigma2 M) + (lambda - 1) sum log z_i, with M the
/// nuggeted mixture Gram.
double log_marginal_likelihood(const TaagParams& theta, const Dataset& data, const Domain& dom,
                               double base_nugget = kBaseNugget);

struct ProfiledLikelihood {
    double value = 0.0;
    double mu_hat = 0.0;
    double sigma2_hat = 0.0;
    double nugget = 0.0;
};

/// Likelihood maximised over mu and sigma2 in closed form:
/// mu = 1'M^-1 z / 1'M^-1 1, sigma2 = (z - mu 1)'M^-1(z - mu 1) / n.
ProfiledLikelihood profiled_log_likelihood(double lambda, double eta, const KernelParams& kernel,
                                           const Dataset& data, const Domain& dom,
                                           double base_nugget = kBaseNugget);

/// Empirical-Bayes fit: blocked Nelder-Mead over (lambda, eta, w, theta_A,
/// theta_Z) with several starts. Throws FitError if every start fails.
FittedTaag fit(const Dataset& data, const Domain& dom, const FitConfig& cfg, Rng& rng);

struct PosteriorH {
    double mean = 0.0;
    double var = 0.0;
    /// True when the raw variance was negative and got clamped to 0.
    bool clamped = false;
};

/// Posterior of the latent h at a point in the original domain.
PosteriorH posterior_h(const FittedTaag& model, const VectorXd& x);
/// Same, for a point already on the unit cube.
PosteriorH posterior_h_unit(const FittedTaag& model, const VectorXd& u);
double posterior_h_mean_unit(const FittedTaag& model, const VectorXd& u);

/// Plug-in surrogate of f: Box-Cox forward of the latent posterior mean minus
/// the positivity shift. A latent mean below the link's range maps to the
/// boundary value (with a warning).
double posterior_f_mean(const FittedTaag& model, const VectorXd& x);

/// JSON dump of fitted parameters and diagnostics.
std::string model_to_json(const FittedTaag& model);

}  // namespace bomm
