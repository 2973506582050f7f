#pragma once

// Marginal posteriors of the latent surface: for each coordinate l, the
// integral of the posterior of h over all other coordinates. Both the mean
// and the variance have closed forms for squared-exponential kernels. The
// integrals are not normalised by Vol(X_{-l}).

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "bomm/taag.hpp"

namespace bomm {

constexpr std::size_t kDefaultGridSize = 1001;
/// Smallest admissible tail fraction.
constexpr double kMinTailAlpha = 1e-3;

struct TailParams {
    double alpha = 1.0;
    /// Standard-normal alpha-quantile (+inf at alpha == 1).
    double z_alpha = 0.0;
    /// Standard-normal density at z_alpha (0 at alpha == 1).
    double phi_z = 0.0;

    /// Throws ParameterError unless alpha lies in [kMinTailAlpha, 1].
    static TailParams make(double alpha);
    /// phi(z_alpha) / alpha; exactly 0 for alpha == 1.
    double correction() const { return alpha == 1.0 ? 0.0 : phi_z / alpha; }
};

/// Per-coordinate evaluator. Construction is O(n d); each evaluation is O(n)
/// for the mean and O(n^2) for the variance.
class MarginalEvaluator {
public:
    MarginalEvaluator(const FittedTaag& model, std::size_t l);

    std::size_t dim() const { return l_; }
    /// Part of the marginal mean that depends on x_l (the additive constant
    /// and the mu * Vol term are dropped).
    double objective(double x_l) const;
    /// Full marginal mean: objective + mu * Vol(X_{-l}) + C_l.
    double mean(double x_l) const;
    /// Marginal posterior variance, clamped at 0.
    double variance(double x_l) const;
    /// objective - sqrt(variance) * phi(z_alpha) / alpha.
    double tail(double x_l, const TailParams& tail) const;

    /// Dropped constant mu * Vol(X_{-l}) + C_l.
    double constant() const { return constant_; }

private:
    double unit(double x_l) const;
    VectorXd integrated_cross(double t) const;

    const FittedTaag* model_;
    std::size_t l_;
    double jac_;  // Vol(X_{-l}) of the original domain
    double lower_, width_;
    double one_minus_eta_, eta_;
    double w_l_, theta_A_l_, theta_Z_l_;
    VectorXd centre_;      // design coordinate l on the unit scale
    VectorXd add_rest_;    // sum_{k != l} w_k int exp(...) du_k, per design point
    VectorXd prod_rest_;   // prod_{j != l} int exp(...) du_j, per design point
    double constant_ = 0.0;
    double prior_ = 0.0;   // prior double integral on the unit cube
};

double marginal_mean_objective(const FittedTaag& model, std::size_t l, double x_l);
double marginal_mean(const FittedTaag& model, std::size_t l, double x_l);
double marginal_variance(const FittedTaag& model, std::size_t l, double x_l);
/// Throws ParameterError for alpha outside (0, 1] (or below kMinTailAlpha).
double tail_mean(const FittedTaag& model, std::size_t l, double x_l, double alpha);

/// Uniform grid lo + (hi - lo) k / (size - 1), both endpoints included.
std::vector<double> uniform_grid(double lo, double hi, std::size_t size);

/// Grid point with the smallest objective; ties go to the smallest
/// coordinate. Throws ParameterError for grid_size < 2.
double argmin_1d(const std::function<double(double)>& objective, double lo, double hi,
                 std::size_t grid_size = kDefaultGridSize);
/// Index of the smallest value, first one on ties.
std::size_t argmin_index(const std::vector<double>& values);

/// Marginal mean objective and variance tabulated on a grid.
struct MarginalPosterior {
    std::size_t dim_index = 0;
    std::vector<double> grid;
    std::vector<double> objective;
    std::vector<double> var;
    double constant = 0.0;

    std::vector<double> tail(const TailParams& tail) const;
};

MarginalPosterior marginal_posterior(const FittedTaag& model, std::size_t l, std::size_t grid_size = kDefaultGridSize,
                                     bool with_variance = true);
std::vector<MarginalPosterior> marginal_posteriors(const FittedTaag& model, std::size_t grid_size = kDefaultGridSize,
                                                   bool with_variance = true);

/// CSV with columns l,x,mean,var,tail_mean (mean includes the constant).
void write_marginal_trace(std::ostream& os, const std::vector<MarginalPosterior>& profiles, double alpha);

}  // namespace bomm
