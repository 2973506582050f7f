#pragma once

// Benchmark objectives (six-hump camel, wing weight, OTL circuit, piston and
// the nine-dimensional exponential function with tunable interactions) plus
// a brute-force minimiser used as the reference for optimality gaps.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bomm/core.hpp"

namespace bomm {

using Objective = std::function<double(const VectorXd&)>;

struct TestFunction {
    std::string name;
    Domain domain;
    Objective eval;
    /// Interaction strength; only meaningful for custom_exp.
    double lambda_int = 0.0;
    std::optional<double> known_min_value;
    std::string known_min_provenance;

    std::size_t dims() const { return domain.dims(); }
    double operator()(const VectorXd& x) const { return eval(x); }
};

Domain six_hump_camel_domain();
Domain wing_weight_domain();
Domain otl_circuit_domain();
Domain piston_domain();
Domain custom_exp_domain();

/// Sum of three two-dimensional camel blocks plus 5. Domain x1,x3,x5 in
/// [-2,2], x2,x4,x6 in [-1,1].
double six_hump_camel(const VectorXd& x);

/// x = (S_w, W_fw, A, Lambda, q, lambda, t_c, N_z, W_dg, W_p); the sweep
/// angle Lambda is in degrees.
double wing_weight(const VectorXd& x);

/// x = (R_b1, R_b2, R_f, R_c1, R_c2, beta).
double otl_circuit(const VectorXd& x);

/// x = (M, S, V_0, k, P_0, T_a, T_0).
double piston(const VectorXd& x);

/// Centres m_l of the interaction brackets of custom_exp.
const std::vector<double>& custom_exp_centres();
constexpr double kCustomExpEpsilon = 0.01;

/// 10 * sum_k exp(-2 / x_k^{(m+1)/2} + eps), m = 1,2,3 cycling within each
/// block of three coordinates. Evaluates to 0 per term at x_k = 0.
double custom_exp_additive(const VectorXd& x);
/// sum over blocks of {(x_a - m_a) - (x_b - m_b) - (x_c - m_c)}^2.
double custom_exp_interaction(const VectorXd& x);
/// additive + lambda_int * interaction.
double custom_exp(const VectorXd& x, double lambda_int);

/// Known names: six_hump_camel, wing_weight, otl_circuit, piston, custom_exp.
TestFunction make_test_function(std::string_view name, double lambda_int = 0.0);
std::vector<std::string> test_function_names();

// ---------------------------------------------------------------------------
// Reference minimiser

struct OracleConfig {
    /// Number of uniform random evaluations.
    std::size_t budget = 1000000;
    std::uint64_t seed = 20240601;
    std::size_t refine_best = 20;
    std::size_t refine_rounds = 200;
    /// Points in the coarse line grid used by coordinate refinement.
    std::size_t line_grid = 101;
};

struct OracleResult {
    std::string function;
    double lambda_int = 0.0;
    VectorXd x_opt;
    double f_opt = 0.0;
    std::size_t budget = 0;
    std::uint64_t seed = 0;
};

/// Multistart random search followed by coordinate-wise refinement of the
/// best candidates. The refined set is the union of the best `refine_best`
/// points within each prefix of length 10^4 * 10^k and the full budget, so
/// with a fixed seed the result never worsens as the budget grows through
/// those checkpoints.
OracleResult oracle_minimize(const TestFunction& f, const OracleConfig& cfg = {});

/// Coordinate descent over the box from `start`: for each coordinate a grid
/// scan followed by golden-section polishing. Never returns a worse point.
VectorXd coordinate_refine(const Objective& f, const Domain& dom, VectorXd start, std::size_t rounds,
                           std::size_t line_grid);

/// oracle_minima.json entries: {function, lambda_int, x_opt, f_opt, budget, seed}.
std::vector<OracleResult> load_oracle_fixtures(const std::string& path);
void save_oracle_fixtures(const std::string& path, const std::vector<OracleResult>& entries);
/// Replaces the entry with the same (function, lambda_int) or appends.
void upsert_oracle_fixture(std::vector<OracleResult>& entries, const OracleResult& r);
std::optional<OracleResult> find_oracle_fixture(const std::vector<OracleResult>& entries,
                                                std::string_view function, double lambda_int);

}  // namespace bomm
