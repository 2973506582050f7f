#pragma once

// Batch-sequential designs: each batch holds the current BOMM+ estimate plus
// random Latin hypercube exploration points. A greedy expected-improvement
// loop on a squared-exponential GP serves as the baseline.

#include <string>
#include <vector>

#include "bomm/design.hpp"
#include "bomm/estimators.hpp"
#include "bomm/testbed.hpp"

namespace bomm {

struct BatchConfig {
    std::size_t n_ini = 35;
    std::size_t batch_size = 5;
    std::size_t budget = 70;
    /// Swap iterations for the initial maximin design (0: 10,000 * d).
    std::size_t maximin_iters = 0;
    PlusConfig plus;
    FitConfig fit;
    /// Random candidates per EI step (baseline only).
    std::size_t ei_candidates = 2000;

    void validate() const;
};

struct BatchStep {
    std::size_t iteration = 0;
    /// Observations available when the batch was chosen.
    std::size_t n_before = 0;
    EstimatorResult estimate;
    /// Total evaluations once the batch is done.
    std::size_t evaluations = 0;
    /// Best response observed after evaluating the batch.
    double best_observed = 0.0;
};

struct BatchTrajectory {
    std::vector<BatchStep> steps;
    /// Estimate from the final dataset (absent for the baseline or when aborted).
    std::optional<EstimatorResult> final_estimate;
    Dataset data;
    std::size_t evaluations = 0;
    bool aborted = false;
    std::string error;
};

/// Runs until the budget is spent; the last batch shrinks if needed. An
/// objective failure stops the loop and returns the partial trajectory.
BatchTrajectory batch_bomm_plus(const Objective& objective, const Domain& dom, const BatchConfig& cfg, Rng& rng);

/// Greedy batch expected improvement with the kriging believer.
BatchTrajectory batch_ei(const Objective& objective, const Domain& dom, const BatchConfig& cfg, Rng& rng);

/// Expected improvement below `best` for a Gaussian with the given moments.
double expected_improvement(double mean, double var, double best);

}  // namespace bomm
