#pragma once

// Latin hypercube designs on the unit cube: plain random LHDs and maximin
// LHDs improved by within-column swap search.

#include <cstddef>
#include <vector>

#include "bomm/core.hpp"

namespace bomm {

struct LhdConfig {
    std::size_t n = 0;
    std::size_t d = 0;
    /// Swap-search iterations; 0 keeps the best random restart as is.
    std::size_t maximin_iters = 0;
    std::size_t restarts = 5;
    /// Place points at bin centres instead of uniformly inside their bin.
    bool centered = false;

    /// 10,000 * d swap iterations and 5 restarts.
    static LhdConfig defaults(std::size_t n, std::size_t d);
    void validate() const;
};

struct MaximinTrace {
    /// Minimum pairwise distance after each accepted swap (first entry: start).
    std::vector<double> min_distance;
};

MatrixXd random_lhd(std::size_t n, std::size_t d, Rng& rng, bool centered = false);

MatrixXd maximin_lhd(const LhdConfig& cfg, Rng& rng, MaximinTrace* trace = nullptr);

/// Exploration points for one batch: a fresh random LHD of `count` rows,
/// independent of the existing design.
MatrixXd augment_batch(const MatrixXd& existing, std::size_t count, Rng& rng);

/// Smallest pairwise Euclidean distance between rows (infinity for n < 2).
double min_pairwise_distance(const MatrixXd& points);

/// True when every column of a unit-cube design has exactly one point per
/// bin [(i-1)/n, i/n).
bool is_latin_hypercube(const MatrixXd& points);

}  // namespace bomm
