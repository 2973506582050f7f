#pragma once

// Replicated one-shot experiments: every method sees the same maximin LHD
// dataset per replication, and results are scored against a cached
// reference minimum.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bomm/estimators.hpp"
#include "bomm/external.hpp"
#include "bomm/testbed.hpp"

namespace bomm {

struct ExperimentConfig {
    /// Test function name (ignored when `external` is set).
    std::string function;
    double lambda_int = 0.0;
    std::optional<ExternalConfig> external;
    /// Domain of the external objective.
    Domain external_domain;
    /// Sample size; 0 means 10 * d.
    std::size_t n = 0;
    std::vector<Method> methods;
    std::size_t replications = 20;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    /// Adds wall_ms to each record (breaks byte-identical reruns).
    bool timing = false;
    /// Reference minima; gaps are only reported when an entry exists.
    std::string oracle_path;
    bool require_oracle = true;
    /// 0: 10,000 * d swap iterations.
    std::size_t maximin_iters = 0;
    FitConfig fit;
    PlusConfig plus;
    SearchConfig search;

    std::size_t dims() const;
    std::size_t sample_size() const { return n ? n : 10 * dims(); }
    void validate() const;
};

struct RunRecord {
    Method method = Method::pw;
    std::uint64_t seed = 0;
    std::string function;
    double lambda_int = 0.0;
    VectorXd x_hat;
    std::optional<double> f_at_x_hat;
    std::optional<double> gap;
    std::optional<double> xi;
    std::optional<double> alpha_star;
    Branch branch = Branch::none;
    std::optional<double> wall_ms;
    /// Non-empty when the method failed for this replication.
    std::string error;
};

struct GapSummary {
    Method method = Method::pw;
    std::size_t count = 0;
    std::vector<double> gaps;
    std::vector<double> log_gaps;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double median_log_gap = 0.0;
    /// Objective values at the estimates (used when no reference exists).
    std::vector<double> values;
    double median_value = 0.0;
    std::size_t failures = 0;
};

struct ExperimentResult {
    std::vector<RunRecord> records;
    std::vector<GapSummary> summaries;
    std::optional<double> f_opt;

    const GapSummary* summary(Method m) const;
};

constexpr double kLogGapFloor = 1e-12;

/// Linear-interpolation quantile of unsorted data (p in [0, 1]).
double quantile(std::vector<double> values, double p);

ExperimentResult run_experiment(const ExperimentConfig& cfg);
/// Same protocol against an external command; no gaps, best values only.
ExperimentResult run_external(const ExternalConfig& command, const Domain& dom, ExperimentConfig cfg);

/// Records sorted by (method, seed) in canonical order.
std::vector<GapSummary> summarize(std::vector<RunRecord> records);

void write_records_jsonl(std::ostream& os, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_jsonl(std::istream& is);
/// Per-method CSV: method,count,failures,median_gap,q1_gap,q3_gap,median_log_gap,median_f.
void write_summary_csv(std::ostream& os, const std::vector<GapSummary>& summaries);

struct BranchRate {
    double lambda_int = 0.0;
    std::size_t replications = 0;
    std::size_t tail_count = 0;
    double rate = 0.0;
    std::vector<RunRecord> records;
};

struct NonadditivityConfig {
    std::vector<double> lambda_ints{0.05, 0.3, 0.5};
    std::size_t n = 90;
    std::size_t replications = 10;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::size_t maximin_iters = 0;
    FitConfig fit;
    PlusConfig plus;
};

/// Fraction of replications in which the tail branch is taken on custom_exp.
std::vector<BranchRate> run_nonadditivity_suite(const NonadditivityConfig& cfg);
void write_branch_rates_csv(std::ostream& os, const std::vector<BranchRate>& rates);

}  // namespace bomm
