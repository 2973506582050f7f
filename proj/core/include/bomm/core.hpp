#pragma once

// Shared data model: box domains, designs, datasets, the seeded RNG used by
// every stochastic routine, and the unit-cube scaling used for kernel fitting.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace bomm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A coordinate lies outside its box, or dimensions disagree.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Responses contain NaN/inf, duplicate design rows, or similar.
class InvalidDataError : public Error {
public:
    using Error::Error;
};

/// Argument outside the admissible interval of a transform.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Gram matrix could not be factorized even after nugget escalation.
class ConditioningError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DiagnosticError : public Error {
public:
    using Error::Error;
};

/// External objective failed: nonzero exit, timeout, or unparsable output.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Routes library warnings (nugget escalation, clamping, fallback branches).
/// Silent unless a sink is installed or BOMM_VERBOSE is set in the environment.
void warn(const std::string& message);
void set_warning_sink(void (*sink)(const std::string&));

// ---------------------------------------------------------------------------
// Domain

/// Rectangular domain prod_l [lower_l, upper_l].
class Domain {
public:
    Domain() = default;
    Domain(std::vector<double> lower, std::vector<double> upper);

    static Domain unit(std::size_t dims);

    std::size_t dims() const { return lower_.size(); }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    double lower(std::size_t l) const { return lower_[l]; }
    double upper(std::size_t l) const { return upper_[l]; }
    double width(std::size_t l) const { return upper_[l] - lower_[l]; }

    /// prod_{j != l} (U_j - L_j).
    double volume_excluding(std::size_t l) const;
    double volume() const;

    bool contains(const VectorXd& x, double tol = 0.0) const;
    /// Throws DomainError naming the first offending coordinate.
    void check(const VectorXd& x, double tol = 0.0) const;

    bool operator==(const Domain&) const = default;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

/// Component-wise (x_l - L_l) / (U_l - L_l). Throws DomainError outside the box.
VectorXd scale_to_unit(const VectorXd& x, const Domain& dom);
VectorXd unscale_from_unit(const VectorXd& u, const Domain& dom);
MatrixXd scale_rows_to_unit(const MatrixXd& points, const Domain& dom);
MatrixXd unscale_rows_from_unit(const MatrixXd& points, const Domain& dom);

// ---------------------------------------------------------------------------
// Designs and data

/// n x d matrix of design points, one per row, with no duplicated rows.
class DesignMatrix {
public:
    DesignMatrix() = default;
    explicit DesignMatrix(MatrixXd points);

    std::size_t rows() const { return static_cast<std::size_t>(points_.rows()); }
    std::size_t dims() const { return static_cast<std::size_t>(points_.cols()); }
    const MatrixXd& points() const { return points_; }
    VectorXd row(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)).transpose(); }

    /// Throws DomainError if any coordinate leaves the box.
    void check_within(const Domain& dom, double tol = 1e-12) const;

    /// Vertical concatenation; rejects duplicates across the two blocks.
    DesignMatrix append(const DesignMatrix& other) const;

private:
    MatrixXd points_;
};

struct ShiftResult {
    VectorXd shifted;
    double shift = 0.0;
};

/// Adds 1 - min(responses) when min < 1 so that min(shifted) == 1; otherwise
/// returns the responses unchanged with shift 0.
ShiftResult shift_for_positivity(const VectorXd& responses);

/// Observed responses at a design, plus the constant making them >= 1.
class Dataset {
public:
    Dataset() = default;
    /// Computes the shift with shift_for_positivity.
    Dataset(DesignMatrix design, VectorXd responses);
    /// Uses an explicit shift; responses + shift must be strictly positive.
    Dataset(DesignMatrix design, VectorXd responses, double shift);

    const DesignMatrix& design() const { return design_; }
    const VectorXd& responses() const { return responses_; }
    double shift() const { return shift_; }
    VectorXd shifted() const { return responses_.array() + shift_; }
    std::size_t size() const { return static_cast<std::size_t>(responses_.size()); }
    std::size_t dims() const { return design_.dims(); }

    /// FNV-1a over the raw bytes of design and responses.
    std::uint64_t content_hash() const;

private:
    DesignMatrix design_;
    VectorXd responses_;
    double shift_ = 0.0;
};

// ---------------------------------------------------------------------------
// RNG

struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

/// Counter-based generator: output k is a SplitMix64 finalisation of
/// (key(seed, stream) + k * golden). Identical (seed, stream, call sequence)
/// gives identical output on every platform.
class Rng {
public:
    explicit Rng(RngState state = {});
    Rng(std::uint64_t seed, std::uint64_t stream) : Rng(RngState{seed, stream}) {}

    RngState state() const { return state_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n);
    double normal();

    /// Independent child generator for sub-stream `id`.
    Rng split(std::uint64_t id) const;

    template <class It>
    void shuffle(It first, It last) {
        auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            auto j = uniform_int(i);
            std::swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
        }
    }

private:
    RngState state_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace bomm
