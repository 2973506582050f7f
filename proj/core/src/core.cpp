#include "bomm/core.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <limits>
#include <sstream>

namespace bomm {

namespace {

void default_sink(const std::string& message) {
    static const bool verbose = std::getenv("BOMM_VERBOSE") != nullptr;
    if (verbose) std::cerr << "bomm: warning: " << message << '\n';
}

void (*g_sink)(const std::string&) = &default_sink;

}  // namespace

void warn(const std::string& message) { g_sink(message); }

void set_warning_sink(void (*sink)(const std::string&)) { g_sink = sink ? sink : &default_sink; }

// ---------------------------------------------------------------------------

Domain::Domain(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty()) throw DomainError("domain must have at least one dimension");
    if (lower_.size() != upper_.size()) throw DomainError("domain lower/upper size mismatch");
    for (std::size_t l = 0; l < lower_.size(); ++l) {
        if (!std::isfinite(lower_[l]) || !std::isfinite(upper_[l]) || !(lower_[l] < upper_[l])) {
            std::ostringstream os;
            os << "domain dimension " << l << " requires finite lower < upper, got [" << lower_[l]
               << ", " << upper_[l] << "]";
            throw DomainError(os.str());
        }
    }
}

Domain Domain::unit(std::size_t dims) {
    return Domain(std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0));
}

double Domain::volume_excluding(std::size_t l) const {
    double v = 1.0;
    for (std::size_t j = 0; j < dims(); ++j)
        if (j != l) v *= width(j);
    return v;
}

double Domain::volume() const {
    double v = 1.0;
    for (std::size_t j = 0; j < dims(); ++j) v *= width(j);
    return v;
}

bool Domain::contains(const VectorXd& x, double tol) const {
    if (static_cast<std::size_t>(x.size()) != dims()) return false;
    for (std::size_t l = 0; l < dims(); ++l) {
        const double slack = tol * width(l);
        if (!(x[static_cast<Eigen::Index>(l)] >= lower_[l] - slack) ||
            !(x[static_cast<Eigen::Index>(l)] <= upper_[l] + slack))
            return false;
    }
    return true;
}

void Domain::check(const VectorXd& x, double tol) const {
    if (static_cast<std::size_t>(x.size()) != dims()) {
        std::ostringstream os;
        os << "point has " << x.size() << " coordinates, domain has " << dims();
        throw DomainError(os.str());
    }
    for (std::size_t l = 0; l < dims(); ++l) {
        const double v = x[static_cast<Eigen::Index>(l)];
        const double slack = tol * width(l);
        if (!(v >= lower_[l] - slack) || !(v <= upper_[l] + slack)) {
            std::ostringstream os;
            os << "coordinate " << l << " = " << v << " outside [" << lower_[l] << ", " << upper_[l]
               << "]";
            throw DomainError(os.str());
        }
    }
}

VectorXd scale_to_unit(const VectorXd& x, const Domain& dom) {
    dom.check(x);
    VectorXd u(x.size());
    for (Eigen::Index l = 0; l < x.size(); ++l) {
        const auto k = static_cast<std::size_t>(l);
        u[l] = (x[l] - dom.lower(k)) / dom.width(k);
    }
    return u;
}

VectorXd unscale_from_unit(const VectorXd& u, const Domain& dom) {
    if (static_cast<std::size_t>(u.size()) != dom.dims()) throw DomainError("dimension mismatch in unscale");
    VectorXd x(u.size());
    for (Eigen::Index l = 0; l < u.size(); ++l) {
        const auto k = static_cast<std::size_t>(l);
        // Endpoints map exactly onto the box corners.
        if (u[l] == 0.0)
            x[l] = dom.lower(k);
        else if (u[l] == 1.0)
            x[l] = dom.upper(k);
        else
            x[l] = dom.lower(k) + u[l] * dom.width(k);
    }
    return x;
}

MatrixXd scale_rows_to_unit(const MatrixXd& points, const Domain& dom) {
    MatrixXd out(points.rows(), points.cols());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        out.row(i) = scale_to_unit(points.row(i).transpose(), dom).transpose();
    return out;
}

MatrixXd unscale_rows_from_unit(const MatrixXd& points, const Domain& dom) {
    MatrixXd out(points.rows(), points.cols());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        out.row(i) = unscale_from_unit(points.row(i).transpose(), dom).transpose();
    return out;
}

// ---------------------------------------------------------------------------

namespace {

void reject_duplicates(const MatrixXd& p) {
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = i + 1; j < p.rows(); ++j)
            if (p.row(i) == p.row(j)) {
                std::ostringstream os;
                os << "design rows " << i << " and " << j << " are identical";
                throw InvalidDataError(os.str());
            }
}

}  // namespace

DesignMatrix::DesignMatrix(MatrixXd points) : points_(std::move(points)) {
    if (!points_.allFinite()) throw InvalidDataError("design contains non-finite coordinates");
    reject_duplicates(points_);
}

void DesignMatrix::check_within(const Domain& dom, double tol) const {
    if (rows() == 0) return;
    if (dims() != dom.dims()) throw DomainError("design and domain dimensions differ");
    for (std::size_t i = 0; i < rows(); ++i) dom.check(row(i), tol);
}

DesignMatrix DesignMatrix::append(const DesignMatrix& other) const {
    if (rows() == 0) return other;
    if (other.rows() == 0) return *this;
    if (dims() != other.dims()) throw DomainError("cannot append designs of different dimension");
    MatrixXd joined(points_.rows() + other.points_.rows(), points_.cols());
    joined << points_, other.points_;
    return DesignMatrix(std::move(joined));
}

ShiftResult shift_for_positivity(const VectorXd& responses) {
    if (responses.size() == 0) throw InvalidDataError("no responses to shift");
    if (!responses.allFinite()) throw InvalidDataError("responses contain NaN or infinity");
    const double lo = responses.minCoeff();
    ShiftResult r;
    r.shift = lo >= 1.0 ? 0.0 : 1.0 - lo;
    r.shifted = responses.array() + r.shift;
    // 1 - lo can round so that lo + shift lands just under 1.
    while (r.shifted.minCoeff() < 1.0) {
        r.shift = std::nextafter(r.shift, std::numeric_limits<double>::infinity());
        r.shifted = responses.array() + r.shift;
    }
    return r;
}

Dataset::Dataset(DesignMatrix design, VectorXd responses)
    : design_(std::move(design)), responses_(std::move(responses)) {
    if (design_.rows() != size()) throw InvalidDataError("design rows and responses differ in length");
    if (size() > 0) shift_ = shift_for_positivity(responses_).shift;
}

Dataset::Dataset(DesignMatrix design, VectorXd responses, double shift)
    : design_(std::move(design)), responses_(std::move(responses)), shift_(shift) {
    if (design_.rows() != size()) throw InvalidDataError("design rows and responses differ in length");
    if (!responses_.allFinite()) throw InvalidDataError("responses contain NaN or infinity");
    if (!(shift_ >= 0.0) || !std::isfinite(shift_)) throw InvalidDataError("shift must be finite and >= 0");
    if (size() > 0 && !(responses_.minCoeff() + shift_ > 0.0))
        throw InvalidDataError("shifted responses must be strictly positive");
}

std::uint64_t Dataset::content_hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const double* data, Eigen::Index count) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(data);
        for (std::size_t b = 0; b < static_cast<std::size_t>(count) * sizeof(double); ++b) {
            h ^= bytes[b];
            h *= 1099511628211ULL;
        }
    };
    mix(design_.points().data(), design_.points().size());
    mix(responses_.data(), responses_.size());
    return h;
}

// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng::Rng(RngState state) : state_(state) {
    key_ = splitmix64(splitmix64(state.seed) ^ (state.stream * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL));
}

std::uint64_t Rng::next_u64() {
    ++counter_;
    return splitmix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
}

double Rng::uniform() {
    // (k + 0.5) / 2^53 never hits 0 or 1.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == 0) throw ParameterError("uniform_int requires n > 0");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

double Rng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Rng Rng::split(std::uint64_t id) const {
    return Rng(RngState{state_.seed, splitmix64(state_.stream ^ splitmix64(id + 0x5851F42D4C957F2DULL))});
}

}  // namespace bomm
