#include "bomm/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bomm {

namespace {

std::size_t bin_of(double x, std::size_t n) {
    const double scaled = std::floor(x * static_cast<double>(n));
    if (scaled < 0.0) return 0;
    return std::min(static_cast<std::size_t>(scaled), n - 1);
}

/// Coordinate inside bin k whose bin_of() is exactly k.
double place_in_bin(std::size_t k, double offset, std::size_t n) {
    double x = (static_cast<double>(k) + offset) / static_cast<double>(n);
    while (bin_of(x, n) > k) x = std::nextafter(x, 0.0);
    while (bin_of(x, n) < k) x = std::nextafter(x, 1.0);
    return x;
}

double sq_dist(const MatrixXd& p, Eigen::Index i, Eigen::Index j) {
    return (p.row(i) - p.row(j)).squaredNorm();
}

}  // namespace

LhdConfig LhdConfig::defaults(std::size_t n, std::size_t d) {
    LhdConfig c;
    c.n = n;
    c.d = d;
    c.maximin_iters = 10000 * d;
    c.restarts = 5;
    return c;
}

void LhdConfig::validate() const {
    if (n < 2) throw ParameterError("LHD needs n >= 2");
    if (d < 1) throw ParameterError("LHD needs d >= 1");
    if (restarts < 1) throw ParameterError("LHD needs at least one restart");
}

MatrixXd random_lhd(std::size_t n, std::size_t d, Rng& rng, bool centered) {
    if (d < 1) throw ParameterError("random_lhd needs d >= 1");
    MatrixXd points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<std::size_t> perm(n);
    for (std::size_t l = 0; l < d; ++l) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(perm.begin(), perm.end());
        for (std::size_t i = 0; i < n; ++i) {
            const double offset = centered ? 0.5 : rng.uniform();
            points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = place_in_bin(perm[i], offset, n);
        }
    }
    return points;
}

double min_pairwise_distance(const MatrixXd& points) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        for (Eigen::Index j = i + 1; j < points.rows(); ++j) best = std::min(best, sq_dist(points, i, j));
    return std::sqrt(best);
}

bool is_latin_hypercube(const MatrixXd& points) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (n == 0) return true;
    std::vector<char> seen(n);
    for (Eigen::Index l = 0; l < points.cols(); ++l) {
        std::fill(seen.begin(), seen.end(), 0);
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            const double x = points(i, l);
            if (!(x >= 0.0 && x <= 1.0)) return false;
            const auto b = bin_of(x, n);
            if (seen[b]) return false;
            seen[b] = 1;
        }
    }
    return true;
}

MatrixXd maximin_lhd(const LhdConfig& cfg, Rng& rng, MaximinTrace* trace) {
    cfg.validate();
    MatrixXd best = random_lhd(cfg.n, cfg.d, rng, cfg.centered);
    double best_dist = min_pairwise_distance(best);
    for (std::size_t r = 1; r < cfg.restarts; ++r) {
        MatrixXd cand = random_lhd(cfg.n, cfg.d, rng, cfg.centered);
        const double dist = min_pairwise_distance(cand);
        if (dist > best_dist) {
            best = std::move(cand);
            best_dist = dist;
        }
    }
    if (trace) trace->min_distance.assign(1, best_dist);
    if (cfg.maximin_iters == 0) return best;

    const auto n = static_cast<Eigen::Index>(cfg.n);
    MatrixXd& p = best;
    MatrixXd d2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d2(i, i) = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = i + 1; j < n; ++j) d2(i, j) = d2(j, i) = sq_dist(p, i, j);
    }
    auto locate_min = [&](Eigen::Index& mi, Eigen::Index& mj) {
        double m = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j)
                if (d2(i, j) < m) {
                    m = d2(i, j);
                    mi = i;
                    mj = j;
                }
        return m;
    };
    Eigen::Index min_i = 0, min_j = 1;
    double cur_min = locate_min(min_i, min_j);

    VectorXd new_a(n), new_b(n);
    for (std::size_t it = 0; it < cfg.maximin_iters; ++it) {
        const auto a = static_cast<Eigen::Index>(rng.uniform_int(cfg.n));
        auto b = static_cast<Eigen::Index>(rng.uniform_int(cfg.n - 1));
        if (b >= a) ++b;
        const auto c = static_cast<Eigen::Index>(rng.uniform_int(cfg.d));

        const double xa = p(a, c), xb = p(b, c);
        p(a, c) = xb;
        p(b, c) = xa;
        bool ok = true;
        for (Eigen::Index j = 0; j < n && ok; ++j) {
            if (j == a || j == b) continue;
            new_a[j] = sq_dist(p, a, j);
            new_b[j] = sq_dist(p, b, j);
            if (new_a[j] < cur_min || new_b[j] < cur_min) ok = false;
        }
        if (!ok) {
            p(a, c) = xa;
            p(b, c) = xb;
            continue;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == a || j == b) continue;
            d2(a, j) = d2(j, a) = new_a[j];
            d2(b, j) = d2(j, b) = new_b[j];
        }
        // Every new distance is >= cur_min, so the minimum can only move when
        // the current minimising pair was touched.
        if (min_i == a || min_i == b || min_j == a || min_j == b) cur_min = locate_min(min_i, min_j);
        if (trace) trace->min_distance.push_back(std::sqrt(cur_min));
    }
    return best;
}

MatrixXd augment_batch(const MatrixXd& existing, std::size_t count, Rng& rng) {
    const auto d = static_cast<std::size_t>(existing.cols());
    if (d == 0) throw ParameterError("augment_batch needs a design with at least one column");
    if (count == 0) return MatrixXd(0, existing.cols());
    return random_lhd(count, d, rng);
}

}  // namespace bomm
