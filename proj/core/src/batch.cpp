#include "bomm/batch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bomm {

void BatchConfig::validate() const {
    if (batch_size < 1) throw ParameterError("batch size must be at least 1");
    if (n_ini < 2) throw ParameterError("initial design needs at least two points");
    if (n_ini + batch_size > budget) throw ParameterError("budget must cover the initial design and one batch");
    plus.diagnostic.validate();
}

double expected_improvement(double mean, double var, double best) {
    const double sd = std::sqrt(std::max(var, 0.0));
    const double gain = best - mean;
    if (sd <= 0.0) return std::max(gain, 0.0);
    const double z = gain / sd;
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::acos(-1.0));
    const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
    return gain * cdf + sd * pdf;
}

namespace {

bool has_row(const MatrixXd& points, const VectorXd& x) {
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        if (points.row(i).transpose() == x) return true;
    return false;
}

struct Loop {
    const Objective& objective;
    const Domain& dom;
    BatchTrajectory traj;
    MatrixXd points;
    VectorXd values;

    /// Evaluates and appends rows; false once the objective fails.
    bool evaluate(const MatrixXd& batch) {
        for (Eigen::Index i = 0; i < batch.rows(); ++i) {
            const VectorXd x = batch.row(i).transpose();
            double y = 0.0;
            try {
                y = objective(x);
                if (!std::isfinite(y)) throw EvaluationError("objective returned a non-finite value");
            } catch (const std::exception& e) {
                traj.aborted = true;
                traj.error = e.what();
                return false;
            }
            points.conservativeResize(points.rows() + 1, dom.dims());
            points.row(points.rows() - 1) = x.transpose();
            values.conservativeResize(values.size() + 1);
            values[values.size() - 1] = y;
            ++traj.evaluations;
        }
        return true;
    }

    Dataset dataset() const { return Dataset(DesignMatrix(points), values); }

    void finish() { traj.data = dataset(); }
};

Loop start_loop(const Objective& objective, const Domain& dom, const BatchConfig& cfg, Rng& rng) {
    cfg.validate();
    Loop loop{objective, dom, {}, MatrixXd(0, static_cast<Eigen::Index>(dom.dims())), VectorXd(0)};
    LhdConfig lhd = LhdConfig::defaults(cfg.n_ini, dom.dims());
    if (cfg.maximin_iters > 0) lhd.maximin_iters = cfg.maximin_iters;
    Rng design_rng = rng.split(0);
    loop.evaluate(unscale_rows_from_unit(maximin_lhd(lhd, design_rng), dom));
    return loop;
}

}  // namespace

BatchTrajectory batch_bomm_plus(const Objective& objective, const Domain& dom, const BatchConfig& cfg, Rng& rng) {
    Loop loop = start_loop(objective, dom, cfg, rng);
    std::size_t iteration = 0;
    while (!loop.traj.aborted && loop.traj.evaluations < cfg.budget) {
        const std::size_t b = std::min(cfg.batch_size, cfg.budget - loop.traj.evaluations);
        BatchStep step;
        step.iteration = ++iteration;
        step.n_before = loop.traj.evaluations;
        try {
            Rng fit_rng = rng.split(1000 + 2 * iteration);
            Rng diag_rng = rng.split(1001 + 2 * iteration);
            const FittedTaag model = fit(loop.dataset(), dom, cfg.fit, fit_rng);
            step.estimate = bomm_plus(model, cfg.plus, diag_rng);
        } catch (const Error& e) {
            loop.traj.aborted = true;
            loop.traj.error = e.what();
            break;
        }
        // A repeated estimate carries no new information; explore instead.
        const bool repeat = has_row(loop.points, step.estimate.x_hat);
        const std::size_t n_explore = repeat ? b : b - 1;
        Rng explore_rng = rng.split(2000 + iteration);
        MatrixXd batch(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(dom.dims()));
        Eigen::Index row = 0;
        if (!repeat) batch.row(row++) = step.estimate.x_hat.transpose();
        if (n_explore > 0)
            batch.bottomRows(static_cast<Eigen::Index>(n_explore)) =
                unscale_rows_from_unit(augment_batch(scale_rows_to_unit(loop.points, dom), n_explore, explore_rng), dom);
        const bool ok = loop.evaluate(batch);
        step.evaluations = loop.traj.evaluations;
        step.best_observed = loop.values.size() > 0 ? loop.values.minCoeff() : std::numeric_limits<double>::infinity();
        loop.traj.steps.push_back(std::move(step));
        if (!ok) break;
    }
    if (!loop.traj.aborted) {
        try {
            Rng fit_rng = rng.split(1);
            Rng diag_rng = rng.split(2);
            const FittedTaag model = fit(loop.dataset(), dom, cfg.fit, fit_rng);
            loop.traj.final_estimate = bomm_plus(model, cfg.plus, diag_rng);
        } catch (const Error& e) {
            loop.traj.error = e.what();
        }
    }
    loop.finish();
    return std::move(loop.traj);
}

BatchTrajectory batch_ei(const Objective& objective, const Domain& dom, const BatchConfig& cfg, Rng& rng) {
    Loop loop = start_loop(objective, dom, cfg, rng);
    FitConfig fit_cfg = cfg.fit;
    fit_cfg.kind = SurrogateKind::sqexp;
    const auto d = static_cast<Eigen::Index>(dom.dims());
    std::size_t iteration = 0;
    while (!loop.traj.aborted && loop.traj.evaluations < cfg.budget) {
        const std::size_t b = std::min(cfg.batch_size, cfg.budget - loop.traj.evaluations);
        BatchStep step;
        step.iteration = ++iteration;
        step.n_before = loop.traj.evaluations;
        MatrixXd batch(static_cast<Eigen::Index>(b), d);
        try {
            Rng fit_rng = rng.split(1000 + 2 * iteration);
            Rng cand_rng = rng.split(1001 + 2 * iteration);
            const Dataset data = loop.dataset();
            FittedTaag model = fit(data, dom, fit_cfg, fit_rng);
            MatrixXd believed = loop.points;
            VectorXd believed_y = loop.values;
            const double best = model.latent().minCoeff();
            for (std::size_t j = 0; j < b; ++j) {
                double best_ei = -1.0;
                VectorXd best_u = VectorXd::Zero(d);
                for (std::size_t c = 0; c < cfg.ei_candidates; ++c) {
                    VectorXd u(d);
                    for (Eigen::Index l = 0; l < d; ++l) u[l] = cand_rng.uniform();
                    const PosteriorH ph = posterior_h_unit(model, u);
                    const double ei = expected_improvement(ph.mean, ph.var, best);
                    if (ei > best_ei) {
                        best_ei = ei;
                        best_u = u;
                    }
                }
                const VectorXd x = unscale_from_unit(best_u, dom);
                batch.row(static_cast<Eigen::Index>(j)) = x.transpose();
                if (j + 1 == b) break;
                // Kriging believer: pretend the posterior mean was observed.
                const double y_hat = std::max(posterior_f_mean(model, x), 1e-9 - data.shift());
                believed.conservativeResize(believed.rows() + 1, d);
                believed.row(believed.rows() - 1) = x.transpose();
                believed_y.conservativeResize(believed_y.size() + 1);
                believed_y[believed_y.size() - 1] = y_hat;
                model = condition(Dataset(DesignMatrix(believed), believed_y, data.shift()), dom, model.params(),
                                  cfg.fit.base_nugget, SurrogateKind::sqexp);
            }
        } catch (const Error& e) {
            loop.traj.aborted = true;
            loop.traj.error = e.what();
            break;
        }
        const bool ok = loop.evaluate(batch);
        step.estimate = pick_the_winner(loop.dataset());
        step.evaluations = loop.traj.evaluations;
        step.best_observed = loop.values.minCoeff();
        loop.traj.steps.push_back(std::move(step));
        if (!ok) break;
    }
    loop.finish();
    return std::move(loop.traj);
}

}  // namespace bomm
