#include <gtest/gtest.h>

#include <cmath>

#include "bomm/box_cox.hpp"
#include "bomm/design.hpp"
#include "bomm/estimators.hpp"
#include "generators.hpp"

using namespace bomm;

namespace {

Dataset tiny(std::initializer_list<double> ys) {
    const auto n = static_cast<Eigen::Index>(ys.size());
    MatrixXd X(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) X(i, 0) = 0.1 * static_cast<double>(i + 1);
    VectorXd y(n);
    Eigen::Index i = 0;
    for (double v : ys) y[i++] = v;
    return Dataset(DesignMatrix(X), y);
}

FittedTaag fit_on(const Domain& dom, std::size_t n, const std::function<double(const VectorXd&)>& f,
                  std::uint64_t seed, SurrogateKind kind = SurrogateKind::taag) {
    Rng rng(seed, 0);
    const auto data = bomm::testing::random_dataset(rng, dom, n, f);
    FitConfig cfg;
    cfg.kind = kind;
    Rng fr = rng.split(1);
    return fit(data, dom, cfg, fr);
}

// Same instance with input dimensions reordered by `perm`.
FittedTaag permuted(const FittedTaag& m, const std::vector<int>& perm) {
    const auto d = static_cast<Eigen::Index>(perm.size());
    std::vector<double> lo(perm.size()), hi(perm.size());
    MatrixXd X(m.data().design().points().rows(), d);
    TaagParams p = m.params();
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto src = static_cast<std::size_t>(perm[static_cast<std::size_t>(j)]);
        const auto si = static_cast<Eigen::Index>(src);
        lo[static_cast<std::size_t>(j)] = m.domain().lower(src);
        hi[static_cast<std::size_t>(j)] = m.domain().upper(src);
        X.col(j) = m.data().design().points().col(si);
        p.kernel.w[j] = m.params().kernel.w[si];
        p.kernel.theta_A[j] = m.params().kernel.theta_A[si];
        p.kernel.theta_Z[j] = m.params().kernel.theta_Z[si];
    }
    return condition(Dataset(DesignMatrix(X), m.data().responses()), Domain(lo, hi), p);
}

}  // namespace

TEST(Method, NamesRoundTrip) {
    for (auto m : {Method::pw, Method::sbo_sqexp, Method::sbo_taag, Method::sbo_tag, Method::bomm, Method::bomm_tail,
                   Method::bomm_plus})
        EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_EQ(parse_method("bomm-plus"), Method::bomm_plus);
    EXPECT_EQ(parse_method("sbo-sqexp"), Method::sbo_sqexp);
    EXPECT_THROW(parse_method("nope"), ParameterError);
    const auto list = parse_methods("pw,bomm-plus,pw");
    ASSERT_EQ(list.size(), 2u);
    EXPECT_EQ(list[1], Method::bomm_plus);
}

TEST(PickTheWinner, Examples) {
    EXPECT_EQ(pick_the_winner(tiny({3, 1, 2})).x_hat[0], 0.2);
    EXPECT_EQ(pick_the_winner(tiny({4})).x_hat[0], 0.1);
    EXPECT_EQ(pick_the_winner(tiny({1, 1})).x_hat[0], 0.1);
    EXPECT_EQ(*pick_the_winner(tiny({3, 1, 2})).f_at_x_hat, 1.0);
    EXPECT_THROW(pick_the_winner(Dataset()), InvalidDataError);
}

TEST(PickTheWinner, InvariantUnderIncreasingTransformProperty) {
    Rng rng(1, 0);
    for (int k = 0; k < 100; ++k) {
        const Domain dom = bomm::testing::random_domain(rng, 3);
        const auto data = bomm::testing::random_dataset(rng, dom, 2 + rng.uniform_int(20));
        const VectorXd g = (data.responses().array() * 3.0).exp() - 7.0;
        const Dataset other(data.design(), g);
        const auto a = pick_the_winner(data), b = pick_the_winner(other);
        EXPECT_EQ(a.x_hat, b.x_hat);
        EXPECT_EQ(*a.f_at_x_hat, data.responses().minCoeff());
    }
}

TEST(Sbo, RecoversConvexMinimum) {
    const Domain dom({-1.0, -1.0}, {1.0, 1.0});
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = fit_on(dom, 30, [](const VectorXd& x) { return x.squaredNorm(); }, 300 + seed);
        Rng rng(seed, 5);
        const auto r = sbo_optimize(m, SearchConfig{}, rng);
        EXPECT_EQ(r.method, Method::sbo_taag);
        hits += r.x_hat.norm() < 0.1;
    }
    EXPECT_GE(hits, 8);
}

TEST(Sbo, DescentFromTheOptimumNeverWorse) {
    const Domain dom({-1.0, -1.0}, {1.0, 1.0});
    const auto m = fit_on(dom, 20, [](const VectorXd& x) { return x.squaredNorm(); }, 400);
    SearchConfig cfg;
    cfg.starts = 1;
    cfg.initial_points = {VectorXd::Zero(2)};
    Rng rng(1, 0);
    const auto r = sbo_optimize(m, cfg, rng);
    EXPECT_LE(posterior_f_mean(m, r.x_hat), posterior_f_mean(m, VectorXd::Zero(2)));
}

TEST(Sbo, Deterministic) {
    Rng g(2, 0);
    const auto inst = bomm::testing::random_instance(g, 10, 3, 0.4);
    Rng a(3, 0), b(3, 0);
    EXPECT_EQ(sbo_optimize(inst.model, SearchConfig{}, a).x_hat, sbo_optimize(inst.model, SearchConfig{}, b).x_hat);
}

TEST(Bomm, SingleBumpGoesToFarEndpoints) {
    MatrixXd X(1, 3);
    X << 0.2, 0.7, 0.5;
    const Dataset data(DesignMatrix(X), VectorXd::Constant(1, 2.0), 0.0);
    TaagParams p;
    p.mu = BoxCox(1.0).inverse(2.0) - 1.0;
    p.eta = 0.0;
    p.kernel = KernelParams::uniform(3, 0.3, 0.3);
    const auto m = condition(data, Domain({0.0, 0.0, 0.0}, {1.0, 1.0, 2.0}), p);
    const auto r = bomm::bomm(m);
    EXPECT_EQ(r.x_hat[0], 1.0);
    EXPECT_EQ(r.x_hat[1], 0.0);
    EXPECT_EQ(r.x_hat[2], 2.0);
    EXPECT_EQ(r.method, Method::bomm);
}

TEST(Bomm, RecoversAdditiveMinimum) {
    const Domain dom = Domain::unit(3);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = fit_on(dom, 60, [](const VectorXd& x) { return (x.array() - 0.5).square().sum(); }, 500 + seed,
                              SurrogateKind::tag);
        ASSERT_EQ(m.params().eta, 0.0);
        const auto r = bomm::bomm(m);
        hits += ((r.x_hat.array() - 0.5).abs() <= 0.05).all();
    }
    EXPECT_GE(hits, 8);
}

TEST(Bomm, PermutingInputsPermutesOutput) {
    Rng rng(6, 0);
    for (int k = 0; k < 10; ++k) {
        const auto inst = bomm::testing::random_instance(rng, 9, 4, rng.uniform());
        const std::vector<int> perm{2, 0, 3, 1};
        const auto a = bomm::bomm(inst.model, 501);
        const auto b = bomm::bomm(permuted(inst.model, perm), 501);
        for (int j = 0; j < 4; ++j) EXPECT_NEAR(b.x_hat[j], a.x_hat[perm[static_cast<std::size_t>(j)]], 1e-12);
    }
}

TEST(BommTail, AlphaOneReproducesBomm) {
    Rng rng(7, 0);
    for (int k = 0; k < 10; ++k) {
        const auto inst = bomm::testing::random_instance(rng, 8, 3, rng.uniform());
        EXPECT_EQ(bomm_tail(inst.model, 1.0).x_hat, bomm::bomm(inst.model).x_hat);
    }
}

TEST(BommTail, GuardsAlpha) {
    Rng rng(8, 0);
    const auto inst = bomm::testing::random_instance(rng, 5, 2, 0.5);
    EXPECT_THROW(bomm_tail(inst.model, 5e-4), ParameterError);
    EXPECT_THROW(bomm_tail(inst.model, 0.0), ParameterError);
    EXPECT_NO_THROW(bomm_tail(inst.model, 1e-3));
}

TEST(BommTail, MinimisesClosedFormOnGrid) {
    Rng rng(9, 0);
    const auto inst = bomm::testing::random_instance(rng, 10, 3, 0.7);
    const auto tail = TailParams::make(0.3);
    const auto r = bomm_tail(inst.model, 0.3, 401);
    EXPECT_EQ(*r.alpha_star, 0.3);
    for (std::size_t l = 0; l < 3; ++l) {
        const auto grid = uniform_grid(inst.dom.lower(l), inst.dom.upper(l), 401);
        const MarginalEvaluator ev(inst.model, l);
        std::vector<double> vals;
        for (double x : grid) vals.push_back(ev.objective(x) - std::sqrt(ev.variance(x)) * tail.correction());
        EXPECT_EQ(r.x_hat[static_cast<Eigen::Index>(l)], grid[argmin_index(vals)]);
    }
}

TEST(SelectAlpha, Singleton) {
    Rng rng(10, 0);
    const auto inst = bomm::testing::random_instance(rng, 6, 2, 0.5);
    EXPECT_EQ(select_alpha(inst.model, {1.0}), 1.0);
}

TEST(SelectAlpha, ConstantMeanTakesLargestAlpha) {
    TaagParams p;
    p.kernel = KernelParams::uniform(2);
    p.eta = 0.5;
    const auto m = condition(Dataset(), Domain::unit(2), p);
    EXPECT_EQ(select_alpha(m, {0.1, 0.5, 0.9, 0.3}, 101), 0.9);
}

TEST(SelectAlpha, MatchesExhaustiveGrid) {
    Rng rng(11, 0);
    const std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    for (int k = 0; k < 5; ++k) {
        const auto inst = bomm::testing::random_instance(rng, 10, 3, 0.8);
        const double chosen = select_alpha(inst.model, grid, 201);
        double best = std::numeric_limits<double>::infinity();
        double chosen_value = 0.0;
        for (double a : grid) {
            const double v = posterior_h(inst.model, bomm_tail(inst.model, a, 201).x_hat).mean;
            best = std::min(best, v);
            if (a == chosen) chosen_value = v;
        }
        EXPECT_EQ(chosen_value, best);
    }
}

TEST(EtaDiagnostic, DegenerateKernelsGiveBetaTwoTwo) {
    // One dimension with w = 1 and equal length-scales: R_A == R_Z.
    Rng rng(12, 0);
    const Domain dom = Domain::unit(1);
    const auto data = bomm::testing::random_dataset(rng, dom, 6);
    TaagParams p;
    p.kernel = KernelParams::uniform(1, 0.4, 0.4);
    p.eta = 0.5;
    const auto m = condition(data, dom, p);
    ASSERT_EQ(m.gram_A(), m.gram_Z());
    DiagnosticConfig cfg;
    cfg.n_is = 10000;
    cfg.delta = 1.0;
    Rng is(13, 0);
    EXPECT_NEAR(eta_diagnostic(m, cfg, is), 1.0 - (3 * 0.16 - 2 * 0.064), 0.02);
}

TEST(EtaDiagnostic, ThresholdExtremes) {
    Rng rng(14, 0);
    const auto inst = bomm::testing::random_instance(rng, 8, 2, 0.3);
    DiagnosticConfig cfg;
    cfg.T = 0.0;
    Rng a(1, 0);
    EXPECT_EQ(eta_diagnostic(inst.model, cfg, a), 1.0);
    cfg.T = 1.0;
    Rng b(1, 0);
    EXPECT_EQ(eta_diagnostic(inst.model, cfg, b), 0.0);
}

TEST(EtaDiagnostic, ProbabilityInUnitIntervalProperty) {
    Rng rng(15, 0);
    for (int k = 0; k < 20; ++k) {
        const auto inst = bomm::testing::random_instance(rng, 2 + rng.uniform_int(10), 1 + rng.uniform_int(3), rng.uniform());
        DiagnosticConfig cfg;
        cfg.n_is = 200;
        Rng is(k, 1);
        const double xi = eta_diagnostic(inst.model, cfg, is);
        EXPECT_GE(xi, 0.0);
        EXPECT_LE(xi, 1.0);
    }
}

TEST(EtaDiagnostic, ConfigValidation) {
    DiagnosticConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.T, 0.4);
    EXPECT_EQ(cfg.rho, 0.3);
    cfg.n_is = 50;
    EXPECT_THROW(cfg.validate(), ParameterError);
    cfg = DiagnosticConfig{};
    cfg.rho = 1.0;
    EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(BommPlus, BranchRule) {
    EXPECT_TRUE(take_bomm_branch(0.5, 0.3));
    EXPECT_FALSE(take_bomm_branch(0.9, 0.3));
    EXPECT_TRUE(take_bomm_branch(1.0 - 0.3, 0.3));
    Rng rng(16, 0);
    for (int k = 0; k < 1000; ++k) {
        const double xi = rng.uniform(), rho = rng.uniform();
        EXPECT_EQ(take_bomm_branch(xi, rho), xi <= 1.0 - rho);
    }
}

TEST(BommPlus, FollowsDiagnosticBranches) {
    Rng rng(17, 0);
    const auto inst = bomm::testing::random_instance(rng, 10, 3, 0.5);
    PlusConfig cfg;
    cfg.grid_size = 201;
    cfg.diagnostic.T = 1.0;  // xi == 0: plain branch
    Rng a(1, 0);
    const auto plain = bomm_plus(inst.model, cfg, a);
    EXPECT_EQ(plain.method, Method::bomm_plus);
    EXPECT_EQ(plain.branch, Branch::bomm);
    ASSERT_TRUE(plain.xi);
    EXPECT_EQ(*plain.xi, 0.0);
    EXPECT_FALSE(plain.alpha_star);
    EXPECT_EQ(plain.x_hat, bomm::bomm(inst.model, 201).x_hat);

    cfg.diagnostic.T = 0.0;  // xi == 1: tail branch
    Rng b(1, 0);
    const auto tail = bomm_plus(inst.model, cfg, b);
    EXPECT_EQ(tail.branch, Branch::tail);
    EXPECT_EQ(*tail.xi, 1.0);
    ASSERT_TRUE(tail.alpha_star);
    EXPECT_EQ(*tail.alpha_star, select_alpha(inst.model, cfg.alpha_grid, 201));
    EXPECT_EQ(tail.x_hat, bomm_tail(inst.model, *tail.alpha_star, 201).x_hat);
    EXPECT_TRUE(inst.dom.contains(tail.x_hat));
}

TEST(AlphaGrid, Default) {
    const auto g = default_alpha_grid();
    ASSERT_EQ(g.size(), 20u);
    EXPECT_NEAR(g.front(), 0.05, 1e-15);
    EXPECT_EQ(g.back(), 1.0);
}
