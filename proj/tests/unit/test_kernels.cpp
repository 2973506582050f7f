#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "bomm/design.hpp"
#include "bomm/kernels.hpp"
#include "generators.hpp"

using namespace bomm;

namespace {

KernelParams params2(double wa, double wb, double ta, double tb) {
    KernelParams p;
    p.w = Eigen::Vector2d(wa, wb);
    p.theta_A = Eigen::Vector2d(ta, tb);
    p.theta_Z = Eigen::Vector2d(ta, tb);
    return p;
}

}  // namespace

TEST(Kernels, AdditiveExamples) {
    const auto p1 = KernelParams::uniform(1, 1.0, 1.0);
    EXPECT_EQ(r_additive(VectorXd::Constant(1, 0.3), VectorXd::Constant(1, 0.3), p1), 1.0);
    EXPECT_NEAR(r_additive(VectorXd::Constant(1, 0.0), VectorXd::Constant(1, 1.0), p1), 0.367879441171, 1e-12);
    const auto p2 = params2(0.5, 0.5, 1.0, 1.0);
    EXPECT_NEAR(r_additive(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0), p2), 0.683939720586, 1e-12);
}

TEST(Kernels, ProductExamples) {
    const auto p = params2(0.5, 0.5, 1.0, 1.0);
    EXPECT_EQ(r_product(Eigen::Vector2d(0.2, 0.1), Eigen::Vector2d(0.2, 0.1), p), 1.0);
    EXPECT_NEAR(r_product(Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 0), p), 0.135335283237, 1e-12);
}

TEST(Kernels, ProductBoundedByEachFactor) {
    Rng rng(1, 0);
    for (int k = 0; k < 200; ++k) {
        const auto p = bomm::testing::random_params(rng, 3, 0.5).kernel;
        VectorXd x(3), y(3);
        for (int l = 0; l < 3; ++l) {
            x[l] = rng.uniform();
            y[l] = rng.uniform();
        }
        const double r = r_product(x, y, p);
        for (int l = 0; l < 3; ++l) {
            const double t = (x[l] - y[l]) / p.theta_Z[l];
            EXPECT_LE(r, std::exp(-t * t) + 1e-16);
        }
    }
}

TEST(Kernels, SymmetryAndStationarity) {
    Rng rng(2, 0);
    for (int k = 0; k < 200; ++k) {
        const auto p = bomm::testing::random_params(rng, 4, 0.3).kernel;
        VectorXd x(4), y(4), s(4);
        for (int l = 0; l < 4; ++l) {
            x[l] = rng.uniform();
            y[l] = rng.uniform();
            s[l] = rng.uniform(-1.0, 1.0);
        }
        EXPECT_EQ(r_additive(x, y, p), r_additive(y, x, p));
        EXPECT_EQ(r_product(x, y, p), r_product(y, x, p));
        EXPECT_NEAR(r_additive(x + s, y + s, p), r_additive(x, y, p), 1e-13);
        EXPECT_NEAR(r_product(x + s, y + s, p), r_product(x, y, p), 1e-13);
    }
}

TEST(Kernels, MixtureEndpoints) {
    Rng rng(3, 0);
    const MatrixXd X = random_lhd(6, 2, rng);
    const auto p = bomm::testing::random_params(rng, 2, 0.5).kernel;
    EXPECT_EQ(gram_mixture(X, 0.0, p, 0.0), gram_additive(X, p));
    EXPECT_EQ(gram_mixture(X, 1.0, p, 0.0), gram_product(X, p));
    const MatrixXd M = gram_mixture(X, 0.4, p, 1e-6);
    EXPECT_NEAR(M(0, 0), 1.0 + 1e-6, 1e-15);
    EXPECT_TRUE(M.isApprox(M.transpose(), 0.0));
    EXPECT_THROW(gram_mixture(X, 0.4, p, -1.0), ParameterError);
}

TEST(Kernels, RandomGramIsPositiveDefinite) {
    Rng rng(4, 0);
    const MatrixXd X = random_lhd(8, 3, rng);
    const auto p = bomm::testing::random_params(rng, 3, 0.5).kernel;
    const MatrixXd M = gram_mixture(X, 0.5, p, kBaseNugget);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(Kernels, GramPsdProperty) {
    Rng rng(5, 0);
    for (int k = 0; k < 100; ++k) {
        const auto n = 2 + rng.uniform_int(15), d = 1 + rng.uniform_int(5);
        const MatrixXd X = random_lhd(n, d, rng);
        const double eta = rng.uniform();
        const auto p = bomm::testing::random_params(rng, d, eta).kernel;
        EXPECT_NO_THROW(factorize_gram(gram_mixture(X, eta, p, 0.0), kBaseNugget, true));
    }
}

TEST(Kernels, CrossVectors) {
    Rng rng(6, 0);
    const MatrixXd X = random_lhd(5, 3, rng);
    const auto p = bomm::testing::random_params(rng, 3, 0.5).kernel;
    const VectorXd x0 = X.row(0).transpose();
    auto [ra, rz] = cross_vectors(X, x0, p);
    EXPECT_EQ(ra[0], 1.0);
    EXPECT_EQ(rz[0], 1.0);
    const MatrixXd GA = gram_additive(X, p), GZ = gram_product(X, p);
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(ra[i], GA(0, i));
        EXPECT_EQ(rz[i], GZ(0, i));
    }
    const auto tiny = KernelParams::uniform(3, 1e-3, 1e-3);
    auto [fa, fz] = cross_vectors(X, VectorXd::Constant(3, 5.0), tiny);
    EXPECT_LT(fa.maxCoeff(), 1e-300);
    EXPECT_LT(fz.maxCoeff(), 1e-300);
}

TEST(Kernels, NuggetEscalatesOnSingularGram) {
    // Two identical rows make the Gram exactly singular without nugget.
    MatrixXd G = MatrixXd::Ones(3, 3);
    int warnings = 0;
    static int* counter = nullptr;
    counter = &warnings;
    set_warning_sink([](const std::string&) { ++*counter; });
    const GramFactor f = factorize_gram(G, 0.0);
    set_warning_sink(nullptr);
    EXPECT_GT(f.nugget, 0.0);
    EXPECT_LE(f.nugget, kMaxNugget);
    EXPECT_GE(warnings, 1);
}

TEST(Kernels, ConditioningErrorWhenHopeless) {
    MatrixXd G = MatrixXd::Identity(2, 2);
    G(0, 0) = -1.0;
    EXPECT_THROW(factorize_gram(G), ConditioningError);
}

TEST(Kernels, ParamValidation) {
    auto p = KernelParams::uniform(2);
    EXPECT_NO_THROW(p.validate());
    p.w[0] = 0.9;
    EXPECT_THROW(p.validate(), ParameterError);
    p = KernelParams::uniform(2);
    p.theta_A[1] = 0.0;
    EXPECT_THROW(p.validate(), ParameterError);
}
