#include <gtest/gtest.h>

#include <cmath>

#include "bomm/box_cox.hpp"

using namespace bomm;

TEST(BoxCox, InverseExamples) {
    EXPECT_NEAR(BoxCox(0.0).inverse(std::exp(1.0)), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(BoxCox(1.0).inverse(3.0), 2.0);
    EXPECT_DOUBLE_EQ(BoxCox(0.5).inverse(4.0), 2.0);
}

TEST(BoxCox, ForwardExamples) {
    EXPECT_DOUBLE_EQ(BoxCox(0.0).forward(0.0), 1.0);
    EXPECT_DOUBLE_EQ(BoxCox(1.0).forward(2.0), 3.0);
    EXPECT_NEAR(BoxCox(-1.0).forward(0.5), 2.0, 1e-15);
}

TEST(BoxCox, Errors) {
    EXPECT_THROW(BoxCox(0.5).inverse(0.0), RangeError);
    EXPECT_THROW(BoxCox(0.5).inverse(-1.0), RangeError);
    EXPECT_THROW(BoxCox(0.5).forward(-3.0), RangeError);  // below -1/lambda
    EXPECT_THROW(BoxCox(-1.0).forward(1.0), RangeError);  // above -1/lambda
    try {
        BoxCox(2.0).forward(-1.0);
        FAIL();
    } catch (const RangeError& e) {
        EXPECT_NE(std::string(e.what()).find("-0.5"), std::string::npos);
    }
}

TEST(BoxCox, Derivative) {
    EXPECT_DOUBLE_EQ(BoxCox(1.0).d_inverse_dz(7.3), 1.0);
    EXPECT_DOUBLE_EQ(BoxCox(0.0).d_inverse_dz(2.0), 0.5);
    const BoxCox b(0.3);
    const double z = 1.7, h = 1e-5;
    const double fd = (b.inverse(z + h) - b.inverse(z - h)) / (2 * h);
    EXPECT_NEAR(b.d_inverse_dz(z), fd, 1e-6 * fd);
}

TEST(BoxCox, LogJacobian) {
    VectorXd z(3);
    z << 1.0, 2.0, 5.0;
    EXPECT_NEAR(BoxCox(0.5).log_jacobian(z), -0.5 * std::log(10.0), 1e-14);
}

TEST(BoxCox, StrictlyIncreasingProperty) {
    Rng rng(1, 0);
    for (int k = 0; k < 1000; ++k) {
        const double lam = rng.uniform(-2.0, 2.0);
        double z1 = std::exp(rng.uniform(-4.0, 4.0)), z2 = std::exp(rng.uniform(-4.0, 4.0));
        if (z1 == z2) continue;
        if (z1 > z2) std::swap(z1, z2);
        const BoxCox b(lam);
        EXPECT_LT(b.inverse(z1), b.inverse(z2)) << lam << ' ' << z1 << ' ' << z2;
    }
}

TEST(BoxCox, RoundTripProperty) {
    Rng rng(2, 0);
    for (int k = 0; k < 1000; ++k) {
        const double lam = rng.uniform(-2.0, 2.0);
        const double z = std::exp(rng.uniform(-3.0, 3.0));
        const BoxCox b(lam);
        EXPECT_NEAR(b.forward(b.inverse(z)), z, 1e-10 * z);
    }
}

TEST(BoxCox, ContinuityAtZero) {
    const BoxCox b(1e-8);
    for (double z = 0.1; z <= 100.0; z *= 1.3) EXPECT_LE(std::abs(b.inverse(z) - std::log(z)), 1e-6);
    const BoxCox c(2e-8);
    for (double z = 0.1; z <= 100.0; z *= 1.3) EXPECT_LE(std::abs(c.inverse(z) - std::log(z)), 1e-6);
}

TEST(BoxCox, LatentRange) {
    auto [lo, hi] = BoxCox(0.5).latent_range();
    EXPECT_EQ(lo, -2.0);
    EXPECT_TRUE(std::isinf(hi));
    std::tie(lo, hi) = BoxCox(-0.5).latent_range();
    EXPECT_TRUE(std::isinf(lo));
    EXPECT_EQ(hi, 2.0);
}
