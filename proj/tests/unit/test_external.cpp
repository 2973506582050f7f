#include <gtest/gtest.h>

#include <chrono>

#include "bomm/external.hpp"
#include "bomm/testbed.hpp"

using namespace bomm;

namespace {

std::string cli() { return std::string("'") + BOMM_TEST_CLI + "'"; }

}  // namespace

TEST(FormatPoint, ShortestRoundTrip) {
    VectorXd x(3);
    x << 0.1, -2.0, 1.0 / 3.0;
    EXPECT_EQ(format_point(x), "0.1,-2,0.3333333333333333");
}

TEST(ExternalObjective, WrappedCliMatchesInProcessBitForBit) {
    const auto f = make_test_function("six_hump_camel");
    ExternalObjective ext({cli() + " eval --function six_hump_camel --stdin", false, 60.0});
    Rng rng(1, 0);
    for (int k = 0; k < 5; ++k) {
        VectorXd x(6);
        for (int l = 0; l < 6; ++l) x[l] = rng.uniform(f.domain.lower(l), f.domain.upper(l));
        EXPECT_EQ(ext(x), f(x));
    }
}

TEST(ExternalObjective, PersistentModeMatchesToo) {
    const auto f = make_test_function("piston");
    ExternalObjective ext({cli() + " eval --function piston --serve", true, 60.0});
    Rng rng(2, 0);
    for (int k = 0; k < 20; ++k) {
        VectorXd x(7);
        for (int l = 0; l < 7; ++l) x[l] = rng.uniform(f.domain.lower(l), f.domain.upper(l));
        EXPECT_EQ(ext(x), f(x));
    }
}

TEST(ExternalObjective, ShellScriptPerEvaluation) {
    ExternalObjective ext({"IFS=, read a b; echo \"$a $b\" | awk '{print $1 * $1 + $2}'", false, 10.0});
    EXPECT_EQ(ext(Eigen::Vector2d(3.0, 0.5)), 9.5);
}

TEST(ExternalObjective, NanIsAnError) {
    ExternalObjective ext({"cat > /dev/null; echo nan", false, 10.0});
    try {
        ext(Eigen::Vector2d(1.0, 2.0));
        FAIL();
    } catch (const EvaluationError& e) {
        EXPECT_NE(std::string(e.what()).find("nan"), std::string::npos);
    }
}

TEST(ExternalObjective, GarbageAndNonzeroExit) {
    ExternalObjective garbage({"cat > /dev/null; echo hello", false, 10.0});
    EXPECT_THROW(garbage(VectorXd::Zero(1)), EvaluationError);
    ExternalObjective failing({"cat > /dev/null; echo 1.0; exit 3", false, 10.0});
    EXPECT_THROW(failing(VectorXd::Zero(1)), EvaluationError);
}

TEST(ExternalObjective, TimeoutEnforced) {
    ExternalObjective slow({"sleep 5; echo 1", false, 0.3});
    const auto t0 = std::chrono::steady_clock::now();
    EXPECT_THROW(slow(VectorXd::Zero(1)), EvaluationError);
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 4.0);
}

TEST(ExternalObjective, PersistentProtocolViolation) {
    ExternalObjective ext({"while read l; do echo \"ERR $l\"; done", true, 10.0});
    EXPECT_THROW(ext(VectorXd::Zero(2)), EvaluationError);
}

TEST(ExternalObjective, DefaultTimeout) { EXPECT_EQ(ExternalConfig{}.timeout_seconds, 3600.0); }
