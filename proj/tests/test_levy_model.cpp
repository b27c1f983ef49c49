#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "trawl/levy_model.hpp"

using namespace trawl;

namespace {

// Closed form of int_R (1 - cos y) |y|^{-1-alpha} dy for alpha in (0, 2), alpha != 1.
double stable_integral(double alpha) {
    return -2.0 * std::tgamma(-alpha) * std::cos(std::numbers::pi * alpha / 2.0);
}

}  // namespace

TEST(Psi, ClosedForms) {
    EXPECT_NEAR(psi_eval(LevyExponent(LevyBasisSpec::stable(1.5)), 2.0), std::pow(2.0, 1.5), 1e-14);
    EXPECT_NEAR(psi_eval(LevyExponent(LevyBasisSpec::poisson_difference(1.0, 1.0)), std::numbers::pi), 4.0, 1e-14);
    EXPECT_NEAR(psi_eval(LevyExponent(LevyBasisSpec::poisson_difference(2.0, 0.5)), 1.0),
                4.0 * (1.0 - std::cos(0.5)), 1e-14);
    for (const auto& spec : {LevyBasisSpec::stable(1.2), LevyBasisSpec::poisson_difference(3.0)})
        EXPECT_EQ(psi_eval(LevyExponent(spec), 0.0), 0.0);
    EXPECT_THROW(psi_eval(LevyExponent(LevyBasisSpec::stable(1.2)), INFINITY), ValidationError);
}

TEST(Psi, DensityQuadratureMatchesStable) {
    const double alpha = 1.5;
    const double c = 1.0 / stable_integral(alpha);
    EXPECT_NEAR(c, 0.29920, 1e-5);
    const auto spec = LevyBasisSpec::density([=](double x) { return c * std::pow(std::abs(x), -1.0 - alpha); });
    const LevyExponent psi(spec);
    EXPECT_NEAR(psi_eval(psi, 2.0) / std::pow(2.0, 1.5), 1.0, 1e-6);
}

TEST(Psi, CalibratedStableQuadratureOverWideRange) {
    for (double alpha : {0.7, 1.5, 1.8}) {
        EXPECT_NEAR(stable_density_constant(alpha), 1.0 / stable_integral(alpha), 1e-8);
        const LevyExponent psi(LevyBasisSpec::stable(alpha), LevyExponent::Mode::quadrature);
        for (double theta = 1e-3; theta <= 1e3; theta *= 10.0)
            EXPECT_NEAR(psi(theta) / std::pow(theta, alpha), 1.0, 1e-6) << "alpha " << alpha << " theta " << theta;
    }
}

TEST(Psi, EvenAndNonnegative) {
    const auto table = LevyBasisSpec::density_table({{-2.0, 0.1}, {-1.0, 0.5}, {-0.5, 1.0}, {0.5, 1.0}, {1.0, 0.5}, {2.0, 0.1}});
    for (const auto& spec : {LevyBasisSpec::stable(0.8), LevyBasisSpec::poisson_difference(1.0, 2.0), table}) {
        const LevyExponent psi(spec);
        for (double theta : {1e-3, 0.1, 1.0, 3.7, 50.0}) {
            EXPECT_GE(psi(theta), 0.0);
            EXPECT_NEAR(psi(theta), psi(-theta), 1e-15 * (1.0 + psi(theta)));
        }
    }
}

TEST(Split, PoissonHasNoSmallJumps) {
    const LevyExponent psi(LevyBasisSpec::poisson_difference(1.5, 1.0));
    const auto [small, large] = split_exponent(psi, 1.0);
    for (double theta : {0.3, 1.0, 4.0}) {
        EXPECT_EQ(small(theta), 0.0);
        EXPECT_NEAR(large(theta), psi(theta), 1e-15);
    }
}

TEST(Split, StableAdditivity) {
    const LevyExponent psi(LevyBasisSpec::stable(1.5));
    const auto [small, large] = split_exponent(psi, 1.0);
    for (double theta : {1e-2, 0.5, 1.0, 7.0, 100.0})
        EXPECT_LE(std::abs(small(theta) + large(theta) - psi(theta)), 2.0 * psi.tol() + 1e-9 * psi(theta));
    const auto [all, none] = split_exponent(psi, INFINITY);
    EXPECT_EQ(none(3.0), 0.0);
    EXPECT_NEAR(all(3.0), psi(3.0), 1e-6);
    EXPECT_THROW(split_exponent(psi, 0.0), ValidationError);
}

TEST(Spec, Validation) {
    EXPECT_THROW(LevyBasisSpec::stable(2.0), ValidationError);
    EXPECT_THROW(LevyBasisSpec::poisson_difference(1.0, 0.0), ValidationError);
    EXPECT_THROW(LevyBasisSpec::density([](double x) { return std::pow(std::abs(x), -3.0); }), ValidationError);
    EXPECT_THROW(LevyBasisSpec::density([](double x) { return x > 0 ? 1.0 / (1.0 + x * x) : 0.0; }), ValidationError);
    EXPECT_THROW(LevyBasisSpec::density_table({{-1.0, 0.4}, {1.0, 0.5}, {2.0, 0.1}}), ValidationError);
    const auto s = LevyBasisSpec::stable(1.3);
    EXPECT_EQ(*s.alpha_at_infinity, 1.3);
    EXPECT_EQ(*s.alpha_at_zero, 1.3);
    EXPECT_FALSE(s.is_finite_activity());
    EXPECT_DOUBLE_EQ(LevyBasisSpec::poisson_difference(2.0).total_mass(), 4.0);
}

TEST(Regime, WorkedExamples) {
    const auto thm1 = verify_hypotheses(LevyBasisSpec::stable(1.8), 0.5);
    EXPECT_EQ(thm1.regime, Regime::thm1);
    EXPECT_NEAR(thm1.norming.power, 13.0 / 18.0, 1e-12);
    EXPECT_EQ(thm1.norming.log_power, 0.0);
    ASSERT_TRUE(thm1.hurst);
    EXPECT_NEAR(*thm1.hurst, 1.0 - 0.5 / 1.8, 1e-12);

    const auto thm2 = verify_hypotheses(LevyBasisSpec::poisson_difference(1.0), 0.5);
    EXPECT_EQ(thm2.regime, Regime::thm2);
    EXPECT_NEAR(thm2.norming.power, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(thm2.stability_index, 1.5, 1e-12);

    const auto crit = verify_hypotheses(LevyBasisSpec::stable(1.5), 0.5);
    EXPECT_EQ(crit.regime, Regime::critical);
    EXPECT_NEAR(crit.norming.power, 1.0 / 1.5, 1e-12);

    const auto thm3 = verify_hypotheses(LevyBasisSpec::stable(1.2), 0.5);
    EXPECT_EQ(thm3.regime, Regime::thm3);
    EXPECT_NEAR(thm3.norming.power, 1.0 / 1.2, 1e-12);
    EXPECT_NEAR(thm3.alpha_at_zero, 1.2, 1e-12);

    EXPECT_THROW(verify_hypotheses(LevyBasisSpec::stable(1.8), 1.5), ValidationError);
}

TEST(Regime, NamesRoundTrip) {
    for (auto r : {Regime::thm1, Regime::thm2, Regime::thm3, Regime::critical, Regime::unclassified})
        EXPECT_EQ(*regime_from_name(regime_name(r)), r);
    EXPECT_FALSE(regime_from_name("THM9"));
}

TEST(Constants, LepageConstant) {
    EXPECT_NEAR(lepage_constant(1.0), 2.0 / std::numbers::pi, 1e-15);
    EXPECT_NEAR(lepage_constant(1.8), 0.183228, 1e-6);
    EXPECT_NEAR(lepage_constant(0.999999), lepage_constant(1.0), 1e-6);
}
