#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "trawl/pathsim.hpp"
#include "trawl/random.hpp"
#include "trawl/stats.hpp"

using namespace trawl;

namespace {

std::vector<double> stable_sample(double alpha, std::size_t n, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = scale * symmetric_stable(rng, alpha);
    return x;
}

}  // namespace

TEST(Ecf, UnitDiskAndOrigin) {
    const auto x = stable_sample(1.5, 500, 1);
    const auto c = ecf(x, std::vector<double>{0.0, 0.1, 1.0, 10.0});
    EXPECT_EQ(c.values[0], std::complex<double>(1.0, 0.0));
    for (const auto& v : c.values) EXPECT_LE(std::abs(v), 1.0 + 1e-15);
    EXPECT_EQ(c.n_samples, 500u);
    EXPECT_THROW(ecf(std::vector<double>{}, std::vector<double>{1.0}), ValidationError);
    EXPECT_THROW(ecf(std::vector<double>(50, 1.0), std::vector<double>{1.0}), ValidationError);
}

TEST(Ecf, StandardErrorFormula) {
    const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
    std::vector<double> many;
    for (int i = 0; i < 50; ++i) many.insert(many.end(), x.begin(), x.end());
    const auto c = ecf(many, std::vector<double>{0.7});
    double mc = 0, ms = 0, vc = 0, vs = 0;
    for (double v : many) mc += std::cos(0.7 * v), ms += std::sin(0.7 * v);
    mc /= 200.0, ms /= 200.0;
    for (double v : many) vc += std::pow(std::cos(0.7 * v) - mc, 2), vs += std::pow(std::sin(0.7 * v) - ms, 2);
    EXPECT_NEAR(c.std_errors[0], std::sqrt((vc + vs) / 199.0 / 200.0), 1e-14);
}

TEST(StabilityIndex, ExactExponentialInput) {
    std::vector<double> th, m;
    for (int i = 0; i < 16; ++i) {
        th.push_back(0.2 * std::pow(10.0, i / 15.0));
        m.push_back(std::exp(-std::pow(th.back(), 1.5)));
    }
    const auto fit = stability_index_fit_exact(th, m);
    EXPECT_NEAR(fit.index_hat, 1.5, 1e-10);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
    m[3] = 1.0;
    EXPECT_THROW(stability_index_fit_exact(th, m), WindowError);
}

TEST(StabilityIndex, RecoversStableIndex) {
    for (double alpha : {1.2, 1.5, 1.8}) {
        const auto fit = stability_index_fit(stable_sample(alpha, 10000, 7));
        EXPECT_NEAR(fit.index_hat, alpha, 0.1) << alpha;
        EXPECT_GE(fit.n_points, 4u);
        EXPECT_GT(fit.r_squared, 0.95);
    }
}

TEST(StabilityIndex, ScaleInvariant) {
    const auto x = stable_sample(1.5, 3000, 8);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 4.0 * x[i];
    const auto a = stability_index_fit(x);
    const auto b = stability_index_fit(y);
    EXPECT_NEAR(a.index_hat, b.index_hat, 1e-12);
    EXPECT_NEAR(b.theta_lo * 4.0, a.theta_lo, 1e-12 * a.theta_lo);
}

TEST(StabilityIndex, IllConditionedWindow) {
    const auto x = stable_sample(1.5, 2000, 9);
    try {
        stability_index_fit(x, std::make_pair(1e-6, 1e-5));
        FAIL() << "expected a window error";
    } catch (const WindowError& e) {
        EXPECT_GT(e.suggested_hi(), e.suggested_lo());
        EXPECT_GT(e.suggested_lo(), 0.0);
    }
    EXPECT_THROW(stability_index_fit(x, std::make_pair(1e3, 1e4)), WindowError);
    EXPECT_THROW(stability_index_fit(std::vector<double>(500, 0.0)), WindowError);
}

TEST(SelfSimilarity, ExactScaledEnsembles) {
    const auto base = stable_sample(1.6, 4000, 10);
    const double s = 0.75;
    std::vector<std::vector<double>> samples;
    const std::vector<double> scales = {1.0, 2.0, 4.0};
    for (double c : scales) {
        std::vector<double> v(base.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(c, s) * base[i];
        samples.push_back(std::move(v));
    }
    const auto fit = selfsim_index_fit(samples, scales);
    EXPECT_NEAR(fit.fit.index_hat, s, 1e-6);
    EXPECT_NEAR(fit.matched_exponents[1], s, 1e-6);
}

TEST(SelfSimilarity, StableLevyMotion) {
    SimulationOptions o;
    o.n_paths = 4000;
    o.master_seed = 11;
    const auto e = simulate_stable_levy_motion({1.0, 2.0, 4.0}, 1.5, 1.0, o);
    const std::vector<std::vector<double>> samples = {e.column(1), e.column(2), e.column(3)};
    const auto fit = selfsim_index_fit(samples, std::vector<double>{1.0, 2.0, 4.0});
    EXPECT_NEAR(fit.fit.index_hat, 1.0 / 1.5, 0.05);
}

TEST(SelfSimilarity, Rejections) {
    const auto a = stable_sample(1.5, 1000, 12);
    std::vector<std::vector<double>> samples = {a, a};
    EXPECT_THROW(selfsim_index_fit(samples, std::vector<double>{1.0, 2.0}), ValidationError);
    samples.push_back(a);
    EXPECT_THROW(selfsim_index_fit(samples, std::vector<double>{2.0, 4.0, 8.0}), ValidationError);
    // samples at wildly different scales cannot be matched on the search range
    std::vector<double> huge(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) huge[i] = 1e12 * a[i];
    EXPECT_THROW(selfsim_index_fit(std::vector<std::vector<double>>{a, huge, huge}, std::vector<double>{1.0, 2.0, 4.0}),
                 WindowError);
}

TEST(Dependence, IndependentIncrementsStayNearZero) {
    SimulationOptions o;
    o.n_paths = 5000;
    o.master_seed = 13;
    const auto e = simulate_stable_levy_motion({1.0, 2.0}, 1.2, 1.0, o);
    const auto x = e.increments(0, 1);
    const auto y = e.increments(1, 2);
    const auto d = increment_dependence(x, y, theta_at_modulus(x, 0.5), theta_at_modulus(y, 0.5), 13);
    EXPECT_FALSE(d.dependent());
    EXPECT_GT(d.std_error, 0.0);
}

TEST(Dependence, LimitProcessIncrementsAreDependent) {
    SimulationOptions o;
    o.n_paths = 5000;
    o.master_seed = 14;
    const auto e = simulate_limit_Y({1.0, 2.0}, 1.8, 0.5, SeriesBudget{}, o);
    const auto x = e.increments(0, 1);
    const auto y = e.increments(1, 2);
    const auto d = increment_dependence(x, y, theta_at_modulus(x, 0.5), theta_at_modulus(y, 0.5), 14);
    EXPECT_TRUE(d.dependent());
}

TEST(Dependence, Thm2MatchesExactJointExponentAndDecays) {
    SimulationOptions o;
    o.n_paths = 5000;
    o.master_seed = 15;
    const auto trawl = TrawlSpec::canonical(0.5, 1.0);
    const auto levy = LevyBasisSpec::poisson_difference(1.0);
    const LevyExponent psi(levy);
    // exact D for increments over [0, 1] and [1, 2]: th1 Y(1) + th2 (Y(2) - Y(1))
    const auto exact_D = [&](double T, double th1, double th2) {
        const double F = std::pow(T, 2.0 / 3.0);
        const double joint = integrated_exponent(TimeCombo({{th1 - th2, 1.0}, {th2, 2.0}}), trawl, psi, T, F);
        const double first = integrated_exponent(TimeCombo::single(th1, 1.0), trawl, psi, T, F);
        const double second = integrated_exponent(TimeCombo({{-th2, 1.0}, {th2, 2.0}}), trawl, psi, T, F);
        return std::exp(-joint) - std::exp(-first - second);
    };
    const double T = 1e3;
    const auto e = simulate_finite_activity_YT({1.0, 2.0}, T, trawl, levy, std::pow(T, 2.0 / 3.0), o);
    const auto x = e.increments(0, 1);
    const auto y = e.increments(1, 2);
    const double th1 = theta_at_modulus(x, 0.5), th2 = theta_at_modulus(y, 0.5);
    const auto d = increment_dependence(x, y, th1, th2, 15);
    EXPECT_LE(std::abs(d.difference - exact_D(T, th1, th2)), 3.0 * d.std_error);
    // the dependence dies out as T grows: compare at matched moduli
    EXPECT_LT(std::abs(exact_D(1e6, th1, th2)), std::abs(exact_D(T, th1, th2)));
}

TEST(Dependence, BootstrapIsSeeded) {
    const auto x = stable_sample(1.5, 500, 16);
    const auto y = stable_sample(1.5, 500, 17);
    const auto a = increment_dependence(x, y, 0.5, 0.5, 3);
    const auto b = increment_dependence(x, y, 0.5, 0.5, 3);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_THROW(increment_dependence(x, std::vector<double>(400, 0.0), 0.5, 0.5, 3), ValidationError);
}

TEST(TwoSample, SameAndDifferentLaws) {
    const std::vector<double> th = {0.25, 0.5, 1.0, 2.0};
    const auto same = ecf_two_sample_test(stable_sample(1.5, 4000, 18), stable_sample(1.5, 4000, 19), th);
    EXPECT_EQ(same.df, 8u);
    EXPECT_GT(same.p_value, 0.01);
    const auto diff = ecf_two_sample_test(stable_sample(1.5, 4000, 20), stable_sample(1.5, 4000, 21, 1.2), th);
    EXPECT_LT(diff.p_value, 0.01);
}
