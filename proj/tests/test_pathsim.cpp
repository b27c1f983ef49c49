#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "trawl/exponent_oracle.hpp"
#include "trawl/pathsim.hpp"
#include "trawl/stats.hpp"

using namespace trawl;

namespace {

const TrawlSpec kTrawl = TrawlSpec::canonical(0.5, 1.0);

SimulationOptions options(std::size_t n, std::uint64_t seed, unsigned threads = 1) {
    SimulationOptions o;
    o.n_paths = n;
    o.master_seed = seed;
    o.threads = threads;
    return o;
}

// Number of theta values at which the ECF lies within 3 SE of exp(-I).
int oracle_hits(const std::vector<double>& sample, const std::vector<double>& thetas,
                const std::function<double(double)>& exponent) {
    const auto c = ecf(sample, thetas);
    int hits = 0;
    for (std::size_t i = 0; i < thetas.size(); ++i) hits += c.within(i, std::exp(-exponent(thetas[i])));
    return hits;
}

}  // namespace

TEST(Ensemble, TimeGridAndAccessors) {
    auto e = simulate_finite_activity_YT({0.5, 1.0}, 10.0, kTrawl, LevyBasisSpec::poisson_difference(1.0), 1.0,
                                         options(10, 1));
    ASSERT_EQ(e.n_times(), 3u);
    EXPECT_EQ(e.times()[0], 0.0);
    for (std::size_t i = 0; i < e.n_paths(); ++i) EXPECT_EQ(e(i, 0), 0.0);
    EXPECT_EQ(e.time_index(0.5), 1u);
    EXPECT_THROW(e.time_index(0.7), ValidationError);
    const auto inc = e.increments(1, 2);
    EXPECT_DOUBLE_EQ(inc[3], e(3, 2) - e(3, 1));
    EXPECT_DOUBLE_EQ(e.scaled(2.0)(4, 2), 2.0 * e(4, 2));
}

TEST(Ensemble, RejectsBadInputs) {
    const auto levy = LevyBasisSpec::poisson_difference(1.0);
    EXPECT_THROW(simulate_finite_activity_YT({1.0}, 10.0, kTrawl, levy, 1.0, options(0, 1)), ValidationError);
    EXPECT_THROW(simulate_finite_activity_YT({1.0, 0.5}, 10.0, kTrawl, levy, 1.0, options(5, 1)), ValidationError);
    EXPECT_THROW(simulate_finite_activity_YT({}, 10.0, kTrawl, levy, 1.0, options(5, 1)), ValidationError);
    EXPECT_THROW(simulate_finite_activity_YT({1.0}, 10.0, kTrawl, LevyBasisSpec::stable(1.5), 1.0, options(5, 1)),
                 UnsupportedSpecError);
    EXPECT_THROW(simulate_limit_Y({1.0}, 1.4, 0.5, SeriesBudget{}, options(5, 1)), RegimeError);
    SeriesBudget tight;
    tight.n_terms = 10;
    tight.max_error_bound = 1e-6;
    EXPECT_THROW(simulate_limit_Y({1.0}, 1.8, 0.5, tight, options(5, 1)), AccuracyError);
}

TEST(Determinism, IndependentOfThreadCount) {
    const auto levy = LevyBasisSpec::poisson_difference(1.0);
    const auto a = simulate_finite_activity_YT({0.5, 1.0}, 100.0, kTrawl, levy, 20.0, options(300, 9, 1));
    const auto b = simulate_finite_activity_YT({0.5, 1.0}, 100.0, kTrawl, levy, 20.0, options(300, 9, 8));
    EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
    const auto c = simulate_limit_Y({1.0, 2.0}, 1.8, 0.5, SeriesBudget{}, options(200, 4, 1));
    const auto d = simulate_limit_Y({1.0, 2.0}, 1.8, 0.5, SeriesBudget{}, options(200, 4, 8));
    EXPECT_TRUE(std::equal(c.data().begin(), c.data().end(), d.data().begin()));
    const auto e = simulate_limit_Y({1.0, 2.0}, 1.8, 0.5, SeriesBudget{}, options(200, 5, 1));
    EXPECT_FALSE(std::equal(c.data().begin(), c.data().end(), e.data().begin()));
}

TEST(Oracle, PoissonEcfMatchesQuadrature) {
    const auto levy = LevyBasisSpec::poisson_difference(1.0);
    const double T = 100.0, F = std::pow(T, 2.0 / 3.0);
    const auto e = simulate_finite_activity_YT({1.0}, T, kTrawl, levy, F, options(4000, 21));
    const LevyExponent psi(levy);
    const auto I = [&](double th) { return integrated_exponent(TimeCombo::single(th, 1.0), kTrawl, psi, T, F); };
    EXPECT_GE(oracle_hits(e.column(1), {0.25, 0.5, 1.0, 2.0}, I), 3);
}

TEST(Oracle, PoissonJointEcfMatchesCombination) {
    // two-time characteristic function: theta1 Y(0.5) + theta2 Y(1) has exponent I for the combo
    const auto levy = LevyBasisSpec::poisson_difference(2.0, 0.5);
    const double T = 50.0, F = 10.0;
    const auto e = simulate_finite_activity_YT({0.5, 1.0}, T, kTrawl, levy, F, options(4000, 22));
    std::vector<double> mix(e.n_paths());
    for (std::size_t i = 0; i < e.n_paths(); ++i) mix[i] = e(i, 1) - 0.7 * e(i, 2);
    const LevyExponent psi(levy);
    const TimeCombo combo({{1.0, 0.5}, {-0.7, 1.0}});
    const auto I = [&](double th) { return integrated_exponent(combo.scaled(th), kTrawl, psi, T, F); };
    EXPECT_GE(oracle_hits(mix, {0.5, 1.0, 2.0, 4.0}, I), 3);
}

TEST(Oracle, DensityBasisDropsSmallJumpsWithBound) {
    // nu(dx) = |x|^{-1.5} dx has infinite activity: jumps below 1 are dropped and bounded
    const auto levy = LevyBasisSpec::density([](double x) { return std::pow(std::abs(x), -1.5); });
    const double T = 20.0, F = 5000.0;
    const auto e = simulate_finite_activity_YT({1.0}, T, kTrawl, levy, F, options(4000, 23));
    ASSERT_TRUE(e.meta.dropped_small_jumps_bound);
    EXPECT_FALSE(levy.is_finite_activity());
    EXPECT_GT(*e.meta.dropped_small_jumps_bound, 0.0);
    // each exponent evaluation integrates psi by quadrature, so one theta with I(T) near 1
    const auto large = LevyExponent(levy).restricted(1.0, INFINITY);
    const auto I = [&](double th) { return integrated_exponent(TimeCombo::single(th, 1.0), kTrawl, large, T, F); };
    EXPECT_EQ(oracle_hits(e.column(1), {0.5}, I), 1);
}

TEST(Oracle, StableLepageMatchesQuadrature) {
    const double alpha = 1.8, T = 10.0, F = std::pow(T, 13.0 / 18.0);
    SeriesBudget budget;
    budget.n_terms = 2000;
    const auto e = simulate_stable_YT({1.0}, T, kTrawl, alpha, F, budget, options(4000, 24));
    ASSERT_TRUE(e.meta.truncation);
    EXPECT_EQ(e.meta.truncation->n_terms, 2000u);
    const LevyExponent psi(LevyBasisSpec::stable(alpha));
    const auto I = [&](double th) { return integrated_exponent(TimeCombo::single(th, 1.0), kTrawl, psi, T, F); };
    EXPECT_GE(oracle_hits(e.column(1), {0.25, 0.5, 1.0, 2.0}, I), 3);
}

TEST(Oracle, LimitProcessMatchesKernelMoment) {
    const auto e = simulate_limit_Y({1.0, 2.0}, 1.8, 0.5, SeriesBudget{}, options(4000, 25));
    for (std::size_t k : {1u, 2u}) {
        const double J = kernel_moment(1.8, 0.5, e.times()[k]);
        EXPECT_GE(oracle_hits(e.column(k), {0.25, 0.5, 0.75, 1.0}, [&](double th) { return std::pow(th, 1.8) * J; }),
                  3);
    }
}

TEST(Truncation, BoundShrinksWithTerms) {
    SeriesBudget small;
    small.n_terms = 100;
    SeriesBudget large;
    large.n_terms = 400;
    const auto a = simulate_limit_Y({1.0}, 1.8, 0.5, small, options(10, 1));
    const auto b = simulate_limit_Y({1.0}, 1.8, 0.5, large, options(10, 1));
    EXPECT_LT(b.meta.truncation->error_bound, a.meta.truncation->error_bound);
    // bound decays like n^{1 - 3/alpha}
    EXPECT_NEAR(a.meta.truncation->error_bound / b.meta.truncation->error_bound, std::pow(4.0, 3.0 / 1.8 - 1.0),
                0.05 * std::pow(4.0, 3.0 / 1.8 - 1.0));
}

TEST(Truncation, DoublingTermsChangesEcfWithinBound) {
    SeriesBudget one;
    one.n_terms = 500;
    SeriesBudget two;
    two.n_terms = 1000;
    const auto a = simulate_limit_Y({1.0}, 1.8, 0.5, one, options(4000, 26));
    const auto b = simulate_limit_Y({1.0}, 1.8, 0.5, two, options(4000, 27));
    const std::vector<double> th = {1.0};
    const auto ca = ecf(a.column(1), th);
    const auto cb = ecf(b.column(1), th);
    const double se = std::hypot(ca.std_errors[0], cb.std_errors[0]);
    EXPECT_LE(std::abs(ca.values[0] - cb.values[0]), a.meta.truncation->error_bound + 3.0 * se);
}

TEST(LevyMotion, StableIncrementsHaveExactLaw) {
    const auto e = simulate_stable_levy_motion({0.5, 1.5}, 1.2, 0.8, options(4000, 28));
    const auto inc = e.increments(1, 2);
    EXPECT_GE(oracle_hits(inc, {0.25, 0.5, 1.0, 2.0}, [](double th) { return std::pow(0.8 * th, 1.2); }), 3);
}

TEST(XGrid, TrawlProcessMarginalAndWindowCheck) {
    const auto levy = LevyBasisSpec::poisson_difference(1.0);
    XGridOptions xo;
    xo.times = {0.5, 1.0};
    xo.T = 20.0;
    xo.F_T = 5.0;
    xo.cells = 4000;
    const auto res = simulate_X_grid(kTrawl, levy, xo, options(4000, 29));
    // X_t ~ difference of Poisson variables with total intensity lambda * Leb(A) = 2
    EXPECT_GE(oracle_hits(res.X.column(1), {0.5, 1.0, 2.0}, [](double th) { return 2.0 * 2.0 * (1.0 - std::cos(th)); }),
              2);
    const LevyExponent psi(levy);
    const auto I = [&](double th) { return integrated_exponent(TimeCombo::single(th, 1.0), kTrawl, psi, 20.0, 5.0); };
    EXPECT_GE(oracle_hits(res.Y.column(2), {0.25, 0.5, 1.0, 2.0}, I), 3);
    xo.window = 10.0;
    EXPECT_THROW(simulate_X_grid(kTrawl, levy, xo, options(10, 1)), ValidationError);
}
