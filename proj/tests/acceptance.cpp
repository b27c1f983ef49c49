// One pass/fail line per acceptance criterion. Exit status is nonzero only when a
// criterion other than the known-red index fit (criterion 3) fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>
#include <unistd.h>

#include "trawl/experiment.hpp"
#include "trawl/trawl.hpp"

using namespace trawl;
namespace ex = trawl::experiment;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int unexpected_failures = 0;

void report(int n, bool pass, const std::string& detail, bool known_red = false) {
    std::printf("Criterion %d: %s  %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass && !known_red) ++unexpected_failures;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

SimulationOptions options(std::size_t n, std::uint64_t seed, unsigned threads = 1) {
    SimulationOptions o;
    o.n_paths = n;
    o.master_seed = seed;
    o.threads = threads;
    return o;
}

const TrawlSpec kTrawl = TrawlSpec::canonical(0.5, 1.0);
const TimeCombo kUnit = TimeCombo::single(1.0, 1.0);

void kernel_scaling() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (auto [k, g] : {std::pair{1.8, 0.5}, {2.0, 0.5}, {1.6, 0.3}}) {
        const double j1 = kernel_moment_direct(k, g, 1.0);
        for (double t : {0.5, 2.0, 4.0})
            worst = std::max(worst, std::abs(kernel_moment_direct(k, g, t) / j1 / std::pow(t, k - g) - 1.0));
    }
    const double secs = since(t0);
    report(1, worst <= 1e-4 && secs < 10.0,
           "max rel err " + fmt("%.2e", worst) + " (<= 1e-4), " + fmt("%.2f", secs) + " s (< 10 s)");
}

void poisson_oracle() {
    const auto t0 = Clock::now();
    const auto levy = LevyBasisSpec::poisson_difference(1.0);
    const double T = 1e3, F = std::pow(T, 2.0 / 3.0);
    const auto e = simulate_finite_activity_YT({1.0}, T, kTrawl, levy, F, options(10000, 2));
    const LevyExponent psi(levy);
    const std::vector<double> th = {0.25, 0.5, 1.0, 2.0};
    const auto c = ecf(e.column(1), th);
    bool ok = true;
    std::string detail = "z =";
    for (std::size_t i = 0; i < th.size(); ++i) {
        const double target = std::exp(-integrated_exponent(kUnit.scaled(th[i]), kTrawl, psi, T, F));
        detail += " " + fmt("%.2f", std::abs(c.values[i] - target) / c.std_errors[i]);
        ok = ok && c.within(i, target);
    }
    const double secs = since(t0);
    report(2, ok && secs < 120.0, detail + " (<= 3), " + fmt("%.1f", secs) + " s (< 120 s)");
}

void thm2_index() {
    const auto levy = LevyBasisSpec::poisson_difference(1.0);
    const double T = 1e4, F = std::pow(T, 2.0 / 3.0);
    const auto e = simulate_finite_activity_YT({1.0}, T, kTrawl, levy, F, options(10000, 3));
    const auto inc = e.increments(0, 1);
    const auto fit = stability_index_fit(inc);
    // the exact exponent on the same window shows what the estimator can reach at this T
    const LevyExponent psi(levy);
    std::vector<double> th, mod;
    for (int i = 0; i < 16; ++i) {
        th.push_back(fit.theta_lo * std::pow(fit.theta_hi / fit.theta_lo, i / 15.0));
        mod.push_back(std::exp(-integrated_exponent(kUnit.scaled(th.back()), kTrawl, psi, T, F)));
    }
    const auto exact = stability_index_fit_exact(th, mod);
    const bool ok = std::abs(fit.index_hat - 1.5) <= 0.1;
    report(3, ok,
           "index " + fmt("%.3f", fit.index_hat) + " (1.5 +- 0.1); exact-exponent slope on the same window " +
               fmt("%.3f", exact.index_hat) + (ok ? "" : " [known red at T = 1e4, see README]"),
           true);
}

void limit_process() {
    const double alpha = 1.8, gamma = 0.5;
    const auto e = simulate_limit_Y({1.0, 2.0, 4.0}, alpha, gamma, SeriesBudget{}, options(10000, 4));
    bool ecf_ok = true;
    double worst_z = 0.0;
    for (std::size_t k : {1u, 2u}) {
        const double J = kernel_moment(alpha, gamma, e.times()[k]);
        const std::vector<double> th = {0.25, 0.5, 1.0};
        const auto c = ecf(e.column(k), th);
        for (std::size_t i = 0; i < th.size(); ++i) {
            const double target = std::exp(-std::pow(th[i], alpha) * J);
            worst_z = std::max(worst_z, std::abs(c.values[i] - target) / c.std_errors[i]);
            ecf_ok = ecf_ok && c.within(i, target);
        }
    }
    const std::vector<std::vector<double>> samples = {e.column(1), e.column(2), e.column(3)};
    const auto ss = selfsim_index_fit(samples, std::vector<double>{1.0, 2.0, 4.0});
    const double H = 1.0 - gamma / alpha;
    const bool ss_ok = std::abs(ss.fit.index_hat - H) <= 0.05;

    const auto x = e.increments(0, 1), y = e.increments(1, 2);
    const auto dep = increment_dependence(x, y, theta_at_modulus(x, 0.5), theta_at_modulus(y, 0.5), 4);

    const auto lm = simulate_stable_levy_motion({1.0, 2.0}, 1.2, 1.0, options(10000, 5));
    const auto lx = lm.increments(0, 1), ly = lm.increments(1, 2);
    const auto indep = increment_dependence(lx, ly, theta_at_modulus(lx, 0.5), theta_at_modulus(ly, 0.5), 5);

    report(4, ecf_ok && ss_ok && dep.dependent() && !indep.dependent(),
           "max ECF z " + fmt("%.2f", worst_z) + " (<= 3); H " + fmt("%.4f", ss.fit.index_hat) + " (" +
               fmt("%.4f", H) + " +- 0.05); limit D/SE " + fmt("%.1f", dep.D / dep.std_error) +
               " (> 3); Levy D/SE " + fmt("%.2f", indep.D / indep.std_error) + " (<= 3)");
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

std::string gap_list(const std::vector<double>& v) {
    std::string s;
    for (double g : v) s += (s.empty() ? "" : " ") + fmt("%.2e", g);
    return s;
}

void exponent_convergence() {
    const auto t0 = Clock::now();
    const std::vector<double> grid = {1e2, 1e3, 1e4, 1e5};
    struct Case {
        const char* name;
        LevyBasisSpec spec;
        std::vector<double> T;
    };
    const std::vector<Case> cases = {{"THM1", LevyBasisSpec::stable(1.8), grid},
                                     {"THM2", LevyBasisSpec::poisson_difference(1.0), grid},
                                     {"THM3", LevyBasisSpec::stable(1.2), grid},
                                     {"CRITICAL", LevyBasisSpec::stable(1.5), {1e3, 1e4, 1e5, 1e6}}};
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        const auto regime = verify_hypotheses(c.spec, 0.5);
        if (std::string(regime_name(regime.regime)) != c.name) ok = false;
        const auto rep = convergence_diagnostic(regime, kUnit, kTrawl, LevyExponent(c.spec), c.T);
        const auto gaps = rep.relative_gaps();
        ok = ok && strictly_decreasing(gaps);
        detail += std::string(detail.empty() ? "" : "; ") + c.name + " gaps " + gap_list(gaps);
    }
    const double secs = since(t0);
    report(5, ok && secs < 300.0, detail + "; " + fmt("%.1f", secs) + " s (< 300 s)");

    // the literal norming T^{1/alpha} log T drives I(T) to zero instead of the limit
    const LevyExponent psi(LevyBasisSpec::stable(1.5));
    std::string literal;
    for (double T : {1e3, 1e4, 1e5, 1e6}) {
        const double F = std::pow(T, 1.0 / 1.5) * std::log(T);
        literal += " " + fmt("%.4f", integrated_exponent(kUnit, kTrawl, psi, T, F));
    }
    std::printf("  info: CRITICAL I(T) under F_T = T^(1/alpha) log T:%s (limit under (T log T)^(1/alpha): 1.5)\n",
                literal.c_str());
}

void thm3_audit() {
    const auto spec = LevyBasisSpec::stable(1.2);
    const auto audit = thm3_constant_audit(kUnit, kTrawl, LevyExponent(spec), verify_hypotheses(spec, 0.5),
                                           {1e4, 1e5, 1e6, 1e7, 1e8});
    const bool emitted = !audit.verdict.empty();
    report(6, emitted,
           "observed " + fmt("%.6f", audit.observed_limit) + "; proof-derived " + fmt("%.6f", audit.proof_limit) +
               " (rel " + fmt("%.1e", audit.proof_rel_diff) + "); displayed " + fmt("%.6f", audit.displayed_limit) +
               " (rel " + fmt("%.1e", audit.displayed_rel_diff) + "); within 2%: " + audit.verdict);
}

void determinism() {
    const auto base = fs::temp_directory_path() / ("trawl_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(base);
    const auto doc = ex::json::parse(R"({
        "levy": {"kind": "poisson_difference", "lambda": 1.0},
        "trawl": {"family": "canonical", "C": 1.0, "gamma": 0.5},
        "T_grid": [100, 1000, 10000], "T": 1000, "times": [0, 0.5, 1],
        "n_paths": 2000, "master_seed": 17
    })");
    const auto limit_doc = ex::json::parse(R"({
        "levy": {"kind": "stable", "alpha": 1.8},
        "trawl": {"family": "canonical", "C": 1.0, "gamma": 0.5},
        "times": [0, 1, 2], "n_paths": 500, "master_seed": 17
    })");
    std::ostringstream sink;
    bool ok = true;
    std::vector<std::string> names;
    auto run = [&](const ex::json& d, unsigned threads, const std::string& fmtname, const std::string& tag,
                   int (*runner)(const ex::RunContext&)) {
        ex::RunContext ctx;
        ctx.config = ex::parse_config(d);
        ctx.threads = threads;
        ctx.format = fmtname;
        ctx.out = &sink;
        ctx.out_dir = (base / (tag + "_" + std::to_string(threads))).string();
        ok = ok && runner(ctx) == ex::exit_ok;
        return fs::path(*ctx.out_dir);
    };
    auto same = [&](const fs::path& a, const fs::path& b, const std::string& file) {
        const bool eq = read_file(a / file) == read_file(b / file);
        ok = ok && eq;
        names.push_back(file + (eq ? " identical" : " DIFFER"));
    };
    same(run(doc, 1, "bin", "sim", ex::run_simulate), run(doc, 8, "bin", "sim", ex::run_simulate), "ensemble.bin");
    same(run(doc, 1, "csv", "simc", ex::run_simulate), run(doc, 8, "csv", "simc", ex::run_simulate), "ensemble.csv");
    same(run(limit_doc, 1, "bin", "lim", ex::run_limit_process), run(limit_doc, 8, "bin", "lim", ex::run_limit_process),
         "limit.bin");
    same(run(doc, 1, "csv", "ver", ex::run_verify), run(doc, 8, "csv", "ver", ex::run_verify), "exponent.csv");
    fs::remove_all(base);
    std::string detail;
    for (const auto& n : names) detail += (detail.empty() ? "" : "; ") + n;
    report(7, ok, "threads 1 vs 8: " + detail);
}

void dual_simulator() {
    const auto levy = LevyBasisSpec::poisson_difference(1.0);
    const double T = 100.0, F = std::pow(T, 2.0 / 3.0);
    XGridOptions xo;
    xo.times = {1.0};
    xo.T = T;
    xo.F_T = F;
    const auto grid = simulate_X_grid(kTrawl, levy, xo, options(4000, 8));
    const auto kernel = simulate_finite_activity_YT({1.0}, T, kTrawl, levy, F, options(4000, 9));
    const auto test = ecf_two_sample_test(grid.Y.column(1), kernel.column(1), std::vector<double>{0.25, 0.5, 1.0, 2.0});
    report(8, test.p_value > 0.01,
           "Hotelling " + fmt("%.2f", test.statistic) + " on " + std::to_string(test.df) + " df, p " +
               fmt("%.3f", test.p_value) + " (> 0.01)");
}

}  // namespace

int main() {
    const std::pair<int, void (*)()> steps[] = {{1, kernel_scaling}, {2, poisson_oracle},       {3, thm2_index},
                                                {4, limit_process},  {5, exponent_convergence}, {6, thm3_audit},
                                                {7, determinism},    {8, dual_simulator}};
    for (const auto& [n, step] : steps) {
        try {
            step();
        } catch (const std::exception& e) {
            report(n, false, std::string("error: ") + e.what());
        }
    }
    std::printf("%s\n", unexpected_failures == 0 ? "acceptance: all criteria as expected"
                                                 : "acceptance: unexpected failures");
    return unexpected_failures == 0 ? 0 : 1;
}
