#pragma once

// Empirical characteristic functions and the estimators built on them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "trawl/error.hpp"
#include "trawl/random.hpp"

namespace trawl {

struct EcfCurve {
    std::vector<double> theta;
    std::vector<std::complex<double>> values;
    std::vector<double> std_errors;
    std::size_t n_samples = 0;

    /// |value - target| <= k * SE at grid point i.
    bool within(std::size_t i, std::complex<double> target, double k = 3.0) const {
        return std::abs(values[i] - target) <= k * std_errors[i];
    }
};

namespace detail {

inline std::complex<double> ecf_point(std::span<const double> x, double theta, double* se = nullptr) {
    const double n = static_cast<double>(x.size());
    double sc = 0.0;
    double ss = 0.0;
    double sc2 = 0.0;
    double ss2 = 0.0;
    for (double v : x) {
        const double c = std::cos(theta * v);
        const double s = std::sin(theta * v);
        sc += c;
        ss += s;
        sc2 += c * c;
        ss2 += s * s;
    }
    const double mc = sc / n;
    const double ms = ss / n;
    if (se) {
        const double vc = std::max(0.0, (sc2 - n * mc * mc) / (n - 1.0));
        const double vs = std::max(0.0, (ss2 - n * ms * ms) / (n - 1.0));
        *se = std::sqrt((vc + vs) / n);
    }
    return {mc, ms};
}

inline void check_sample(std::span<const double> x, std::size_t minimum = 100) {
    if (x.empty()) throw ValidationError("empty sample");
    if (x.size() < minimum)
        throw ValidationError("sample has " + std::to_string(x.size()) + " values; at least " +
                              std::to_string(minimum) + " required");
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1));
    return g;
}

inline double abs_quantile(std::span<const double> x, double q) {
    std::vector<double> a(x.size());
    std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::abs(v); });
    const auto k = static_cast<std::size_t>(q * static_cast<double>(a.size() - 1));
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k), a.end());
    return a[k];
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_se = 0.0;
};

inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    const double sse = std::max(0.0, syy - f.slope * sxy);
    f.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    f.slope_se = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
    return f;
}

}  // namespace detail

inline EcfCurve ecf(std::span<const double> sample, std::span<const double> theta_grid) {
    detail::check_sample(sample);
    EcfCurve c;
    c.n_samples = sample.size();
    for (double th : theta_grid) {
        double se = 0.0;
        c.theta.push_back(th);
        if (th == 0.0) {
            c.values.emplace_back(1.0, 0.0);
            c.std_errors.push_back(0.0);
            continue;
        }
        c.values.push_back(detail::ecf_point(sample, th, &se));
        c.std_errors.push_back(se);
    }
    return c;
}

struct IndexFit {
    double index_hat = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double theta_lo = 0.0;
    double theta_hi = 0.0;
    std::size_t n_points = 0;
    double slope_se = 0.0;
};

/// theta window on which |ECF| runs from upper down to lower.
inline std::pair<double, double> adaptive_theta_window(std::span<const double> sample, double upper = 0.8,
                                                       double lower = 0.2) {
    detail::check_sample(sample);
    double scale = detail::abs_quantile(sample, 0.5);
    if (!(scale > 0.0)) scale = detail::abs_quantile(sample, 0.9);
    if (!(scale > 0.0)) throw WindowError("sample is degenerate at zero; |ECF| = 1 everywhere", 0.0, 0.0);
    const auto grid = detail::log_grid(1e-4 / scale, 1e4 / scale, 321);
    std::optional<double> lo;
    std::optional<double> hi;
    for (double th : grid) {
        const double m = std::abs(detail::ecf_point(sample, th));
        if (!lo && m <= upper) lo = th;
        if (lo && m <= lower) {
            hi = th;
            break;
        }
    }
    if (!lo || !hi || !(*hi > *lo))
        throw WindowError("|ECF| never spans [" + std::to_string(lower) + ", " + std::to_string(upper) + "]",
                          grid.front(), grid.back());
    return {*lo, *hi};
}

/// Smallest theta on the search grid at which |ECF| drops to `level`.
inline double theta_at_modulus(std::span<const double> sample, double level) {
    return adaptive_theta_window(sample, std::min(0.99, level + 0.4), level).second;
}

/// Slope of log(-log|ECF(theta)|) against log theta.
inline IndexFit stability_index_fit(std::span<const double> sample,
                                    std::optional<std::pair<double, double>> window = std::nullopt,
                                    std::size_t n_points = 16) {
    detail::check_sample(sample);
    if (n_points < 4) throw ValidationError("index fit needs at least 4 grid points");
    const auto win = window ? *window : adaptive_theta_window(sample);
    if (!(win.first > 0.0 && win.second > win.first)) throw ValidationError("invalid theta window");
    const auto grid = detail::log_grid(win.first, win.second, n_points);
    std::vector<double> xs;
    std::vector<double> ys;
    for (double th : grid) {
        const double m = std::abs(detail::ecf_point(sample, th));
        if (!(m > 0.02 && m < 0.98)) {
            std::pair<double, double> suggested{0.0, 0.0};
            try {
                suggested = adaptive_theta_window(sample);
            } catch (const WindowError&) {
            }
            throw WindowError("|ECF| is too close to 0 or 1 on the window (ill-conditioned)", suggested.first,
                              suggested.second);
        }
        xs.push_back(std::log(th));
        ys.push_back(std::log(-std::log(m)));
    }
    const auto f = detail::least_squares(xs, ys);
    IndexFit out;
    out.index_hat = f.slope;
    out.intercept = f.intercept;
    out.r_squared = f.r_squared;
    out.theta_lo = win.first;
    out.theta_hi = win.second;
    out.n_points = n_points;
    out.slope_se = f.slope_se;
    return out;
}

/// Noiseless version for an exact modulus |phi| on a theta grid.
inline IndexFit stability_index_fit_exact(std::span<const double> theta, std::span<const double> modulus) {
    if (theta.size() < 4 || theta.size() != modulus.size())
        throw ValidationError("index fit needs at least 4 matching grid points");
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!(modulus[i] > 0.0 && modulus[i] < 1.0))
            throw WindowError("|phi| must lie strictly inside (0, 1)", theta.front(), theta.back());
        xs.push_back(std::log(theta[i]));
        ys.push_back(std::log(-std::log(modulus[i])));
    }
    const auto f = detail::least_squares(xs, ys);
    return {f.slope, f.intercept, f.r_squared, theta.front(), theta.back(), theta.size(), f.slope_se};
}

struct SelfSimilarityFit {
    IndexFit fit;
    std::vector<double> scales;
    std::vector<double> matched_exponents;  // s(c) per scale
};

/// Estimate H from samples of Y(c t) for scales c (the first scale must be 1).
inline SelfSimilarityFit selfsim_index_fit(std::span<const std::vector<double>> samples,
                                           std::span<const double> scales) {
    if (samples.size() < 3 || samples.size() != scales.size())
        throw ValidationError("self-similarity fit needs at least 3 scales");
    if (scales[0] != 1.0) throw ValidationError("first scale must be 1");
    for (const auto& s : samples) detail::check_sample(s);
    const auto& base = samples[0];

    SelfSimilarityFit out;
    out.scales.assign(scales.begin(), scales.end());
    out.matched_exponents.push_back(0.0);
    for (std::size_t k = 1; k < samples.size(); ++k) {
        const double c = scales[k];
        if (!(c > 1.0)) throw ValidationError("scales must exceed 1 after the first");
        const auto& target = samples[k];
        const auto win = adaptive_theta_window(target);
        const auto grid = detail::log_grid(win.first, win.second, 16);
        std::vector<std::complex<double>> phi_target;
        std::vector<double> se_target;
        for (double th : grid) {
            double se = 0.0;
            phi_target.push_back(detail::ecf_point(target, th, &se));
            se_target.push_back(se);
        }
        // weighted L2 distance between ECF of Y(ct) and of c^s Y(t)
        auto distance = [&](double s) {
            const double f = std::pow(c, s);
            double d = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                double se = 0.0;
                const auto phi = detail::ecf_point(base, f * grid[i], &se);
                const double var = se_target[i] * se_target[i] + se * se;
                d += std::norm(phi - phi_target[i]) / std::max(var, 1e-300);
            }
            return d;
        };
        double best_s = 0.0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 300; ++i) {
            const double s = -0.5 + i * 0.01;
            const double d = distance(s);
            if (d < best_d) {
                best_d = d;
                best_s = s;
            }
        }
        // golden-section refinement inside the bracketing cell
        double a = best_s - 0.01;
        double b = best_s + 0.01;
        const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - ratio * (b - a);
        double x2 = a + ratio * (b - a);
        double f1 = distance(x1);
        double f2 = distance(x2);
        while (b - a > 1e-9) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - ratio * (b - a);
                f1 = distance(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + ratio * (b - a);
                f2 = distance(x2);
            }
        }
        const double s_hat = 0.5 * (a + b);
        const double check = std::abs(detail::ecf_point(base, std::pow(c, s_hat) * grid[grid.size() / 2]));
        if (!(check > 0.02 && check < 0.98))
            throw WindowError("ECF supports of the scaled samples do not overlap", win.first, win.second);
        out.matched_exponents.push_back(s_hat);
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t k = 0; k < scales.size(); ++k) {
        xs.push_back(std::log(scales[k]));
        ys.push_back(out.matched_exponents[k] * std::log(scales[k]));
    }
    const auto f = detail::least_squares(xs, ys);
    out.fit = {f.slope, f.intercept, f.r_squared, 0.0, 0.0, scales.size(), f.slope_se};
    return out;
}

struct DependenceResult {
    double D = 0.0;
    double std_error = 0.0;
    std::complex<double> difference;
    bool dependent(double k = 3.0) const { return D > k * std_error; }
};

/// D = |phi_joint(theta1, theta2) - phi_1(theta1) phi_2(theta2)| for two
/// increments, with a bootstrap standard error of the complex difference.
inline DependenceResult increment_dependence(std::span<const double> first, std::span<const double> second,
                                             double theta1, double theta2, std::uint64_t seed,
                                             std::size_t n_boot = 200) {
    if (first.size() != second.size()) throw ValidationError("increment samples differ in length");
    detail::check_sample(first);
    const std::size_t n = first.size();
    auto statistic = [&](const std::vector<std::size_t>* idx) {
        std::complex<double> joint = 0.0;
        std::complex<double> p1 = 0.0;
        std::complex<double> p2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i = idx ? (*idx)[k] : k;
            const double a = theta1 * first[i];
            const double b = theta2 * second[i];
            joint += std::polar(1.0, a + b);
            p1 += std::polar(1.0, a);
            p2 += std::polar(1.0, b);
        }
        const double inv = 1.0 / static_cast<double>(n);
        return joint * inv - (p1 * inv) * (p2 * inv);
    };
    DependenceResult r;
    r.difference = statistic(nullptr);
    r.D = std::abs(r.difference);
    std::vector<std::complex<double>> boot;
    boot.reserve(n_boot);
    std::vector<std::size_t> idx(n);
    for (std::size_t b = 0; b < n_boot; ++b) {
        Rng rng = stream_rng(seed ^ 0xb007b007b007b007ULL, b);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (auto& i : idx) i = pick(rng);
        boot.push_back(statistic(&idx));
    }
    std::complex<double> mean = 0.0;
    for (const auto& v : boot) mean += v;
    mean /= static_cast<double>(n_boot);
    double var = 0.0;
    for (const auto& v : boot) var += std::norm(v - mean);
    r.std_error = std::sqrt(var / static_cast<double>(n_boot - 1));
    return r;
}

struct TwoSampleResult {
    double statistic = 0.0;
    std::size_t df = 0;
    double p_value = 1.0;
};

/// Chi-square test of equal ECFs on a theta grid: Hotelling-type statistic
/// on the mean differences of (cos theta x, sin theta x).
inline TwoSampleResult ecf_two_sample_test(std::span<const double> x, std::span<const double> y,
                                           std::span<const double> theta_grid) {
    detail::check_sample(x);
    detail::check_sample(y);
    const auto dim = static_cast<Eigen::Index>(2 * theta_grid.size());
    auto moments = [&](std::span<const double> s, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
        mean = Eigen::VectorXd::Zero(dim);
        cov = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd v(dim);
        for (double value : s) {
            for (std::size_t k = 0; k < theta_grid.size(); ++k) {
                v(static_cast<Eigen::Index>(2 * k)) = std::cos(theta_grid[k] * value);
                v(static_cast<Eigen::Index>(2 * k + 1)) = std::sin(theta_grid[k] * value);
            }
            mean += v;
            cov += v * v.transpose();
        }
        const double n = static_cast<double>(s.size());
        mean /= n;
        cov = (cov - n * mean * mean.transpose()) / (n - 1.0);
    };
    Eigen::VectorXd mx, my;
    Eigen::MatrixXd cx, cy;
    moments(x, mx, cx);
    moments(y, my, cy);
    const Eigen::VectorXd d = mx - my;
    const Eigen::MatrixXd S = cx / static_cast<double>(x.size()) + cy / static_cast<double>(y.size());
    const Eigen::VectorXd sol = S.ldlt().solve(d);
    TwoSampleResult r;
    r.statistic = d.dot(sol);
    r.df = static_cast<std::size_t>(dim);
    r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.df), 0.5 * r.statistic);
    return r;
}

}  // namespace trawl
