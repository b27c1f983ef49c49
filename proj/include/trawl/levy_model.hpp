#pragma once

// Symmetric Levy measures, their exponents psi, and classification of the
// limit regime an integrated trawl process falls into.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "trawl/error.hpp"
#include "trawl/quadrature.hpp"

namespace trawl {

struct SymmetricStable {
    double alpha;
};

/// nu = lambda (delta_{jump} + delta_{-jump}).
struct PoissonDifference {
    double lambda;
    double jump = 1.0;
};

/// nu(dx) = h(x) dx with h symmetric. Either a callable or a piecewise-linear
/// table over x > 0 (zero outside the table's range).
struct DensityBased {
    std::function<double(double)> h;
    std::vector<std::pair<double, double>> table;

    bool is_table() const noexcept { return !table.empty(); }
};

namespace detail {

inline double table_density(std::span<const std::pair<double, double>> table, double x) {
    x = std::abs(x);
    if (table.empty() || x < table.front().first || x > table.back().first) return 0.0;
    auto it = std::upper_bound(table.begin(), table.end(), x,
                               [](double v, const auto& p) { return v < p.first; });
    if (it == table.end()) return table.back().second;
    if (it == table.begin()) return table.front().second;
    const auto& [x1, h1] = *it;
    const auto& [x0, h0] = *(it - 1);
    const double w = (x - x0) / (x1 - x0);
    return h0 + w * (h1 - h0);
}

// Integral of (p + q y)(1 - cos(theta y)) over [a, b], theta > 0.
inline double linear_one_minus_cos(double p, double q, double a, double b, double theta) {
    if (!(b > a)) return 0.0;
    if (theta * b < 0.1) {
        // 1 - cos z = z^2/2 - z^4/24 + z^6/720 - z^8/40320 + z^10/3628800
        static constexpr std::array<double, 5> c = {1.0 / 2.0, -1.0 / 24.0, 1.0 / 720.0,
                                                    -1.0 / 40320.0, 1.0 / 3628800.0};
        double total = 0.0;
        double th = theta * theta;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double m = 2.0 * static_cast<double>(k + 1);  // power of y
            const double ip = (std::pow(b, m + 1) - std::pow(a, m + 1)) / (m + 1);
            const double iq = (std::pow(b, m + 2) - std::pow(a, m + 2)) / (m + 2);
            total += c[k] * th * (p * ip + q * iq);
            th *= theta * theta;
        }
        return total;
    }
    auto prim = [&](double y) {
        return p * y + 0.5 * q * y * y - (p + q * y) * std::sin(theta * y) / theta -
               q * std::cos(theta * y) / (theta * theta);
    };
    return prim(b) - prim(a);
}

}  // namespace detail

/// A symmetric Levy measure together with optional regime metadata.
class LevyBasisSpec {
public:
    using Kind = std::variant<SymmetricStable, PoissonDifference, DensityBased>;

    static LevyBasisSpec stable(double alpha) {
        if (!(alpha > 0.0 && alpha < 2.0)) throw ValidationError("stable alpha must lie in (0, 2)");
        LevyBasisSpec s(SymmetricStable{alpha});
        s.alpha_at_infinity = alpha;
        s.alpha_at_zero = alpha;
        return s;
    }

    static LevyBasisSpec poisson_difference(double lambda, double jump = 1.0) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be >= 0");
        if (!(jump > 0.0) || !std::isfinite(jump)) throw ValidationError("jump must be > 0");
        return LevyBasisSpec(PoissonDifference{lambda, jump});
    }

    static LevyBasisSpec density(std::function<double(double)> h) {
        LevyBasisSpec s(DensityBased{std::move(h), {}});
        s.validate_density();
        return s;
    }

    /// Table of (x, h(x)); entries with x < 0 must mirror those with x > 0.
    static LevyBasisSpec density_table(std::vector<std::pair<double, double>> table) {
        std::vector<std::pair<double, double>> positive;
        std::vector<std::pair<double, double>> negative;
        for (const auto& [x, h] : table) {
            if (!std::isfinite(x) || !std::isfinite(h) || h < 0.0)
                throw ValidationError("density table entries must be finite with h >= 0");
            if (x > 0.0)
                positive.emplace_back(x, h);
            else if (x < 0.0)
                negative.emplace_back(-x, h);
        }
        std::sort(positive.begin(), positive.end());
        std::sort(negative.begin(), negative.end());
        if (positive.size() < 2) throw ValidationError("density table needs at least two x > 0 nodes");
        for (std::size_t i = 1; i < positive.size(); ++i)
            if (!(positive[i].first > positive[i - 1].first))
                throw ValidationError("density table x values must be distinct");
        for (const auto& [x, h] : negative) {
            const double mirror = detail::table_density(positive, x);
            if (std::abs(mirror - h) > 1e-12 * std::max(1.0, std::abs(h)))
                throw ValidationError("density table is not symmetric: h(x) != h(-x)");
        }
        auto copy = positive;
        LevyBasisSpec s(DensityBased{[copy](double x) { return detail::table_density(copy, x); },
                                     std::move(positive)});
        s.validate_density();
        return s;
    }

    const Kind& kind() const noexcept { return kind_; }

    bool is_stable() const noexcept { return std::holds_alternative<SymmetricStable>(kind_); }
    bool is_poisson() const noexcept { return std::holds_alternative<PoissonDifference>(kind_); }
    bool is_density() const noexcept { return std::holds_alternative<DensityBased>(kind_); }

    double stable_alpha() const { return std::get<SymmetricStable>(kind_).alpha; }

    /// Density of nu at x != 0 (zero for atomic measures).
    double density_at(double x) const;

    /// nu(R); +inf for infinite-activity measures.
    double total_mass() const noexcept { return total_mass_; }
    bool is_finite_activity() const noexcept { return std::isfinite(total_mass_); }

    std::optional<double> alpha_at_infinity;
    std::optional<double> alpha_at_zero;
    std::optional<double> moment_kappa;

private:
    explicit LevyBasisSpec(Kind k) : kind_(std::move(k)) {
        if (auto* p = std::get_if<PoissonDifference>(&kind_)) total_mass_ = 2.0 * p->lambda;
    }

    void validate_density();

    Kind kind_;
    double total_mass_ = std::numeric_limits<double>::infinity();
};

/// Constant c_alpha with integral (1 - cos(theta y)) c_alpha |y|^{-1-alpha} dy = |theta|^alpha.
double stable_density_constant(double alpha);

/// C_alpha = (integral_0^inf x^{-alpha} sin x dx)^{-1}, the LePage series constant.
inline double lepage_constant(double alpha) {
    if (std::abs(alpha - 1.0) < 1e-12) return 2.0 / std::numbers::pi;
    return (1.0 - alpha) / (std::tgamma(2.0 - alpha) * std::cos(std::numbers::pi * alpha / 2.0));
}

/// The exponent psi of nu restricted to |x| in [band_lo, band_hi).
class LevyExponent {
public:
    enum class Mode { closed_form, quadrature };

    explicit LevyExponent(LevyBasisSpec spec, Mode mode = Mode::closed_form, double tol = 1e-9)
        : spec_(std::move(spec)), mode_(mode), tol_(tol) {}

    LevyExponent restricted(double lo, double hi) const {
        LevyExponent e(spec_, mode_, tol_);
        e.lo_ = std::max(lo, lo_);
        e.hi_ = std::min(hi, hi_);
        return e;
    }

    const LevyBasisSpec& spec() const noexcept { return spec_; }
    Mode mode() const noexcept { return mode_; }
    double tol() const noexcept { return tol_; }
    double band_lo() const noexcept { return lo_; }
    double band_hi() const noexcept { return hi_; }
    bool is_full_band() const noexcept { return lo_ == 0.0 && std::isinf(hi_); }

    /// Exponent psi is |theta|^alpha exactly.
    bool is_pure_stable() const noexcept { return spec_.is_stable() && is_full_band(); }

    /// psi is identically zero (empty band or lambda = 0).
    bool is_zero() const noexcept;

    double operator()(double theta) const;

    /// Closed-form integral of psi over [0, x] is available.
    bool has_antiderivative() const noexcept;
    double antiderivative(double x) const;

private:
    double density_quadrature(double theta) const;

    LevyBasisSpec spec_;
    Mode mode_;
    double tol_;
    double lo_ = 0.0;
    double hi_ = std::numeric_limits<double>::infinity();
};

inline double psi_eval(const LevyExponent& exponent, double theta) {
    if (!std::isfinite(theta)) throw ValidationError("theta must be finite");
    return exponent(theta);
}

/// (psi_1, psi_2) from nu restricted to {|x| < threshold} and {|x| >= threshold}.
inline std::pair<LevyExponent, LevyExponent> split_exponent(const LevyExponent& exponent,
                                                            double threshold) {
    if (!(threshold > 0.0)) throw ValidationError("split threshold must be > 0");
    return {exponent.restricted(0.0, threshold),
            exponent.restricted(threshold, std::numeric_limits<double>::infinity())};
}

// ---------------------------------------------------------------------------
// Implementation

namespace detail {

// 2 * integral over y in [lo, hi) of (1 - cos(theta y)) h(y), theta > 0, for a
// callable density. The inner part near 0 uses y = c e^{-s}; the tail past
// pi/theta is summed over half periods with Wynn acceleration.
template <class H>
double callable_band_psi(const H& h, double theta, double lo, double hi, double tol) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double period = std::numbers::pi / theta;
    const quad::Options opt{tol * 1e-6, 1e-12, 8000};
    double total = 0.0;

    auto one_minus_cos = [theta](double y) {
        const double s = std::sin(0.5 * theta * y);
        return 2.0 * s * s;
    };

    const double inner_hi = std::min(hi, period);
    if (inner_hi > lo) {
        quad::Result r;
        if (lo == 0.0) {
            r = quad::integrate(
                [&](double s) {
                    const double y = inner_hi * std::exp(-s);
                    if (y == 0.0) return 0.0;
                    return one_minus_cos(y) * h(y) * y;
                },
                0.0, inf, opt);
        } else {
            r = quad::integrate([&](double y) { return one_minus_cos(y) * h(y); }, lo, inner_hi, opt);
        }
        if (!r.converged || !std::isfinite(r.value))
            throw ValidationError("Levy condition fails: psi integral does not converge near 0");
        total += r.value;
    }

    const double start = std::max(lo, period);
    if (hi > start) {
        if (std::isfinite(hi)) {
            std::vector<double> bp{start};
            double z = (std::floor(start / period - 0.5) + 1.5) * period;
            while (z < hi && bp.size() < 200000) {
                bp.push_back(z);
                z += period;
            }
            bp.push_back(hi);
            const auto r = quad::integrate([&](double y) { return one_minus_cos(y) * h(y); },
                                           std::span<const double>(bp),
                                           quad::Options{tol * 0.1, 1e-12, bp.size() + 8000});
            if (!r.converged) throw AccuracyError("psi quadrature did not converge", r.error);
            total += r.value;
        } else {
            // integral of h over [start, inf) via y = start e^{s}
            const auto mass = quad::integrate(
                [&](double s) {
                    const double y = start * std::exp(s);
                    if (!std::isfinite(y)) return 0.0;
                    return h(y) * y;
                },
                0.0, inf, opt);
            if (!mass.converged || !std::isfinite(mass.value))
                throw ValidationError("Levy condition fails: nu has a non-integrable tail");
            // minus the oscillatory part, alternating over half periods
            auto cos_part = [&](double a, double b) {
                const auto r = quad::integrate([&](double y) { return std::cos(theta * y) * h(y); },
                                               a, b, quad::Options{tol * 1e-8, 1e-13, 200});
                return r.value;
            };
            std::vector<double> partial;
            double sum = 0.0;
            double a = start;
            double b = (std::floor(start / period - 0.5) + 1.5) * period;
            if (b - a < 1e-9 * period) b += period;
            double estimate = 0.0;
            double err = inf;
            const double target = std::max(tol, 1e-11 * mass.value);
            for (int block = 0; block < 4 && err > target * 0.1; ++block) {
                const int count = 40 * (1 << (2 * block));
                while (static_cast<int>(partial.size()) < count) {
                    sum += cos_part(a, b);
                    partial.push_back(sum);
                    a = b;
                    b += period;
                }
                const std::size_t window = std::min<std::size_t>(partial.size(), 30);
                const auto ex = quad::wynn_epsilon(
                    std::span<const double>(partial).subspan(partial.size() - window, window));
                estimate = ex.value;
                err = ex.error;
            }
            if (err > target) throw AccuracyError("psi oscillatory tail did not converge", err);
            total += mass.value - estimate;
        }
    }
    return 2.0 * total;
}

inline double table_band_psi(std::span<const std::pair<double, double>> table, double theta,
                             double lo, double hi) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < table.size(); ++i) {
        const auto [x0, h0] = table[i];
        const auto [x1, h1] = table[i + 1];
        const double a = std::max(x0, lo);
        const double b = std::min(x1, hi);
        if (!(b > a)) continue;
        const double q = (h1 - h0) / (x1 - x0);
        const double p = h0 - q * x0;
        total += linear_one_minus_cos(p, q, a, b, theta);
    }
    return 2.0 * total;
}

}  // namespace detail

inline double LevyBasisSpec::density_at(double x) const {
    if (x == 0.0) return 0.0;
    return std::visit(
        [x](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, SymmetricStable>)
                return stable_density_constant(k.alpha) * std::pow(std::abs(x), -1.0 - k.alpha);
            else if constexpr (std::is_same_v<K, PoissonDifference>)
                return 0.0;
            else
                return k.h(x);
        },
        kind_);
}

inline void LevyBasisSpec::validate_density() {
    auto& d = std::get<DensityBased>(kind_);
    if (!d.h) throw ValidationError("density callable is empty");
    for (double x : {1e-6, 1e-3, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0}) {
        const double hp = d.h(x);
        const double hm = d.h(-x);
        if (!std::isfinite(hp) || hp < 0.0) throw ValidationError("density must be finite and >= 0");
        if (std::abs(hp - hm) > 1e-12 * std::max(1.0, std::abs(hp)))
            throw ValidationError("Levy measure must be symmetric: h(x) != h(-x)");
    }
    if (d.is_table()) {
        double mass = 0.0;
        for (std::size_t i = 0; i + 1 < d.table.size(); ++i)
            mass += 0.5 * (d.table[i].second + d.table[i + 1].second) *
                    (d.table[i + 1].first - d.table[i].first);
        total_mass_ = 2.0 * mass;
        return;
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    // Levy integrability: integral of min(1, y^2) h(y) over y > 0.
    const auto h = d.h;
    const auto near = quad::integrate(
        [&](double s) {
            const double y = std::exp(-s);
            if (y == 0.0) return 0.0;
            return y * y * h(y) * y;
        },
        0.0, inf, quad::Options{1e-12, 1e-9, 4000});
    const auto far = quad::integrate(
        [&](double s) {
            const double y = std::exp(s);
            if (!std::isfinite(y)) return 0.0;
            return h(y) * y;
        },
        0.0, inf, quad::Options{1e-12, 1e-9, 4000});
    // on the log scale an integrable tail must decay; a flat or growing integrand diverges
    const auto decays = [](const auto& f) {
        const double a = f(100.0), b = f(200.0);
        return b == 0.0 || (std::isfinite(b) && b < 0.99 * a);
    };
    const auto near_tail = [&](double s) { const double y = std::exp(-s); return y * h(y) * y * y; };
    const auto far_tail = [&](double s) { return std::exp(s) * h(std::exp(s)); };
    if (!near.converged || !far.converged || !std::isfinite(near.value + far.value) || !decays(near_tail) ||
        !decays(far_tail))
        throw ValidationError("Levy condition fails: integral of min(1, y^2) nu(dy) is not finite");
    // Finite activity iff the density is integrable at the origin.
    const auto small = quad::integrate(
        [&](double s) {
            const double y = std::exp(-s);
            if (y == 0.0) return 0.0;
            return h(y) * y;
        },
        0.0, inf, quad::Options{1e-12, 1e-9, 4000});
    if (small.converged && std::isfinite(small.value) && small.value < 1e12)
        total_mass_ = 2.0 * (small.value + far.value);
}

inline double stable_density_constant(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw ValidationError("stable alpha must lie in (0, 2)");
    static std::mutex mutex;
    static std::map<double, double> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find(alpha); it != cache.end()) return it->second;
    const double unit = detail::callable_band_psi(
        [alpha](double y) { return std::pow(y, -1.0 - alpha); }, 1.0, 0.0,
        std::numeric_limits<double>::infinity(), 1e-13);
    const double c = 1.0 / unit;
    cache.emplace(alpha, c);
    return c;
}

inline bool LevyExponent::is_zero() const noexcept {
    if (!(hi_ > lo_)) return true;
    if (const auto* p = std::get_if<PoissonDifference>(&spec_.kind()))
        return p->lambda == 0.0 || p->jump < lo_ || p->jump >= hi_;
    return false;
}

inline double LevyExponent::operator()(double theta) const {
    theta = std::abs(theta);
    if (theta == 0.0 || is_zero()) return 0.0;
    if (const auto* p = std::get_if<PoissonDifference>(&spec_.kind())) {
        const double s = std::sin(0.5 * p->jump * theta);
        return 2.0 * p->lambda * 2.0 * s * s;
    }
    if (const auto* st = std::get_if<SymmetricStable>(&spec_.kind())) {
        if (is_full_band() && mode_ == Mode::closed_form) return std::pow(theta, st->alpha);
    }
    return density_quadrature(theta);
}

inline double LevyExponent::density_quadrature(double theta) const {
    if (const auto* st = std::get_if<SymmetricStable>(&spec_.kind())) {
        const double c = stable_density_constant(st->alpha);
        const double a = st->alpha;
        return detail::callable_band_psi([c, a](double y) { return c * std::pow(y, -1.0 - a); },
                                         theta, lo_, hi_, tol_);
    }
    const auto& d = std::get<DensityBased>(spec_.kind());
    if (d.is_table()) return detail::table_band_psi(d.table, theta, lo_, hi_);
    return detail::callable_band_psi(d.h, theta, lo_, hi_, tol_);
}

inline bool LevyExponent::has_antiderivative() const noexcept {
    if (is_zero()) return true;
    if (spec_.is_poisson()) return true;
    return is_pure_stable() && mode_ == Mode::closed_form;
}

inline double LevyExponent::antiderivative(double x) const {
    if (is_zero()) return 0.0;
    if (const auto* p = std::get_if<PoissonDifference>(&spec_.kind())) {
        // 2 lambda (x - sin(j x)/j), with a series where the difference cancels
        const double z = p->jump * x;
        double v;
        if (std::abs(z) < 0.05) {
            const double z2 = z * z;
            v = z * z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0 * (1.0 - z2 / 72.0)));
        } else {
            v = z - std::sin(z);
        }
        return 2.0 * p->lambda * v / p->jump;
    }
    const double a = spec_.stable_alpha();
    return std::copysign(std::pow(std::abs(x), a + 1.0) / (a + 1.0), x);
}

// ---------------------------------------------------------------------------
// Regime classification

enum class Regime { thm1, thm2, thm3, critical, unclassified };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::thm1: return "THM1";
        case Regime::thm2: return "THM2";
        case Regime::thm3: return "THM3";
        case Regime::critical: return "CRITICAL";
        case Regime::unclassified: return "UNCLASSIFIED";
    }
    return "UNCLASSIFIED";
}

inline std::optional<Regime> regime_from_name(const std::string& s) {
    for (Regime r : {Regime::thm1, Regime::thm2, Regime::thm3, Regime::critical, Regime::unclassified})
        if (s == regime_name(r)) return r;
    return std::nullopt;
}

/// F_T = T^power (log T)^log_power.
struct Norming {
    double power = 1.0;
    double log_power = 0.0;

    double operator()(double T) const {
        double v = std::pow(T, power);
        if (log_power != 0.0) v *= std::pow(std::log(T), log_power);
        return v;
    }
};

struct HypothesisCheck {
    std::string name;
    bool holds = false;
    std::string evidence;
};

struct RegimeReport {
    Regime regime = Regime::unclassified;
    double gamma = 0.0;
    Norming norming;
    /// Stability index of the limit: alpha for THM1/THM3/CRITICAL, 1 + gamma for THM2.
    double stability_index = 0.0;
    std::optional<double> hurst;  // self-similarity index H = 1 - gamma/alpha (THM1)
    double alpha_at_infinity = 0.0;
    double c_psi = 0.0;
    double alpha_at_zero = 0.0;
    double c_alpha = 0.0;
    std::optional<double> kappa;
    std::vector<HypothesisCheck> checks;
};

namespace detail {

inline std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Maximum of psi over [10^k, 10^{k+1}] sampled on a dense log grid.
inline double decade_sup(const LevyExponent& psi, int k) {
    double best = 0.0;
    for (int i = 0; i <= 48; ++i) {
        const double theta = std::pow(10.0, k + i / 48.0);
        best = std::max(best, psi(theta));
    }
    return best;
}

inline std::optional<double> upper_moment_exponent(const LevyBasisSpec& spec, double above) {
    if (spec.is_poisson()) return above + 0.25;
    if (spec.is_stable()) {
        const double a = spec.stable_alpha();
        if (a > above) return 0.5 * (a + above);
        return std::nullopt;
    }
    const auto& d = std::get<DensityBased>(spec.kind());
    if (d.is_table()) return above + 0.25;
    for (double step : {0.25, 0.1, 0.03, 0.01}) {
        const double kappa = above + step;
        const auto r = quad::integrate(
            [&](double s) {
                const double y = std::exp(s);
                if (!std::isfinite(y)) return 0.0;
                return std::pow(y, kappa) * d.h(y) * y;
            },
            0.0, std::numeric_limits<double>::infinity(), quad::Options{1e-12, 1e-8, 4000});
        if (r.converged && std::isfinite(r.value)) return kappa;
    }
    return std::nullopt;
}

}  // namespace detail

/// Evaluate the model hypotheses on log-spaced grids and classify the regime.
inline RegimeReport verify_hypotheses(const LevyBasisSpec& spec, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
    using detail::fmt_num;
    RegimeReport rep;
    rep.gamma = gamma;
    const double critical_index = 1.0 + gamma;
    const LevyExponent psi(spec);

    // Growth at infinity from decade maxima over [1e4, 1e6].
    const double m4 = detail::decade_sup(psi, 4);
    const double m5 = detail::decade_sup(psi, 5);
    double alpha_inf = (m4 > 0.0 && m5 > 0.0) ? std::log10(m5 / m4) : 0.0;
    if (spec.is_stable()) alpha_inf = spec.stable_alpha();
    if (std::abs(alpha_inf) < 1e-3) alpha_inf = 0.0;
    rep.alpha_at_infinity = alpha_inf;
    rep.c_psi = alpha_inf > 0.0 ? psi(1e6) / std::pow(1e6, alpha_inf) : 0.0;

    // Behaviour at zero from psi(1e-5) / psi(1e-6).
    const double p5 = psi(1e-5);
    const double p6 = psi(1e-6);
    double alpha_zero = (p5 > 0.0 && p6 > 0.0) ? std::log10(p5 / p6) : 0.0;
    if (spec.is_stable()) alpha_zero = spec.stable_alpha();
    rep.alpha_at_zero = alpha_zero;
    rep.c_alpha = p6 > 0.0 ? p6 / std::pow(1e-6, alpha_zero) : 0.0;
    if (spec.is_stable()) {
        rep.c_psi = 1.0;
        rep.c_alpha = 1.0;
    }

    const auto kappa = detail::upper_moment_exponent(spec, critical_index);
    rep.kappa = kappa;

    const bool is_zero = m4 == 0.0 && m5 == 0.0 && p5 == 0.0;
    const double eps = 1e-6;

    HypothesisCheck assum_a{"psi(x)/|x|^alpha -> C_psi as |x| -> inf, alpha in (0,2)",
                            alpha_inf > eps && alpha_inf < 2.0 && rep.c_psi > 0.0,
                            "alpha_inf=" + fmt_num(alpha_inf) + " C_psi=" + fmt_num(rep.c_psi)};
    HypothesisCheck moment{"integral_{|y|>=1} |y|^kappa nu(dy) < inf for some kappa > 1+gamma",
                           kappa.has_value(),
                           kappa ? "kappa=" + fmt_num(*kappa) : std::string("no admissible kappa found")};
    HypothesisCheck thm1{"THM1: alpha > 1+gamma with moment condition",
                         assum_a.holds && alpha_inf > critical_index + eps && moment.holds,
                         "alpha=" + fmt_num(alpha_inf) + " vs 1+gamma=" + fmt_num(critical_index)};
    HypothesisCheck thm2i{"THM2(i): psi(u) <= C |u|^kappa ^ |u|^alpha, kappa > 1+gamma > alpha",
                          !is_zero && alpha_zero > critical_index + eps && alpha_inf < critical_index - eps,
                          "exponent at 0=" + fmt_num(alpha_zero) + " growth at inf=" + fmt_num(alpha_inf)};
    HypothesisCheck thm3{"THM3: psi(x)/|x|^alpha -> C_alpha at 0 with alpha < 1+gamma, growth below 1+gamma",
                         !is_zero && alpha_zero > eps && alpha_zero < critical_index - eps &&
                             alpha_inf < critical_index - eps && rep.c_alpha > 0.0,
                         "alpha_0=" + fmt_num(alpha_zero) + " C_alpha=" + fmt_num(rep.c_alpha)};
    const bool critical = spec.is_stable() && std::abs(spec.stable_alpha() - critical_index) <= 1e-9;
    HypothesisCheck crit{"CRITICAL: stable basis with alpha = 1+gamma", critical,
                         "alpha=" + fmt_num(alpha_inf)};
    rep.checks = {assum_a, moment, thm1, thm2i, thm3, crit};

    if (critical) {
        const double a = spec.stable_alpha();
        rep.regime = Regime::critical;
        rep.norming = Norming{1.0 / a, 1.0 / a};
        rep.stability_index = a;
    } else if (thm1.holds) {
        rep.regime = Regime::thm1;
        rep.norming = Norming{(alpha_inf - gamma) / alpha_inf, 0.0};
        rep.stability_index = alpha_inf;
        rep.hurst = 1.0 - gamma / alpha_inf;
    } else if (thm2i.holds) {
        rep.regime = Regime::thm2;
        rep.norming = Norming{1.0 / critical_index, 0.0};
        rep.stability_index = critical_index;
    } else if (thm3.holds) {
        rep.regime = Regime::thm3;
        rep.norming = Norming{1.0 / alpha_zero, 0.0};
        rep.stability_index = alpha_zero;
    } else {
        rep.regime = Regime::unclassified;
    }
    return rep;
}

}  // namespace trawl
