#pragma once

// Trawl function geometry and the deterministic kernels f, h_T and a.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "trawl/error.hpp"
#include "trawl/quadrature.hpp"

namespace trawl {

/// f(t, r, u) = min(r, t) - min((r - u)_+, t): the time the interval
/// [r - u, r] spends inside [0, t].
inline double f_eval(double t, double r, double u) noexcept {
    // case split of min(r, t) - min((r - u)_+, t), free of cancellation
    if (r <= 0.0) return 0.0;
    if (r <= t) return std::min(r, u);
    if (r <= u) return t;
    return std::max(0.0, t + u - r);
}

/// Coefficients (a_j, t_j) of a finite linear combination of Y(t_j).
class TimeCombo {
public:
    struct Term {
        double a;
        double t;
    };

    TimeCombo() = default;

    explicit TimeCombo(std::vector<Term> terms) : terms_(std::move(terms)) {
        if (terms_.empty()) throw ValidationError("TimeCombo needs at least one (a, t) pair");
        for (const auto& term : terms_) {
            if (!std::isfinite(term.a) || !std::isfinite(term.t) || term.t < 0.0)
                throw ValidationError("TimeCombo times must be finite and nonnegative");
        }
        std::stable_sort(terms_.begin(), terms_.end(),
                         [](const Term& l, const Term& r) { return l.t < r.t; });
    }

    static TimeCombo single(double a, double t) { return TimeCombo({{a, t}}); }

    std::span<const Term> terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    double t_max() const noexcept { return terms_.empty() ? 0.0 : terms_.back().t; }

    double abs_coefficient_sum() const noexcept {
        double s = 0.0;
        for (const auto& term : terms_) s += std::abs(term.a);
        return s;
    }

    /// Sum_j a_j t_j, the plateau value of h_T / T for large u.
    double plateau() const noexcept {
        double s = 0.0;
        for (const auto& term : terms_) s += term.a * term.t;
        return s;
    }

    TimeCombo scaled(double factor) const {
        auto copy = terms_;
        for (auto& term : copy) term.a *= factor;
        return TimeCombo(std::move(copy));
    }

    bool is_zero() const noexcept {
        // a(r) vanishes identically iff every tail sum of coefficients over distinct times is zero
        double tail = 0.0;
        for (std::size_t i = terms_.size(); i-- > 0;) {
            tail += terms_[i].a;
            const bool boundary = i == 0 || terms_[i - 1].t != terms_[i].t;
            if (boundary && terms_[i].t > 0.0 && tail != 0.0) return false;
        }
        return true;
    }

private:
    std::vector<Term> terms_;
};

/// h_T(r, u) = sum_j a_j f(T t_j, r, u).
inline double h_eval(const TimeCombo& combo, double T, double r, double u) noexcept {
    double s = 0.0;
    for (const auto& term : combo.terms()) s += term.a * f_eval(T * term.t, r, u);
    return s;
}

/// a(r) = sum_j a_j 1{0 <= r <= t_j}.
inline double a_eval(const TimeCombo& combo, double r) noexcept {
    if (r < 0.0) return 0.0;
    double s = 0.0;
    for (const auto& term : combo.terms())
        if (r <= term.t) s += term.a;
    return s;
}

/// Integral of |a(r)|^p over [0, inf); a is piecewise constant so this is exact.
inline double a_power_integral(const TimeCombo& combo, double p) {
    double total = 0.0;
    double left = 0.0;
    for (const auto& term : combo.terms()) {
        const double right = term.t;
        if (right > left) {
            const double mid = 0.5 * (left + right);
            total += std::pow(std::abs(a_eval(combo, mid)), p) * (right - left);
        }
        left = std::max(left, right);
    }
    return total;
}

/// Trawl function g with its derivative, inverse and tail law
/// x^{2+gamma} |g'(x)| -> C_g.
class TrawlSpec {
public:
    using Fn = std::function<double(double)>;

    /// g(x) = C (1 + x)^{-1-gamma}.
    static TrawlSpec canonical(double gamma, double C = 1.0) {
        check_gamma(gamma);
        if (!(C > 0.0) || !std::isfinite(C)) throw ValidationError("trawl scale C must be > 0");
        TrawlSpec s;
        s.gamma_ = gamma;
        s.scale_ = C;
        s.canonical_ = true;
        s.c_g_ = C * (1.0 + gamma);
        s.g_ = [=](double x) { return C * std::pow(1.0 + x, -1.0 - gamma); };
        s.dg_ = [=](double x) { return -C * (1.0 + gamma) * std::pow(1.0 + x, -2.0 - gamma); };
        s.ginv_ = [=](double y) { return std::pow(C / y, 1.0 / (1.0 + gamma)) - 1.0; };
        return s;
    }

    /// User-supplied g, g', g^{-1}; consistency is checked numerically.
    static TrawlSpec custom(double gamma, double c_g, Fn g, Fn dg, Fn ginv) {
        check_gamma(gamma);
        if (!(c_g > 0.0)) throw ValidationError("declared C_g must be > 0");
        TrawlSpec s;
        s.gamma_ = gamma;
        s.scale_ = g(0.0);
        s.canonical_ = false;
        s.c_g_ = c_g;
        s.g_ = std::move(g);
        s.dg_ = std::move(dg);
        s.ginv_ = std::move(ginv);
        s.validate();
        return s;
    }

    double gamma() const noexcept { return gamma_; }
    double scale() const noexcept { return scale_; }
    double c_g() const noexcept { return c_g_; }
    bool is_canonical() const noexcept { return canonical_; }

    double g(double x) const { return g_(x); }
    double dg(double x) const { return dg_(x); }
    double abs_dg(double x) const { return std::abs(dg_(x)); }
    double ginv(double y) const { return ginv_(y); }
    double g0() const { return g_(0.0); }

    /// Integral of g over [x, inf).
    double tail_integral(double x) const {
        if (canonical_) return scale_ * std::pow(1.0 + x, -gamma_) / gamma_;
        const auto r = quad::integrate([this](double s) { return g_(s); }, x,
                                       std::numeric_limits<double>::infinity(),
                                       quad::Options{1e-13, 1e-11, 2000});
        if (!r.converged || !std::isfinite(r.value))
            throw ValidationError("trawl function is not integrable on the tail");
        return r.value;
    }

    /// Check the Assumption (G) properties on a test grid.
    void validate() const {
        const std::vector<double> grid = {0.0, 1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0, 1e3, 1e4};
        double prev = std::numeric_limits<double>::infinity();
        for (double x : grid) {
            const double gx = g_(x);
            if (!(gx > 0.0) || !std::isfinite(gx)) throw ValidationError("trawl function must be positive");
            if (!(gx < prev)) throw ValidationError("trawl function must be strictly decreasing");
            prev = gx;
            if (std::abs(ginv_(gx) - x) > 1e-10 * std::max(1.0, x))
                throw ValidationError("supplied g^{-1} is inconsistent with g");
        }
        // g' against a central difference of g
        for (double x : {0.5, 2.0, 20.0}) {
            const double h = 1e-5 * (1.0 + x);
            const double fd = (g_(x + h) - g_(x - h)) / (2.0 * h);
            if (std::abs(fd - dg_(x)) > 1e-5 * std::abs(dg_(x)) + 1e-12)
                throw ValidationError("supplied g' is inconsistent with g");
        }
        for (double x : {1e3, 1e4}) {
            const double law = std::pow(x, 2.0 + gamma_) * std::abs(dg_(x));
            if (std::abs(law / c_g_ - 1.0) > 0.01)
                throw ValidationError("tail law x^{2+gamma}|g'(x)| -> C_g violated");
        }
        trawl_measure_quadrature();
    }

    /// Integral of g over [0, inf) by quadrature.
    double trawl_measure_quadrature() const {
        const auto r = quad::integrate([this](double s) { return g_(s); }, 0.0,
                                       std::numeric_limits<double>::infinity(),
                                       quad::Options{1e-13, 1e-11, 4000});
        if (!r.converged || !std::isfinite(r.value))
            throw ValidationError("trawl function is not integrable");
        return r.value;
    }

private:
    static void check_gamma(double gamma) {
        if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
    }

    double gamma_ = 0.5;
    double scale_ = 1.0;
    double c_g_ = 1.5;
    bool canonical_ = true;
    Fn g_;
    Fn dg_;
    Fn ginv_;
};

/// Lebesgue measure of the trawl set, the integral of g over [0, inf).
inline double trawl_measure(const TrawlSpec& spec) {
    if (spec.is_canonical()) return spec.scale() / spec.gamma();
    return spec.trawl_measure_quadrature();
}

}  // namespace trawl
