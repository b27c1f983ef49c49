#pragma once

// Globally adaptive Gauss-Kronrod (G10/K21) quadrature over a chain of
// intervals whose outer endpoints may be infinite, plus Wynn's epsilon
// extrapolation for alternating tails.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace trawl::quad {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    std::size_t max_intervals = 4000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077482077261355, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

// How a subinterval's coordinate maps back to the integration variable.
enum class Map { identity, upper_infinite, lower_infinite };

struct Piece {
    double a;
    double b;
    Map map;
    double anchor;  // finite endpoint for the infinite maps
    double value;
    double error;
};

struct ByError {
    bool operator()(const Piece& l, const Piece& r) const { return l.error < r.error; }
};

template <class F>
double mapped(F& f, Map map, double anchor, double t) {
    switch (map) {
        case Map::identity:
            return f(t);
        case Map::upper_infinite: {
            // x = anchor + (1 - t) / t, t in (0, 1]
            if (t <= 0.0) return 0.0;
            const double x = anchor + (1.0 - t) / t;
            const double v = f(x);
            // far out in a log-mapped tail the integrand underflows into 0 * inf
            if (!std::isfinite(v) && (1.0 - t) / t > 50.0) return 0.0;
            return v / (t * t);
        }
        case Map::lower_infinite: {
            if (t <= 0.0) return 0.0;
            const double x = anchor - (1.0 - t) / t;
            const double v = f(x);
            // far out in a log-mapped tail the integrand underflows into 0 * inf
            if (!std::isfinite(v) && (1.0 - t) / t > 50.0) return 0.0;
            return v / (t * t);
        }
    }
    return 0.0;
}

// One G10/K21 pass with the QUADPACK error heuristic.
template <class F>
void gk21(F& f, Piece& p, std::size_t& evals) {
    const double center = 0.5 * (p.a + p.b);
    const double half = 0.5 * (p.b - p.a);
    const double abs_half = std::abs(half);

    const double fc = mapped(f, p.map, p.anchor, center);
    double resk = kWgk[10] * fc;
    double resg = 0.0;
    double resabs = std::abs(resk);
    std::array<double, 10> fv1{};
    std::array<double, 10> fv2{};
    for (std::size_t j = 0; j < 10; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = mapped(f, p.map, p.anchor, center - dx);
        const double f2 = mapped(f, p.map, p.anchor, center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += kWgk[j] * (f1 + f2);
        resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    evals += 21;

    const double reskh = 0.5 * resk;
    double resasc = kWgk[10] * std::abs(fc - reskh);
    for (std::size_t j = 0; j < 10; ++j)
        resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    const double result = resk * half;
    resabs *= abs_half;
    resasc *= abs_half;
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * resabs, err);
    if (!std::isfinite(result)) err = std::numeric_limits<double>::infinity();

    p.value = result;
    p.error = err;
}

}  // namespace detail

/// Integrate f over the consecutive intervals [b0,b1], [b1,b2], ...
/// The first breakpoint may be -inf and the last +inf.
template <class F>
Result integrate(F&& f, std::span<const double> breakpoints, const Options& opt = {}) {
    using detail::Map;
    using detail::Piece;
    Result out;
    if (breakpoints.size() < 2) return out;

    std::priority_queue<Piece, std::vector<Piece>, detail::ByError> heap;
    std::vector<Piece> done;
    double total = 0.0;
    double total_err = 0.0;

    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double lo = breakpoints[i];
        const double hi = breakpoints[i + 1];
        if (!(hi > lo)) continue;
        Piece p{};
        if (std::isinf(lo) && std::isinf(hi)) {
            // split at zero
            Piece l{0.0, 1.0, Map::lower_infinite, 0.0, 0.0, 0.0};
            Piece r{0.0, 1.0, Map::upper_infinite, 0.0, 0.0, 0.0};
            detail::gk21(f, l, out.evaluations);
            detail::gk21(f, r, out.evaluations);
            total += l.value + r.value;
            total_err += l.error + r.error;
            heap.push(l);
            heap.push(r);
            continue;
        }
        if (std::isinf(hi))
            p = Piece{0.0, 1.0, Map::upper_infinite, lo, 0.0, 0.0};
        else if (std::isinf(lo))
            p = Piece{0.0, 1.0, Map::lower_infinite, hi, 0.0, 0.0};
        else
            p = Piece{lo, hi, Map::identity, 0.0, 0.0, 0.0};
        detail::gk21(f, p, out.evaluations);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }

    auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
    std::size_t count = heap.size();
    while (!heap.empty() && total_err > target()) {
        if (count >= opt.max_intervals) break;
        Piece worst = heap.top();
        const double width = worst.b - worst.a;
        const double mid = worst.a + 0.5 * width;
        // Stop refining intervals that have collapsed to machine resolution.
        if (!(mid > worst.a && mid < worst.b)) {
            heap.pop();
            done.push_back(worst);
            continue;
        }
        heap.pop();
        Piece l{worst.a, mid, worst.map, worst.anchor, 0.0, 0.0};
        Piece r{mid, worst.b, worst.map, worst.anchor, 0.0, 0.0};
        detail::gk21(f, l, out.evaluations);
        detail::gk21(f, r, out.evaluations);
        total += l.value + r.value - worst.value;
        total_err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        ++count;
    }

    // Re-sum to shed drift from the running updates.
    double value = 0.0;
    double err = 0.0;
    for (const auto& p : done) {
        value += p.value;
        err += p.error;
    }
    while (!heap.empty()) {
        value += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    out.value = value;
    out.error = err;
    out.converged = err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value)) && std::isfinite(value);
    return out;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
    const std::array<double, 2> bp{a, b};
    return integrate(f, std::span<const double>(bp), opt);
}

/// Wynn epsilon extrapolation of a sequence of partial sums. Returns the
/// diagonal estimate and an error estimate from the last two diagonals.
struct Extrapolated {
    double value;
    double error;
};

inline Extrapolated wynn_epsilon(std::span<const double> partial_sums) {
    const std::size_t n = partial_sums.size();
    if (n == 0) return {0.0, std::numeric_limits<double>::infinity()};
    if (n < 3) {
        const double d = n > 1 ? partial_sums[n - 1] - partial_sums[n - 2] : partial_sums[0];
        return {partial_sums.back(), std::abs(d)};
    }

    // cols[j] is column j-1 of the epsilon table; cols[0] is the zero column.
    std::vector<std::vector<double>> cols;
    cols.emplace_back(n + 1, 0.0);
    cols.emplace_back(partial_sums.begin(), partial_sums.end());
    double best = partial_sums.back();
    double prev = partial_sums[n - 2];
    for (std::size_t j = 2; j <= n; ++j) {
        const auto& c1 = cols[j - 1];
        const auto& c2 = cols[j - 2];
        std::vector<double> next(c1.size() - 1);
        bool finite = true;
        for (std::size_t i = 0; i + 1 < c1.size(); ++i) {
            const double diff = c1[i + 1] - c1[i];
            if (diff == 0.0 || !std::isfinite(diff)) {
                finite = false;
                break;
            }
            next[i] = c2[i + 1] + 1.0 / diff;
        }
        if (!finite) break;
        cols.push_back(std::move(next));
        if (j % 2 == 1) {
            prev = best;
            best = cols.back().back();
        }
    }
    return {best, std::abs(best - prev)};
}

}  // namespace trawl::quad
