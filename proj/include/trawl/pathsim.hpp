#pragma once

// Monte Carlo path simulators: exact Poisson-point simulation of Y_T for
// finite-activity bases, LePage series for stable bases and for the limit
// process Y, a direct simulator of the trawl process X on a grid, and
// stable Levy motion.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "trawl/error.hpp"
#include "trawl/exponent_oracle.hpp"
#include "trawl/levy_model.hpp"
#include "trawl/parallel.hpp"
#include "trawl/random.hpp"
#include "trawl/trawl_kernel.hpp"

namespace trawl {

struct Truncation {
    std::size_t n_terms = 0;
    double error_bound = 0.0;
};

/// Paths on a common time grid, stored row-major [path][time].
class PathEnsemble {
public:
    struct Meta {
        std::uint64_t master_seed = 0;
        std::string config_hash;
        std::string process_kind;
        std::optional<Truncation> truncation;
        std::optional<double> dropped_small_jumps_bound;
    };

    PathEnsemble() = default;

    PathEnsemble(std::vector<double> times, std::size_t n_paths)
        : times_(std::move(times)), n_paths_(n_paths), values_(n_paths * times_.size(), 0.0) {}

    std::span<const double> times() const noexcept { return times_; }
    std::size_t n_paths() const noexcept { return n_paths_; }
    std::size_t n_times() const noexcept { return times_.size(); }

    double& operator()(std::size_t path, std::size_t time) { return values_[path * times_.size() + time]; }
    double operator()(std::size_t path, std::size_t time) const { return values_[path * times_.size() + time]; }

    std::span<double> row(std::size_t path) { return {values_.data() + path * times_.size(), times_.size()}; }
    std::span<const double> row(std::size_t path) const {
        return {values_.data() + path * times_.size(), times_.size()};
    }
    std::span<const double> data() const noexcept { return values_; }

    std::vector<double> column(std::size_t time) const {
        std::vector<double> out(n_paths_);
        for (std::size_t i = 0; i < n_paths_; ++i) out[i] = (*this)(i, time);
        return out;
    }

    /// Y(times[to]) - Y(times[from]) for every path.
    std::vector<double> increments(std::size_t from, std::size_t to) const {
        std::vector<double> out(n_paths_);
        for (std::size_t i = 0; i < n_paths_; ++i) out[i] = (*this)(i, to) - (*this)(i, from);
        return out;
    }

    std::size_t time_index(double t) const {
        for (std::size_t j = 0; j < times_.size(); ++j)
            if (std::abs(times_[j] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return j;
        throw ValidationError("time " + std::to_string(t) + " is not on the ensemble grid");
    }

    /// Scale every value by c (used to build exactly self-similar test ensembles).
    PathEnsemble scaled(double c) const {
        PathEnsemble out = *this;
        for (auto& v : out.values_) v *= c;
        return out;
    }

    void check_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) throw AccuracyError("ensemble contains a non-finite value", v);
    }

    Meta meta;

private:
    std::vector<double> times_;
    std::size_t n_paths_ = 0;
    std::vector<double> values_;
};

/// Truncation control for series representations.
struct SeriesBudget {
    std::size_t n_terms = 1000;
    double domain_u_cutoff = std::numeric_limits<double>::infinity();
    std::size_t n_compensation = 256;
    /// Largest acceptable error_bound; exceeded -> AccuracyError.
    double max_error_bound = std::numeric_limits<double>::infinity();
};

struct SimulationOptions {
    std::size_t n_paths = 1000;
    std::uint64_t master_seed = 1;
    unsigned threads = 1;
};

namespace detail {

inline std::vector<double> normalized_times(std::vector<double> times) {
    if (times.empty()) throw ValidationError("time grid is empty");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0) throw ValidationError("times must be finite and >= 0");
        if (i > 0 && !(times[i] > times[i - 1])) throw ValidationError("times must be strictly increasing");
    }
    if (times.front() != 0.0) times.insert(times.begin(), 0.0);
    return times;
}

inline void check_options(const SimulationOptions& opt) {
    if (opt.n_paths == 0) throw ValidationError("n_paths must be > 0");
}

// Five-point Gauss-Legendre integral of fn over [a, b].
template <class Fn>
double gl5(const Fn& fn, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t k = 0; k < 5; ++k) s += kGl5w[k] * fn(c + h * kGl5x[k]);
    return h * s;
}

// Inverse of x -> int_{lo}^{x} density on [lo, hi] (density > 0 and smooth),
// for target in [0, mass of the segment].
template <class Fn>
double invert_segment(const Fn& density, double lo, double hi, double target) {
    double a = lo;
    double b = hi;
    double x = lo + (hi - lo) * 0.5;
    for (int it = 0; it < 60; ++it) {
        const double F = gl5(density, lo, x) - target;
        if (F > 0.0)
            b = x;
        else
            a = x;
        const double d = density(x);
        double next = d > 0.0 ? x - F / d : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - x) <= 1e-14 * std::max(1.0, std::abs(x))) return next;
        x = next;
    }
    return x;
}

}  // namespace detail

/// Draws (r, u) with density |g'(u)| / M on {0 < r < H + u, u > 0}, where
/// M = H g(0) + int g.
class TrawlDomainSampler {
public:
    TrawlDomainSampler(const TrawlSpec& trawl, double H) : trawl_(trawl), H_(H) {
        g0_ = trawl.g0();
        area_ = trawl_measure(trawl);
        mass_ = H * g0_ + area_;
        if (!trawl.is_canonical()) build_tail_table();
    }

    double mass() const noexcept { return mass_; }
    double horizon() const noexcept { return H_; }

    void sample(Rng& rng, double& r, double& u) const {
        if (uniform_open(rng) * mass_ <= H_ * g0_) {
            r = H_ * (1.0 - uniform_open(rng));
            u = trawl_.ginv(g0_ * uniform_open(rng));
        } else {
            const double s = sample_lag(rng);
            r = H_ + s;
            u = trawl_.ginv(trawl_.g(s) * uniform_open(rng));
        }
        if (!(u >= 0.0)) u = 0.0;
    }

    /// s > 0 with density g(s) / int g.
    double sample_lag(Rng& rng) const {
        const double v = uniform_open(rng);
        if (trawl_.is_canonical()) return std::pow(v, -1.0 / trawl_.gamma()) - 1.0;
        const double target = v * area_;  // tail integral value at s
        auto it = std::lower_bound(tail_.begin(), tail_.end(), target, std::greater<double>());
        std::size_t k = static_cast<std::size_t>(it - tail_.begin());
        if (k == 0) return 0.0;
        if (k >= nodes_.size()) return nodes_.back();
        const double lo = nodes_[k - 1];
        const double hi = nodes_[k];
        return detail::invert_segment([this](double x) { return trawl_.g(x); }, lo, hi, tail_[k - 1] - target);
    }

private:
    void build_tail_table() {
        nodes_ = {0.0};
        tail_ = {area_};
        for (double x = 1e-6; tail_.back() > 1e-12 * area_ && x < 1e300; x *= 1.05) {
            tail_.push_back(tail_.back() - detail::gl5([this](double y) { return trawl_.g(y); }, nodes_.back(), x));
            nodes_.push_back(x);
        }
    }

    TrawlSpec trawl_;
    double H_;
    double g0_ = 0.0;
    double area_ = 0.0;
    double mass_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> tail_;
};

/// Draws marks from nu restricted to |x| in [lo, hi), normalized.
class MarkSampler {
public:
    MarkSampler(const LevyBasisSpec& spec, double lo = 0.0, double hi = std::numeric_limits<double>::infinity())
        : spec_(spec) {
        if (spec.is_stable()) throw UnsupportedSpecError("stable bases have infinite activity; use the series simulator");
        if (const auto* p = std::get_if<PoissonDifference>(&spec.kind())) {
            jump_ = p->jump;
            mass_ = (p->jump >= lo && p->jump < hi) ? 2.0 * p->lambda : 0.0;
            return;
        }
        const auto& d = std::get<DensityBased>(spec.kind());
        if (d.is_table()) {
            for (std::size_t i = 0; i + 1 < d.table.size(); ++i) {
                const double a = std::max(d.table[i].first, lo);
                const double b = std::min(d.table[i + 1].first, hi);
                if (!(b > a)) continue;
                nodes_.push_back(a);
                ends_.push_back(b);
            }
        } else {
            const double start = std::max(lo, 1e-12);
            const double stop = std::min(hi, 1e12);
            if (!(stop > start)) return;
            for (double x = start; x < stop; x *= 1.075) nodes_.push_back(x);
            for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) ends_.push_back(nodes_[i + 1]);
            ends_.push_back(stop);
        }
        cumulative_.push_back(0.0);
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const double m = segment_mass(nodes_[i], ends_[i]);
            cumulative_.push_back(cumulative_.back() + m);
        }
        mass_ = 2.0 * cumulative_.back();
        if (!d.is_table() && lo == 0.0 && std::isfinite(spec.total_mass()) &&
            std::abs(mass_ / spec.total_mass() - 1.0) > 1e-8)
            throw AccuracyError("mark table does not capture the mass of nu", std::abs(mass_ / spec.total_mass() - 1.0));
    }

    /// nu mass of the band (both signs).
    double mass() const noexcept { return mass_; }

    double sample(Rng& rng) const {
        const double sign = random_sign(rng);
        if (jump_ > 0.0) return sign * jump_;
        const double target = uniform_open(rng) * cumulative_.back();
        auto it = std::lower_bound(cumulative_.begin() + 1, cumulative_.end(), target);
        std::size_t k = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
        k = std::min(k, nodes_.size() - 1);
        const double rest = target - cumulative_[k];
        const double a = nodes_[k];
        const double b = ends_[k];
        const auto& d = std::get<DensityBased>(spec_.kind());
        if (d.is_table()) {
            // linear density on [a, b]: solve h_a z + q z^2 / 2 = rest
            const double ha = d.h(a);
            const double hb = d.h(b);
            const double q = (hb - ha) / (b - a);
            const double disc = std::max(0.0, ha * ha + 2.0 * q * rest);
            const double denom = ha + std::sqrt(disc);
            const double z = denom > 0.0 ? 2.0 * rest / denom : 0.0;
            return sign * std::clamp(a + z, a, b);
        }
        return sign * detail::invert_segment(d.h, a, b, rest);
    }

private:
    double segment_mass(double a, double b) const {
        const auto& d = std::get<DensityBased>(spec_.kind());
        if (d.is_table()) return 0.5 * (d.h(a) + d.h(b)) * (b - a);
        return adaptive_mass(d.h, a, b, detail::gl5(d.h, a, b), 0);
    }

    // bisect until the halves agree, so that jumps in the density are resolved
    template <class Fn>
    static double adaptive_mass(const Fn& h, double a, double b, double whole, int depth) {
        const double m = 0.5 * (a + b);
        const double left = detail::gl5(h, a, m);
        const double right = detail::gl5(h, m, b);
        const double sum = left + right;
        if (depth >= 40 || std::abs(sum - whole) <= 1e-13 * std::max(std::abs(sum), 1e-300) || sum == 0.0) return sum;
        return adaptive_mass(h, a, m, left, depth + 1) + adaptive_mass(h, m, b, right, depth + 1);
    }

    LevyBasisSpec spec_;
    double jump_ = 0.0;
    double mass_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> ends_;
    std::vector<double> cumulative_;
};

/// Exact simulation of Y_T(t) = F_T^{-1} sum_i eta_i f(T t, r_i, u_i) over the
/// Poisson points of a finite-activity basis in kernel coordinates. For an
/// infinite-activity density the jumps with |x| < 1 are dropped and the meta
/// records a bound on their contribution to the exponent at theta = 1.
inline PathEnsemble simulate_finite_activity_YT(std::vector<double> times, double T, const TrawlSpec& trawl,
                                                const LevyBasisSpec& levy, double F_T,
                                                const SimulationOptions& opt) {
    times = detail::normalized_times(std::move(times));
    detail::check_options(opt);
    if (!(T >= 1.0)) throw ValidationError("T must be >= 1");
    if (!(F_T > 0.0)) throw ValidationError("F_T must be > 0");
    if (levy.is_stable())
        throw UnsupportedSpecError("stable basis has infinite activity; use simulate_stable_YT");

    std::optional<double> dropped;
    double band_lo = 0.0;
    if (!levy.is_finite_activity()) {
        band_lo = 1.0;
        // psi_1(theta) <= theta^2 m2 / 2 with m2 the second moment of nu on |x| < 1
        const auto& d = std::get<DensityBased>(levy.kind());
        const auto m2 = quad::integrate(
            [&](double s) {
                const double y = std::exp(-s);
                if (y == 0.0) return 0.0;
                return y * y * d.h(y) * y;
            },
            0.0, std::numeric_limits<double>::infinity(), quad::Options{1e-12, 1e-10, 4000});
        const double second_moment = 2.0 * m2.value;
        const auto quad2 = integrated_exponent_detailed(TimeCombo::single(1.0, times.back()), trawl,
                                                        ExponentView::power(2.0), T, F_T, 1e-6);
        dropped = 0.5 * second_moment * quad2.value;
    }
    const MarkSampler marks(levy, band_lo);
    const TrawlDomainSampler domain(trawl, T * times.back());
    const double rate = marks.mass() * domain.mass();

    PathEnsemble ens(times, opt.n_paths);
    ens.meta.master_seed = opt.master_seed;
    ens.meta.process_kind = "integrated_trawl";
    ens.meta.dropped_small_jumps_bound = dropped;
    std::vector<double> scaled_times(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) scaled_times[j] = T * times[j];
    const double inv_F = 1.0 / F_T;

    parallel_for(opt.n_paths, opt.threads, [&](std::size_t i) {
        Rng rng = stream_rng(opt.master_seed, i);
        auto row = ens.row(i);
        if (rate <= 0.0) return;
        std::poisson_distribution<long long> count(rate);
        const long long n = count(rng);
        for (long long k = 0; k < n; ++k) {
            double r;
            double u;
            domain.sample(rng, r, u);
            const double eta = marks.sample(rng) * inv_F;
            for (std::size_t j = 1; j < scaled_times.size(); ++j) row[j] += eta * f_eval(scaled_times[j], r, u);
        }
    });
    ens.check_finite();
    return ens;
}

namespace detail {

// Sum over j > n of E Gamma_j^{-p} = Gamma(n + 1 - p) / ((p - 1) Gamma(n)), p > 1.
inline double lepage_tail_moment(std::size_t n, double p) {
    const double nn = static_cast<double>(n);
    return std::exp(std::lgamma(nn + 1.0 - p) - std::lgamma(nn)) / (p - 1.0);
}

// One LePage path: scale * sum_j eps_j Gamma_j^{-1/alpha} k(V_j), plus a
// Gaussian stand-in for the neglected terms with matching conditional covariance.
template <class Draw>
void lepage_path(Rng& rng, double alpha, double scale, const SeriesBudget& budget, const Draw& draw,
                 std::span<double> out, std::vector<double>& kernel) {
    std::exponential_distribution<double> expo(1.0);
    double gamma_sum = 0.0;
    for (std::size_t j = 0; j < budget.n_terms; ++j) {
        gamma_sum += expo(rng);
        const double w = random_sign(rng) * scale * std::pow(gamma_sum, -1.0 / alpha);
        draw(rng, kernel);
        for (std::size_t t = 0; t < out.size(); ++t) out[t] += w * kernel[t];
    }
    if (budget.n_compensation == 0) return;
    const double c = std::pow(gamma_sum, 1.0 - 2.0 / alpha) / (2.0 / alpha - 1.0);
    const double coef = scale * std::sqrt(c / static_cast<double>(budget.n_compensation));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t m = 0; m < budget.n_compensation; ++m) {
        draw(rng, kernel);
        const double z = coef * normal(rng);
        for (std::size_t t = 0; t < out.size(); ++t) out[t] += z * kernel[t];
    }
}

// Characteristic-function error bound at theta = 1 after n terms, from the
// third absolute moment of the summands (Lindeberg replacement).
inline double lepage_error_bound(double alpha, double scale, double third_moment, std::size_t n) {
    const double p = 3.0 / alpha;
    return 0.5 * std::pow(scale, 3.0) * third_moment * lepage_tail_moment(n, p);
}

}  // namespace detail

/// LePage-series simulation of Y_T for a symmetric alpha-stable basis.
inline PathEnsemble simulate_stable_YT(std::vector<double> times, double T, const TrawlSpec& trawl, double alpha,
                                       double F_T, const SeriesBudget& budget, const SimulationOptions& opt) {
    times = detail::normalized_times(std::move(times));
    detail::check_options(opt);
    if (!(alpha > 0.0 && alpha < 2.0)) throw ValidationError("alpha must lie in (0, 2)");
    if (!(T >= 1.0)) throw ValidationError("T must be >= 1");
    if (!(F_T > 0.0)) throw ValidationError("F_T must be > 0");
    if (budget.n_terms == 0) throw ValidationError("n_terms must be > 0");
    if (!(budget.domain_u_cutoff > 0.0)) throw ValidationError("domain u-cutoff must be > 0");

    const TrawlDomainSampler domain(trawl, T * times.back());
    const double mu = domain.mass();
    const double sigma = std::pow(lepage_constant(alpha), 1.0 / alpha);
    const double scale = sigma * std::pow(mu, 1.0 / alpha) / F_T;

    const double I3 = integrated_exponent_detailed(TimeCombo::single(1.0, times.back()), trawl,
                                                   ExponentView::power(3.0), T, 1.0, 1e-6)
                          .value;
    const double bound = detail::lepage_error_bound(alpha, scale, I3 / mu, budget.n_terms);
    if (bound > budget.max_error_bound)
        throw AccuracyError("series budget cannot certify the requested truncation error", bound);

    PathEnsemble ens(times, opt.n_paths);
    ens.meta.master_seed = opt.master_seed;
    ens.meta.process_kind = "stable_integrated_trawl";
    ens.meta.truncation = Truncation{budget.n_terms, bound};
    std::vector<double> scaled_times(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) scaled_times[j] = T * times[j];
    const double cutoff = budget.domain_u_cutoff;

    auto draw = [&](Rng& rng, std::vector<double>& k) {
        double r;
        double u;
        domain.sample(rng, r, u);
        if (u > cutoff) {
            std::fill(k.begin(), k.end(), 0.0);
            return;
        }
        for (std::size_t j = 0; j < k.size(); ++j) k[j] = f_eval(scaled_times[j], r, u);
    };
    parallel_for(opt.n_paths, opt.threads, [&](std::size_t i) {
        Rng rng = stream_rng(opt.master_seed, i);
        std::vector<double> kernel(scaled_times.size());
        detail::lepage_path(rng, alpha, scale, budget, draw, ens.row(i), kernel);
    });
    ens.check_finite();
    return ens;
}

/// Importance density on {0 < r < t_max + u} proportional to
/// min(u^alpha, 1) u^{-2-gamma}, for which f u^{-(2+gamma)/alpha} / m^{1/alpha}
/// is bounded.
class LimitDomainSampler {
public:
    LimitDomainSampler(double alpha, double gamma, double t_max) : alpha_(alpha), gamma_(gamma), t_max_(t_max) {
        w_[0] = t_max / (alpha - 1.0 - gamma);
        w_[1] = 1.0 / (alpha - gamma);
        w_[2] = t_max / (1.0 + gamma);
        w_[3] = 1.0 / gamma;
        Z_ = w_[0] + w_[1] + w_[2] + w_[3];
        factor_ = std::pow(Z_, 1.0 / alpha);
    }

    double normalizer() const noexcept { return Z_; }

    /// Returns the factor Z^{1/alpha} / min(u, 1) multiplying f(t, r, u).
    double sample(Rng& rng, double& r, double& u) const {
        double pick = uniform_open(rng) * Z_;
        const double v = uniform_open(rng);
        if ((pick -= w_[0]) <= 0.0)
            u = std::pow(v, 1.0 / (alpha_ - 1.0 - gamma_));
        else if ((pick -= w_[1]) <= 0.0)
            u = std::pow(v, 1.0 / (alpha_ - gamma_));
        else if ((pick -= w_[2]) <= 0.0)
            u = std::pow(v, -1.0 / (1.0 + gamma_));
        else
            u = std::pow(v, -1.0 / gamma_);
        r = (t_max_ + u) * (1.0 - uniform_open(rng));
        return factor_ / std::min(u, 1.0);
    }

    /// E_m |summand|^3 for the kernel at t_max, by quadrature.
    double third_moment() const {
        const double a = alpha_;
        const double g = gamma_;
        const double c = a - 4.0 - g;  // exponent of the weight below 1
        UWeight w;
        w.w = [=](double u) { return std::pow(std::min(u, 1.0), a - 3.0) * std::pow(u, -2.0 - g); };
        w.mass_above = [=](double U) {
            if (U >= 1.0) return std::pow(U, -1.0 - g) / (1.0 + g);
            return (std::pow(U, c + 1.0) - 1.0) / (-(c + 1.0)) + 1.0 / (1.0 + g);
        };
        w.excess_above = [=](double U) {
            if (U >= 1.0) return std::pow(U, -g) * (1.0 / g - 1.0 / (1.0 + g));
            const double below = (1.0 - std::pow(U, c + 2.0)) / (c + 2.0) - U * (1.0 - std::pow(U, c + 1.0)) / (c + 1.0);
            return below + 1.0 / g - U / (1.0 + g);
        };
        const double I = detail::KernelIntegrator(TimeCombo::single(1.0, t_max_), ExponentView::power(3.0), w, 1.0,
                                                  1.0, 1e-8)
                             .integrate()
                             .value;
        return std::pow(Z_, 3.0 / alpha_ - 1.0) * I;
    }

private:
    double alpha_;
    double gamma_;
    double t_max_;
    double w_[4];
    double Z_;
    double factor_;
};

/// LePage-series simulation of Y(t) = int int f(t, r, u) u^{-(2+gamma)/alpha} M_alpha(dr du).
inline PathEnsemble simulate_limit_Y(std::vector<double> times, double alpha, double gamma,
                                     const SeriesBudget& budget, const SimulationOptions& opt) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
    if (!(alpha > 1.0 + gamma && alpha < 2.0))
        throw RegimeError("the limit process Y needs 1 + gamma < alpha < 2");
    if (budget.n_terms == 0) throw ValidationError("n_terms must be > 0");
    times = detail::normalized_times(std::move(times));
    detail::check_options(opt);

    const LimitDomainSampler domain(alpha, gamma, times.back());
    const double sigma = std::pow(lepage_constant(alpha), 1.0 / alpha);
    const double bound = detail::lepage_error_bound(alpha, sigma, domain.third_moment(), budget.n_terms);
    if (bound > budget.max_error_bound)
        throw AccuracyError("series budget cannot certify the requested truncation error", bound);

    PathEnsemble ens(times, opt.n_paths);
    ens.meta.master_seed = opt.master_seed;
    ens.meta.process_kind = "limit_process";
    ens.meta.truncation = Truncation{budget.n_terms, bound};

    auto draw = [&](Rng& rng, std::vector<double>& k) {
        double r;
        double u;
        const double factor = domain.sample(rng, r, u);
        for (std::size_t j = 0; j < k.size(); ++j) k[j] = factor * f_eval(times[j], r, u);
    };
    parallel_for(opt.n_paths, opt.threads, [&](std::size_t i) {
        Rng rng = stream_rng(opt.master_seed, i);
        std::vector<double> kernel(times.size());
        detail::lepage_path(rng, alpha, sigma, budget, draw, ens.row(i), kernel);
    });
    ens.check_finite();
    return ens;
}

struct XGridOptions {
    std::vector<double> times;  // in units of T for the integrated process
    double T = 100.0;
    double F_T = 1.0;
    std::size_t cells = 20000;
    double window = std::numeric_limits<double>::infinity();
    double tail_mass_bound = 1e-3;
};

struct XGridResult {
    PathEnsemble X;  // X_s at s = T t
    PathEnsemble Y;  // midpoint Riemann sums of int_0^{Tt} X_s ds / F_T
};

/// Simulate X_t = Lambda(A_t) in the (x, y)-plane: a point (x, y, eta) is in
/// A_t iff x <= t <= x + g^{-1}(y).
inline XGridResult simulate_X_grid(const TrawlSpec& trawl, const LevyBasisSpec& levy, const XGridOptions& xo,
                                   const SimulationOptions& opt) {
    const auto times = detail::normalized_times(xo.times);
    detail::check_options(opt);
    if (!levy.is_finite_activity()) throw UnsupportedSpecError("the grid simulator needs a finite-activity basis");
    if (!(xo.T >= 1.0) || !(xo.F_T > 0.0) || xo.cells == 0) throw ValidationError("invalid grid options");
    if (!(xo.window > 0.0)) throw ValidationError("window must be > 0");

    const double H = xo.T * times.back();
    const double area = trawl_measure(trawl);
    const double lost = std::isfinite(xo.window) ? trawl.tail_integral(xo.window) / area : 0.0;
    if (lost > xo.tail_mass_bound)
        throw ValidationError("window too small: trawl tail mass " + std::to_string(lost) +
                              " beyond it exceeds the bound " + std::to_string(xo.tail_mass_bound));

    const MarkSampler marks(levy);
    const TrawlDomainSampler lags(trawl, 0.0);
    const double g0 = trawl.g0();
    const double mass_past = area - (std::isfinite(xo.window) ? trawl.tail_integral(xo.window) : 0.0);
    const double mass_window = H * g0;
    const double rate = marks.mass() * (mass_past + mass_window);
    const double ds = H / static_cast<double>(xo.cells);

    XGridResult out{PathEnsemble(std::vector<double>(times), opt.n_paths), PathEnsemble(times, opt.n_paths)};
    out.X.meta.master_seed = opt.master_seed;
    out.X.meta.process_kind = "trawl_process";
    out.Y.meta.master_seed = opt.master_seed;
    out.Y.meta.process_kind = "integrated_trawl_grid";

    std::vector<std::size_t> cut(times.size());
    for (std::size_t j = 0; j < times.size(); ++j)
        cut[j] = static_cast<std::size_t>(std::llround(xo.T * times[j] / ds));

    parallel_for(opt.n_paths, opt.threads, [&](std::size_t i) {
        Rng rng = stream_rng(opt.master_seed, i);
        std::vector<double> diff(xo.cells + 1, 0.0);
        auto xrow = out.X.row(i);
        if (rate > 0.0) {
            std::poisson_distribution<long long> count(rate);
            const long long n = count(rng);
            for (long long k = 0; k < n; ++k) {
                double x;
                double y;
                if (uniform_open(rng) * (mass_past + mass_window) <= mass_window) {
                    x = H * (1.0 - uniform_open(rng));
                    y = g0 * uniform_open(rng);
                } else {
                    double lag;
                    do {
                        lag = lags.sample_lag(rng);
                    } while (lag > xo.window);
                    x = -lag;
                    y = trawl.g(lag) * uniform_open(rng);
                }
                const double life = trawl.ginv(y);
                const double end = x + life;
                const double eta = marks.sample(rng);
                for (std::size_t j = 0; j < times.size(); ++j) {
                    const double s = xo.T * times[j];
                    if (x <= s && s <= end) xrow[j] += eta;
                }
                // cells whose midpoints (m + 1/2) ds fall in [x, end]
                const double first = std::ceil(x / ds - 0.5);
                const double last = std::floor(end / ds - 0.5);
                if (last < 0.0 || first > static_cast<double>(xo.cells - 1) || last < first) continue;
                const auto lo = static_cast<std::size_t>(std::max(0.0, first));
                const auto hi = static_cast<std::size_t>(std::min(static_cast<double>(xo.cells - 1), last));
                diff[lo] += eta;
                diff[hi + 1] -= eta;
            }
        }
        auto yrow = out.Y.row(i);
        double level = 0.0;
        double integral = 0.0;
        std::size_t next = 1;
        for (std::size_t m = 0; m < xo.cells && next < cut.size(); ++m) {
            level += diff[m];
            integral += level * ds;
            while (next < cut.size() && cut[next] == m + 1) yrow[next++] = integral / xo.F_T;
        }
    });
    out.X.check_finite();
    out.Y.check_finite();
    return out;
}

/// Symmetric alpha-stable Levy motion with E exp(i theta L(t)) = exp(-t scale^alpha |theta|^alpha).
inline PathEnsemble simulate_stable_levy_motion(std::vector<double> times, double alpha, double scale,
                                                const SimulationOptions& opt) {
    times = detail::normalized_times(std::move(times));
    detail::check_options(opt);
    if (!(alpha > 0.0 && alpha <= 2.0)) throw ValidationError("alpha must lie in (0, 2]");
    PathEnsemble ens(times, opt.n_paths);
    ens.meta.master_seed = opt.master_seed;
    ens.meta.process_kind = "levy_process";
    parallel_for(opt.n_paths, opt.threads, [&](std::size_t i) {
        Rng rng = stream_rng(opt.master_seed, i);
        auto row = ens.row(i);
        for (std::size_t j = 1; j < times.size(); ++j) {
            const double dt = times[j] - times[j - 1];
            row[j] = row[j - 1] + scale * std::pow(dt, 1.0 / alpha) * symmetric_stable(rng, alpha);
        }
    });
    ens.check_finite();
    return ens;
}

}  // namespace trawl
