#pragma once

// Scalar numerical kernels: error function, Gaussian law, adaptive quadrature
// and monotone root bracketing.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace mtm {

class ConvergenceFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BracketFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace numerics {

/// Complementary error function; saturates to 0 / 2 outside the representable range.
inline double erfc(double z) {
    if (z > 27.3) return 0.0;
    if (z < -6.5) return 2.0;
    return std::erfc(z);
}

inline double normal_cdf(double z) { return 0.5 * erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double x, double mean, double sd) {
    const double u = (x - mean) / sd;
    return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature (7-point Gauss / 15-point Kronrod).
//
// The integrand may return double or std::array<double, N>; array results are
// integrated component-wise and the error is controlled in the max norm.

struct QuadOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-14;
    int max_intervals = 4000;
};

namespace detail {

template <class R>
struct QuadTraits;

template <>
struct QuadTraits<double> {
    static double norm(double v) { return std::abs(v); }
    static void add_scaled(double& acc, double v, double w) { acc += w * v; }
    static double diff_norm(double a, double b) { return std::abs(a - b); }
};

template <std::size_t N>
struct QuadTraits<std::array<double, N>> {
    using R = std::array<double, N>;
    static double norm(const R& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    static void add_scaled(R& acc, const R& v, double w) {
        for (std::size_t i = 0; i < N; ++i) acc[i] += w * v[i];
    }
    static double diff_norm(const R& a, const R& b) {
        double m = 0.0;
        for (std::size_t i = 0; i < N; ++i) m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    }
};

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for Kronrod nodes 1, 3, 5, 7.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class R>
struct Panel {
    double a;
    double b;
    R value;
    double error;
};

template <class R, class F>
Panel<R> gauss_kronrod_15(F& f, double a, double b) {
    using T = QuadTraits<R>;
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    R kronrod{};
    R gauss{};
    const R fc = f(c);
    T::add_scaled(kronrod, fc, kKronrodWeights[7]);
    T::add_scaled(gauss, fc, kGaussWeights[3]);
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kKronrodNodes[j];
        const R f1 = f(c - dx);
        const R f2 = f(c + dx);
        T::add_scaled(kronrod, f1, kKronrodWeights[j]);
        T::add_scaled(kronrod, f2, kKronrodWeights[j]);
        if (j % 2 == 1) {
            T::add_scaled(gauss, f1, kGaussWeights[j / 2]);
            T::add_scaled(gauss, f2, kGaussWeights[j / 2]);
        }
    }
    R value{};
    T::add_scaled(value, kronrod, h);
    R g{};
    T::add_scaled(g, gauss, h);
    return {a, b, value, T::diff_norm(value, g)};
}

}  // namespace detail

/// A function on [a, b] with known interior kinks and a tolerance.
template <class F>
struct Integrand {
    F f;
    double a;
    double b;
    std::vector<double> breakpoints{};
    QuadOptions options{};
};

/// Globally adaptive integration of f over [a, b]. Breakpoints inside (a, b)
/// seed the panel list so kinks and jumps never fall inside a Kronrod rule.
/// Deterministic: the same inputs always produce the same node sequence.
template <class F>
auto integrate(F&& f, double a, double b, std::span<const double> breakpoints,
               const QuadOptions& opt = {}) {
    using R = std::decay_t<std::invoke_result_t<F&, double>>;
    using T = detail::QuadTraits<R>;
    if (!(b > a)) return R{};

    std::vector<double> cuts{a};
    for (double p : breakpoints)
        if (p > a && p < b) cuts.push_back(p);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<detail::Panel<R>> panels;
    panels.reserve(64);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        panels.push_back(detail::gauss_kronrod_15<R>(f, cuts[i], cuts[i + 1]));

    const double min_width = 1e-13 * std::max(1.0, b - a);
    for (;;) {
        R total{};
        double err = 0.0;
        std::size_t worst = 0;
        double worst_err = -1.0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            T::add_scaled(total, panels[i].value, 1.0);
            err += panels[i].error;
            if (panels[i].error > worst_err && panels[i].b - panels[i].a > min_width) {
                worst_err = panels[i].error;
                worst = i;
            }
        }
        const double target = std::max(opt.abs_tol, opt.rel_tol * T::norm(total));
        if (err <= target || worst_err <= 0.0) return total;
        if (static_cast<int>(panels.size()) >= opt.max_intervals)
            throw ConvergenceFailure("integrate: subdivision budget exhausted (error " +
                                     std::to_string(err) + ")");
        const auto p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        panels[worst] = detail::gauss_kronrod_15<R>(f, p.a, mid);
        panels.push_back(detail::gauss_kronrod_15<R>(f, mid, p.b));
    }
}

template <class F>
auto integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
    return integrate(std::forward<F>(f), a, b, std::span<const double>{}, opt);
}

template <class F>
auto integrate(const Integrand<F>& in) {
    return integrate(in.f, in.a, in.b, std::span<const double>(in.breakpoints), in.options);
}

// ---------------------------------------------------------------------------

/// Solves g(y) = target for a nonincreasing g by bisection. The upper end is
/// grown geometrically from hi_seed until g(hi) <= target. Returns the midpoint
/// of the final bracket, whose width is <= tol. In flat regions the bracket
/// converges to the smallest y with g(y) <= target.
template <class G>
double bisect_decreasing(G&& g, double target, double lo, double hi_seed, double tol,
                         int max_growth = 60) {
    if (!(g(lo) >= target))
        throw BracketFailure("bisect_decreasing: target exceeds g(lo)");
    double step = std::max(hi_seed - lo, tol);
    double hi = lo + step;
    int grown = 0;
    while (g(hi) > target) {
        if (++grown > max_growth)
            throw BracketFailure("bisect_decreasing: no upper bracket within budget");
        lo = hi;
        step *= 2.0;
        hi = lo + step;
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (g(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace numerics
}  // namespace mtm
