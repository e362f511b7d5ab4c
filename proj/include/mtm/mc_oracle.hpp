#pragma once

// Monte Carlo oracle. Each path samples the contract value on the MTM days and
// at maturity from the Gaussian transition, then draws every segment maximum
// from the exact bridge law given its endpoints. Collateral only changes on MTM
// days, so this reproduces the continuous-time maximum exposure with no time
// discretization bias.
//
// Draws come from counter-based substreams keyed by (seed, path), so estimates
// do not depend on the number of worker threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "mtm/model.hpp"
#include "mtm/single_mtm.hpp"
#include "mtm/stochastics.hpp"

namespace mtm::mc {

struct McSpec {
    std::int64_t paths = 1'000'000;
    std::uint64_t seed = 20240601;
    bool antithetic = true;
    int workers = 1;
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t paths = 0;
    bool degenerate = false;  // too few paths for a meaningful error bar
};

/// Stateless generator: draw k of stream s is a SplitMix64 hash of (seed, s, k).
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + 1))) {}

    /// Uniform in the open interval (0, 1).
    double uniform() {
        const std::uint64_t bits = mix(key_ + kGolden * (++counter_));
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    static std::uint64_t mix(std::uint64_t z) {
        z += kGolden;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Draw source for one path. Antithetic partners share the stream and flip the
/// sign of every Gaussian increment; maximum uniforms are shared.
struct PathDraws {
    CounterStream stream;
    double sign = 1.0;

    static PathDraws for_path(const McSpec& mc, std::int64_t path) {
        if (mc.antithetic)
            return {CounterStream(mc.seed, static_cast<std::uint64_t>(path / 2)),
                    (path % 2) ? -1.0 : 1.0};
        return {CounterStream(mc.seed, static_cast<std::uint64_t>(path)), 1.0};
    }
};

using SimPolicy = std::variant<SinglePolicy, TwiceSimultaneousPolicy, SequentialPolicy>;

/// Everything a path reveals. Unused MTM slots stay NaN.
struct PathRecord {
    double exposure = 0.0;
    std::array<double, 2> v_mtm{std::numeric_limits<double>::quiet_NaN(),
                                std::numeric_limits<double>::quiet_NaN()};
    std::array<double, 3> seg_max{std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::quiet_NaN()};
};

inline PathRecord simulate_max_exposure(const Contract& c, const SimPolicy& policy,
                                        PathDraws& draws) {
    PathRecord rec;
    int days[2] = {0, 0};
    int n_days = 0;
    const SequentialPolicy* table = nullptr;
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, SinglePolicy>) {
                days[0] = p.tau;
                n_days = 1;
            } else if constexpr (std::is_same_v<P, TwiceSimultaneousPolicy>) {
                days[0] = p.tau1;
                days[1] = p.tau2;
                n_days = 2;
            } else {
                days[0] = p.tau1;
                n_days = 2;
                table = &p;
            }
        },
        policy);

    double t = 0.0;
    double v = c.v0;
    double collateral = c.c0;
    double exposure = -std::numeric_limits<double>::infinity();
    for (int seg = 0; seg <= n_days; ++seg) {
        const double t_next = seg < n_days ? days[seg] : c.horizon;
        const double dt = t_next - t;
        const double v_next = v + draws.sign * c.sigma * std::sqrt(dt) * draws.stream.normal();
        const double m = stochastics::sample_segment_max({v, v_next, dt, c.sigma},
                                                         draws.stream.uniform());
        rec.seg_max[seg] = m;
        exposure = std::max(exposure, m - collateral);
        if (seg < n_days) {
            rec.v_mtm[seg] = v_next;
            if (v_next > c.alpha * collateral) collateral = c.beta * v_next;
            if (seg == 0 && table) days[1] = table->lookup(v_next).tau2_star;
        }
        t = t_next;
        v = v_next;
    }
    rec.exposure = exposure;
    return rec;
}

/// Simulates mc.paths paths; record i always comes from path i.
inline std::vector<PathRecord> simulate(const Contract& c, const SimPolicy& policy,
                                        const McSpec& mc) {
    std::vector<PathRecord> out(static_cast<std::size_t>(std::max<std::int64_t>(mc.paths, 0)));
    const std::int64_t n = static_cast<std::int64_t>(out.size());
    auto run = [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t p = begin; p < end; ++p) {
            auto draws = PathDraws::for_path(mc, p);
            out[static_cast<std::size_t>(p)] = simulate_max_exposure(c, policy, draws);
        }
    };
    const int workers = std::max(1, mc.workers);
    if (workers == 1 || n < 2 * workers) {
        run(0, n);
        return out;
    }
    std::vector<std::thread> pool;
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t b = w * chunk;
        const std::int64_t e = std::min(n, b + chunk);
        if (b < e) pool.emplace_back(run, b, e);
    }
    for (auto& th : pool) th.join();
    return out;
}

/// Fraction of records satisfying pred. With antithetic pairs the standard
/// error is taken from the pair means, which are independent.
template <class Pred>
McEstimate estimate_fraction(std::span<const PathRecord> recs, bool antithetic, Pred&& pred) {
    const std::int64_t n = static_cast<std::int64_t>(recs.size());
    McEstimate e;
    e.paths = n;
    if (n == 0) {
        e.degenerate = true;
        e.value = std::numeric_limits<double>::quiet_NaN();
        e.std_error = std::numeric_limits<double>::infinity();
        return e;
    }
    std::int64_t hits = 0;
    for (const auto& r : recs) hits += pred(r) ? 1 : 0;
    const double p = static_cast<double>(hits) / n;
    e.value = p;
    if (n == 1) {
        e.degenerate = true;
        e.std_error = std::numeric_limits<double>::infinity();
        return e;
    }
    if (!antithetic || n < 4) {
        e.std_error = std::sqrt(p * (1.0 - p) / n);
        return e;
    }
    // Pair means take values 0, 1/2, 1.
    const std::int64_t pairs = n / 2;
    std::int64_t both = 0, one = 0;
    for (std::int64_t i = 0; i < pairs; ++i) {
        const int k = (pred(recs[2 * i]) ? 1 : 0) + (pred(recs[2 * i + 1]) ? 1 : 0);
        both += k == 2;
        one += k == 1;
    }
    const double mean = (both + 0.5 * one) / pairs;
    const double second = (both + 0.25 * one) / pairs;
    const double var = std::max(0.0, second - mean * mean) * pairs / (pairs - 1.0);
    e.std_error = std::sqrt(var / pairs);
    return e;
}

inline McEstimate estimate_exceed_prob(std::span<const PathRecord> recs, double y, bool antithetic) {
    return estimate_fraction(recs, antithetic, [y](const PathRecord& r) { return r.exposure > y; });
}

inline McEstimate estimate_exceed_prob(const Contract& c, const SimPolicy& policy, double y,
                                       const McSpec& mc) {
    const auto recs = simulate(c, policy, mc);
    return estimate_exceed_prob(recs, y, mc.antithetic);
}

/// The five single-day scenario probabilities, estimated one at a time.
enum class Component { NoCall, PreOkNoCall, PostOkNoCall, PreOkCall, PostOkCall };

inline const char* to_string(Component k) {
    switch (k) {
        case Component::NoCall: return "no_call";
        case Component::PreOkNoCall: return "pre_ok_no_call";
        case Component::PostOkNoCall: return "post_ok_no_call";
        case Component::PreOkCall: return "pre_ok_call";
        case Component::PostOkCall: return "post_ok_call";
    }
    return "?";
}

inline constexpr Component kAllComponents[] = {Component::NoCall, Component::PreOkNoCall,
                                              Component::PostOkNoCall, Component::PreOkCall,
                                              Component::PostOkCall};

/// Records must come from a SinglePolicy simulation.
inline McEstimate estimate_component(std::span<const PathRecord> recs, const Contract& c, double y,
                                     Component k, bool antithetic) {
    const double trig = c.trigger();
    return estimate_fraction(recs, antithetic, [&](const PathRecord& r) {
        const double v = r.v_mtm[0];
        const bool call = v > trig;
        switch (k) {
            case Component::NoCall: return !call;
            case Component::PreOkNoCall: return !call && r.seg_max[0] - c.c0 <= y;
            case Component::PostOkNoCall: return !call && r.seg_max[1] - c.c0 <= y;
            case Component::PreOkCall: return call && r.seg_max[0] - c.c0 <= y;
            case Component::PostOkCall: return call && r.seg_max[1] - c.beta * v <= y;
        }
        return false;
    });
}

inline McEstimate estimate_component(const Contract& c, int tau, double y, Component k,
                                     const McSpec& mc) {
    const auto recs = simulate(c, SinglePolicy{tau}, mc);
    return estimate_component(recs, c, y, k, mc.antithetic);
}

/// Empirical (1 - q)-quantile of the maximum exposure. The standard error is
/// half the spread of the order statistics one binomial sd either side.
inline McEstimate estimate_pfe(std::span<const PathRecord> recs, double q) {
    McEstimate e;
    const std::int64_t n = static_cast<std::int64_t>(recs.size());
    e.paths = n;
    if (n == 0) {
        e.degenerate = true;
        e.value = std::numeric_limits<double>::quiet_NaN();
        e.std_error = std::numeric_limits<double>::infinity();
        return e;
    }
    std::vector<double> x(recs.size());
    std::transform(recs.begin(), recs.end(), x.begin(), [](const PathRecord& r) { return r.exposure; });
    std::sort(x.begin(), x.end());
    const std::int64_t k = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::ceil(n * (1.0 - q) - 1e-9)), 1, n);
    e.value = x[static_cast<std::size_t>(k - 1)];
    if (n == 1) {
        e.degenerate = true;
        e.std_error = std::numeric_limits<double>::infinity();
        return e;
    }
    const double d = std::sqrt(n * q * (1.0 - q));
    const auto lo = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(k - d)), 1, n);
    const auto hi = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(k + d)), 1, n);
    e.std_error = 0.5 * (x[static_cast<std::size_t>(hi - 1)] - x[static_cast<std::size_t>(lo - 1)]);
    return e;
}

inline McEstimate estimate_pfe(const Contract& c, const SimPolicy& policy, double q,
                               const McSpec& mc) {
    const auto recs = simulate(c, policy, mc);
    return estimate_pfe(recs, q);
}

}  // namespace mtm::mc
