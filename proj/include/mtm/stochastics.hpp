#pragma once

// Running maximum of driftless Brownian motion: bridge-conditioned law,
// reflection tail, joint maximum/endpoint probabilities and exact sampling.
//
// Every closed form is total: outside the region where the textbook formula
// applies (barrier already at or below the start/end value) it is clamped to
// the correct limiting probability.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtm/numerics.hpp"

namespace mtm::stochastics {

/// A piece of path of length dt. b is only meaningful for bridge forms.
struct Segment {
    double a = 0.0;
    double b = 0.0;
    double dt = 1.0;
    double sigma = 1.0;
};

inline double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

/// P(max over the segment > m | start a, end b).
inline double bridge_max_exceed_prob(const Segment& s, double m) {
    if (m <= std::max(s.a, s.b)) return 1.0;
    return clamp01(std::exp(-2.0 * (m - s.a) * (m - s.b) / (s.sigma * s.sigma * s.dt)));
}

/// The bridge law applied only where it is stated, endpoint strictly below the
/// barrier; an endpoint at or above the barrier contributes no exceedance.
/// Used to reproduce published twice-MTM tables.
inline double bridge_max_exceed_prob_below_only(const Segment& s, double m) {
    if (m <= s.b) return 0.0;
    return bridge_max_exceed_prob(s, m);
}

/// P(max over [0, dt] > c | start value), reflection principle.
inline double running_max_exceed_prob(double start, double c, double dt, double sigma) {
    if (c <= start) return 1.0;
    return clamp01(numerics::erfc((c - start) / (sigma * std::sqrt(2.0 * dt))));
}

/// P(max <= m, end <= u) for a segment started at a.
inline double joint_max_below_and_end_below(double a, double m, double u, double dt,
                                            double sigma) {
    if (m < a) return 0.0;
    const double s = sigma * std::sqrt(dt);
    const double cap = std::min(u, m);
    return clamp01(numerics::normal_cdf((cap - a) / s) -
                   numerics::normal_cdf((cap - (2.0 * m - a)) / s));
}

/// P(max <= m, end > l) for a segment started at a.
inline double joint_max_below_and_end_above(double a, double m, double l, double dt,
                                            double sigma) {
    if (l >= m) return 0.0;
    return clamp01(joint_max_below_and_end_below(a, m, m, dt, sigma) -
                   joint_max_below_and_end_below(a, m, l, dt, sigma));
}

/// Inverse of the bridge law: a segment maximum given both endpoints, from one
/// uniform in (0, 1). Always >= max(a, b).
inline double sample_segment_max(const Segment& s, double uniform) {
    const double d = s.a - s.b;
    return 0.5 * (s.a + s.b +
                  std::sqrt(d * d - 2.0 * s.sigma * s.sigma * s.dt * std::log(uniform)));
}

}  // namespace mtm::stochastics
