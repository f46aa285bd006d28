#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tlsh {

namespace detail {
inline constexpr double kPi = 3.1415926535897932385;
inline constexpr double kSqrt2 = 1.4142135623730950488;
inline constexpr double kSqrt2Pi = 2.5066282746310005024;
inline constexpr double kSqrt2OverPi = 0.79788456080286535588;

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}
} // namespace detail

/// Upper tail of the standard normal, computed via erfc for accuracy.
inline double normal_upper_tail(double y) {
    return 0.5 * std::erfc(y / detail::kSqrt2);
}

/// Probability that a single ternary hash mislabels two points whose
/// projections are exactly t apart (one maps to Zero, the other to One),
/// over the random offset b. Piecewise linear with period 4*delta:
///   0 on [0, delta]
///   (t - delta) / (2*delta)   on (delta, 2*delta]
///   (3*delta - t) / (2*delta) on (2*delta, 3*delta]
///   0 on (3*delta, 4*delta)
inline double psi_bar(double t, double delta) {
    detail::require(delta > 0.0, "psi_bar: delta must be positive");
    detail::require(t >= 0.0, "psi_bar: t must be non-negative");
    double period = 4.0 * delta;
    double r = t - period * std::floor(t / period);
    if (r <= delta) return 0.0;
    if (r <= 2.0 * delta) return (r - delta) / (2.0 * delta);
    if (r <= 3.0 * delta) return (3.0 * delta - r) / (2.0 * delta);
    return 0.0;
}

/// Probability that a single hash mislabels two points at Euclidean
/// distance x, i.e. 1 - collision_prob(x, delta). Computed additively
/// (a sum of positive piecewise-Gaussian integrals) so that very small
/// tail values keep full relative accuracy.
///
/// Derivation: the projected gap |a . (p - q)| has the half-normal density
/// pi_x(t) = sqrt(2/pi) (1/x) exp(-t^2 / (2 x^2)); integrating psi_bar
/// against it term by term gives, per period k with A = (4k+1) delta,
/// B = (4k+2) delta, C = (4k+3) delta:
///   I1 = [sqrt(2/pi) x (G(A) - G(B)) - A (erf(B/s) - erf(A/s))] / (2 delta)
///   I2 = [C (erf(C/s) - erf(B/s)) - sqrt(2/pi) x (G(B) - G(C))] / (2 delta)
/// with G(t) = exp(-t^2/(2x^2)), s = x sqrt(2). Terms decay like
/// exp(-(4k delta/x)^2/2); summation stops once A > 14 x. Absolute error is
/// far below the 1e-8 contract (bounded by the first neglected Gaussian tail).
inline double mismatch_prob(double x, double delta) {
    detail::require(delta > 0.0, "mismatch_prob: delta must be positive");
    detail::require(x >= 0.0, "mismatch_prob: x must be non-negative");
    if (x == 0.0) return 0.0;
    const double s = x * detail::kSqrt2;
    auto G = [&](double t) { return std::exp(-t * t / (2.0 * x * x)); };
    auto E = [&](double a, double b) { return std::erfc(a / s) - std::erfc(b / s); };
    double total = 0.0;
    for (int k = 0;; ++k) {
        double A = (4.0 * k + 1.0) * delta;
        double B = (4.0 * k + 2.0) * delta;
        double C = (4.0 * k + 3.0) * delta;
        double i1 = (detail::kSqrt2OverPi * x * (G(A) - G(B)) - A * E(A, B)) / (2.0 * delta);
        double i2 = (C * E(B, C) - detail::kSqrt2OverPi * x * (G(B) - G(C))) / (2.0 * delta);
        if (i1 > 0.0) total += i1;
        if (i2 > 0.0) total += i2;
        if (A > 14.0 * x || (k > 0 && i1 + i2 <= 0.0)) break;
    }
    return total;
}

/// Probability that two points at Euclidean distance x receive matching
/// ternions from one random hash. collision_prob(0, delta) == 1 exactly;
/// the far-distance limit is 7/8 (labels become independent quarters).
inline double collision_prob(double x, double delta) {
    return 1.0 - mismatch_prob(x, delta);
}

/// phi(y) = pdf-style tail gap  e^{-y^2/2} / (y sqrt(2 pi)) - Qbar(y), the
/// quantity sandwiching the mismatch probability. Accurate to about 1e-12
/// relative: direct evaluation loses ~y^2 ulp to cancellation, so beyond
/// y = 10 an alternating asymptotic series (truncated at its smallest term)
/// takes over:
///   phi(y) = e^{-y^2/2} / (y^3 sqrt(2 pi)) * sum_k (-1)^k (2k+1)!! / y^{2k}
inline double phi(double y) {
    detail::require(y > 0.0, "phi: y must be positive");
    double lead = std::exp(-y * y / 2.0) / (y * detail::kSqrt2Pi);
    if (y <= 10.0) return lead - normal_upper_tail(y);
    double y2 = y * y;
    double sum = 0.0, term = 1.0;
    for (int k = 0; k < 200; ++k) {
        sum += term;
        double next = -term * double(2 * k + 3) / y2;
        if (std::abs(next) < 1e-18 * std::abs(sum)) break;
        if (std::abs(next) >= std::abs(term)) break; // series turned divergent
        term = next;
    }
    return lead / y2 * sum;
}

/// Simple bounds on phi (valid for y >= 2):
///   e^{-y^2/2} / (4 sqrt(2 pi) y^3) <= phi(y) <= e^{-y^2/2} / (sqrt(2 pi) y^3)
inline double phi_simple_lower(double y) {
    detail::require(y > 0.0, "phi_simple_lower: y must be positive");
    return std::exp(-y * y / 2.0) / (4.0 * detail::kSqrt2Pi * y * y * y);
}

inline double phi_simple_upper(double y) {
    detail::require(y > 0.0, "phi_simple_upper: y must be positive");
    return std::exp(-y * y / 2.0) / (detail::kSqrt2Pi * y * y * y);
}

/// Tight bounds on phi, valid for every y > 0:
///   (4/pi) / (y^2 + y sqrt(y^2 + 8/pi) + 4/pi) * e^{-y^2/2} / (y sqrt(2 pi))
///     <= phi(y) <=
///   2 / (y^2 + y sqrt(y^2 + 4) + 2) * e^{-y^2/2} / (y sqrt(2 pi))
inline double phi_tight_lower(double y) {
    detail::require(y > 0.0, "phi_tight_lower: y must be positive");
    constexpr double fourOverPi = 4.0 / detail::kPi;
    double lead = std::exp(-y * y / 2.0) / (y * detail::kSqrt2Pi);
    return fourOverPi / (y * y + y * std::sqrt(y * y + 8.0 / detail::kPi) + fourOverPi) * lead;
}

inline double phi_tight_upper(double y) {
    detail::require(y > 0.0, "phi_tight_upper: y must be positive");
    double lead = std::exp(-y * y / 2.0) / (y * detail::kSqrt2Pi);
    return 2.0 / (y * y + y * std::sqrt(y * y + 4.0) + 2.0) * lead;
}

/// Complement forms of the closed-form collision bounds. Guaranteed bounds
/// on the per-ternion mismatch probability only in the z >= 2 regime
/// (equivalently delta >= 2c once z is delta or delta/c); evaluation is
/// permitted for any z > 0. p1_mismatch(z) = 1 - p1(z), p2_mismatch likewise.
inline double p1_mismatch(double z) {
    detail::require(z > 0.0, "p1_mismatch: z must be positive");
    return std::exp(-z * z / 2.0) / (z * z * z * detail::kSqrt2Pi);
}

inline double p2_mismatch(double z) {
    detail::require(z > 0.0, "p2_mismatch: z must be positive");
    return std::exp(-z * z / 2.0) / (5.0 * z * z * z * detail::kSqrt2Pi);
}

/// Closed-form lower bound on the per-ternion collision probability for
/// points at distance <= 1: p1(z) = 1 - e^{-z^2/2} / (z^3 sqrt(2 pi)).
inline double p1(double z) { return 1.0 - p1_mismatch(z); }

/// Closed-form upper bound on the per-ternion collision probability for
/// points at distance >= c (argument z = delta/c):
/// p2(z) = 1 - e^{-z^2/2} / (5 z^3 sqrt(2 pi)). p1(z) <= p2(z) < 1 always.
inline double p2(double z) { return 1.0 - p2_mismatch(z); }

/// Whether (delta, c) sits in the regime where the simple closed-form
/// bounds are theorem-guaranteed.
inline bool guarantee_regime(double delta, double c) {
    return c > 1.0 && delta >= 2.0 * c;
}

/// Quality exponent of the family at (delta, c).
struct RhoEstimate {
    double exact;  // log p1(delta) / log p2(delta/c)
    double approx; // (5/c^3) e^{-delta^2 (c^2-1) / (2 c^2)}
};

/// Returns the exact exponent log(p1(delta))/log(p2(delta/c)) together with
/// its large-delta approximation (5/c^3) e^{-delta^2 (c^2-1)/(2c^2)}.
/// log1p keeps the exact form accurate when the mismatch sides are tiny.
inline RhoEstimate rho_estimate(double delta, double c) {
    detail::require(c > 1.0, "rho_estimate: c must exceed 1");
    detail::require(delta > 0.0, "rho_estimate: delta must be positive");
    double num = std::log1p(-p1_mismatch(delta));
    double den = std::log1p(-p2_mismatch(delta / c));
    RhoEstimate r;
    r.exact = num / den;
    r.approx = 5.0 / (c * c * c) * std::exp(-delta * delta * (c * c - 1.0) / (2.0 * c * c));
    return r;
}

} // namespace tlsh
