#pragma once

// Tunable activation functions with activation level w in [0,1]:
//
//   TLogSigmoid      psi(w, x)      = -log(1 - w + w e^{-x})
//   TLogSigmoidPlus  psi_plus(w, x) = psi(w, x) for x >= 0, 0 otherwise
//   TSoftAffine      phi(w, x)      =  log(1 - w + w e^{x}) = -psi(w, -x)
//
// w = 0 passes nothing, w = 1 passes the input unchanged. Inputs live on the
// extended real line; +-infinity follow IEEE semantics, NaN is rejected.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include "transnn/types.hpp"

namespace transnn {

enum class ActivationKind { TLogSigmoid, TLogSigmoidPlus, TSoftAffine };

inline std::string_view to_string(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::TLogSigmoid: return "psi";
        case ActivationKind::TLogSigmoidPlus: return "psi_plus";
        case ActivationKind::TSoftAffine: return "phi";
    }
    return "psi";
}

inline ActivationKind parse_activation_kind(std::string_view name) {
    if (name == "psi" || name == "TLogSigmoid") return ActivationKind::TLogSigmoid;
    if (name == "psi_plus" || name == "TLogSigmoidPlus") return ActivationKind::TLogSigmoidPlus;
    if (name == "phi" || name == "TSoftAffine") return ActivationKind::TSoftAffine;
    throw std::invalid_argument("unknown activation kind '" + std::string(name) + "'");
}

namespace detail {

inline void check_level(double w) {
    if (!(w >= 0.0 && w <= 1.0)) {
        throw DomainError("activation level w=" + std::to_string(w) + " outside [0,1]");
    }
}

inline void check_input(double x) {
    if (std::isnan(x)) throw DomainError("activation input is NaN");
}

inline void check_args(double w, double x) {
    check_level(w);
    check_input(x);
}

// log1p(w (e^{-x} - 1)) stays accurate near x = 0; below the cutoff the
// factored form avoids overflowing e^{-x}.
inline constexpr double kLeftTailCutoff = -30.0;

inline double psi_unchecked(double w, double x) {
    if (w == 0.0 || x == 0.0) return 0.0;
    if (w == 1.0) return x;
    if (x >= kLeftTailCutoff) {
        const double t = w * std::expm1(-x);
        // near t = -1 the argument is better formed directly; 1 - w is exact for w >= 0.5
        if (t < -0.5) return -std::log((1.0 - w) + w * std::exp(-x));
        return -std::log1p(t);
    }
    // 1 - w + w e^{-x} = w e^{-x} (1 + (1-w)/w e^{x})
    return x - std::log(w) - std::log1p((1.0 - w) / w * std::exp(x));
}

inline double dpsi_dx_unchecked(double w, double x) {
    if (w == 0.0) return 0.0;
    if (w == 1.0) return 1.0;
    return w / (w + (1.0 - w) * std::exp(x));
}

inline double dpsi_dw_unchecked(double w, double x) {
    if (x == 0.0) return 0.0;
    if (x > 0.0) {
        const double em = std::expm1(-x);  // e^{-x} - 1, in (-1, 0)
        const double t = w * em;
        return -em / (t < -0.5 ? (1.0 - w) + w * std::exp(-x) : 1.0 + t);
    }
    return std::expm1(x) / (w + (1.0 - w) * std::exp(x));
}

inline double factorial(unsigned k) {
    double f = 1.0;
    for (unsigned i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

}  // namespace detail

// Exact integer type for Stirling numbers; S(30, k) exceeds 64 bits.
using StirlingInt = unsigned __int128;

inline constexpr unsigned kMaxStirlingN = 30;

// Stirling number of the second kind S(n, k): the number of partitions of
// an n-set into k non-empty blocks.
inline StirlingInt stirling2(unsigned n, unsigned k) {
    if (n > kMaxStirlingN) {
        throw std::out_of_range("stirling2: n=" + std::to_string(n) + " exceeds " +
                                std::to_string(kMaxStirlingN));
    }
    if (k > n) return 0;
    // row[j] holds S(m, j) while sweeping m = 0..n
    StirlingInt row[kMaxStirlingN + 1] = {};
    row[0] = 1;
    for (unsigned m = 1; m <= n; ++m) {
        for (unsigned j = m; j >= 1; --j) {
            row[j] = static_cast<StirlingInt>(j) * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    return row[k];
}

/// TLogSigmoid: -log(1 - w + w e^{-x}).
inline double psi(double w, double x) {
    detail::check_args(w, x);
    return detail::psi_unchecked(w, x);
}

/// TLogSigmoidPlus: psi on x >= 0, zero on x < 0. Equals ReLU at w = 1.
inline double psi_plus(double w, double x) {
    detail::check_args(w, x);
    return x < 0.0 ? 0.0 : detail::psi_unchecked(w, x);
}

/// TSoftAffine: log(1 - w + w e^{x}), the point reflection of psi.
inline double phi(double w, double x) {
    detail::check_args(w, x);
    return -detail::psi_unchecked(w, -x);
}

// ---------------------------------------------------------------------------
// TLogSigmoid derivatives

/// d psi / dw = (1 - e^{-x}) e^{psi(w,x)}. Closed form is continuous on w in
/// [0,1] for finite x; at x = +inf it is 1/(1-w) (infinite at w = 1).
inline double dpsi_dw(double w, double x) {
    detail::check_args(w, x);
    return detail::dpsi_dw_unchecked(w, x);
}

/// k-th derivative in w: (k-1)! (1 - e^{-x})^k e^{k psi(w,x)} = (k-1)! (d psi/dw)^k.
/// Overflow saturates to +-inf.
inline double dpsi_dw_higher(double w, double x, unsigned k) {
    if (k == 0) throw std::invalid_argument("dpsi_dw_higher: k must be >= 1");
    detail::check_args(w, x);
    const double g = detail::dpsi_dw_unchecked(w, x);
    if (g == 0.0) return 0.0;
    return detail::factorial(k - 1) * std::pow(g, static_cast<double>(k));
}

/// d psi / dx = w e^{-x} e^{psi(w,x)} = w / (w + (1-w) e^{x}), in [0,1].
inline double dpsi_dx(double w, double x) {
    detail::check_args(w, x);
    return detail::dpsi_dx_unchecked(w, x);
}

namespace detail {

// sum_{k=1}^{n} sign(k) (k-1)! S(n,k) d^k, with sign(k) = (-1)^{k+n} for psi
// and (-1)^{k-1} for phi.
inline double stirling_series(double d, unsigned n, bool psi_signs) {
    double total = 0.0;
    double dk = 1.0;
    for (unsigned k = 1; k <= n; ++k) {
        dk *= d;
        const bool negative = psi_signs ? ((k + n) % 2 == 1) : ((k - 1) % 2 == 1);
        const double term = factorial(k - 1) * static_cast<double>(stirling2(n, k)) * dk;
        total += negative ? -term : term;
    }
    return total;
}

}  // namespace detail

/// n-th derivative in x via Stirling numbers of the second kind. n = 1 gives
/// dpsi_dx; n = 2 gives -d(1-d) <= 0.
inline double dpsi_dx_higher(double w, double x, unsigned n) {
    if (n == 0) throw std::invalid_argument("dpsi_dx_higher: n must be >= 1");
    detail::check_args(w, x);
    return detail::stirling_series(detail::dpsi_dx_unchecked(w, x), n, true);
}

// ---------------------------------------------------------------------------
// TSoftAffine derivatives, obtained through phi(w, x) = -psi(w, -x).

inline double dphi_dw(double w, double x) {
    detail::check_args(w, x);
    return -detail::dpsi_dw_unchecked(w, -x);
}

/// (-1)^{k-1} (k-1)! (d phi/dw)^k.
inline double dphi_dw_higher(double w, double x, unsigned k) {
    if (k == 0) throw std::invalid_argument("dphi_dw_higher: k must be >= 1");
    detail::check_args(w, x);
    const double g = -detail::dpsi_dw_unchecked(w, -x);
    if (g == 0.0) return 0.0;
    const double mag = detail::factorial(k - 1) * std::pow(g, static_cast<double>(k));
    return (k % 2 == 0) ? -mag : mag;
}

/// d phi / dx = w e^{x} / (1 - w + w e^{x}); a sigmoid with value w at x = 0.
inline double dphi_dx(double w, double x) {
    detail::check_args(w, x);
    return detail::dpsi_dx_unchecked(w, -x);
}

inline double dphi_dx_higher(double w, double x, unsigned n) {
    if (n == 0) throw std::invalid_argument("dphi_dx_higher: n must be >= 1");
    detail::check_args(w, x);
    return detail::stirling_series(detail::dpsi_dx_unchecked(w, -x), n, false);
}

// ---------------------------------------------------------------------------
// Kind-dispatched evaluation used by the layered networks.

inline double activate(ActivationKind kind, double w, double x) {
    switch (kind) {
        case ActivationKind::TLogSigmoid: return psi(w, x);
        case ActivationKind::TLogSigmoidPlus: return psi_plus(w, x);
        case ActivationKind::TSoftAffine: return phi(w, x);
    }
    return psi(w, x);
}

// psi_plus uses the subgradient 0 at the kink x = 0.
inline double activate_dx(ActivationKind kind, double w, double x) {
    switch (kind) {
        case ActivationKind::TLogSigmoid: return dpsi_dx(w, x);
        case ActivationKind::TLogSigmoidPlus: return x <= 0.0 ? 0.0 : dpsi_dx(w, x);
        case ActivationKind::TSoftAffine: return dphi_dx(w, x);
    }
    return dpsi_dx(w, x);
}

inline double activate_dw(ActivationKind kind, double w, double x) {
    switch (kind) {
        case ActivationKind::TLogSigmoid: return dpsi_dw(w, x);
        case ActivationKind::TLogSigmoidPlus: return x <= 0.0 ? 0.0 : dpsi_dw(w, x);
        case ActivationKind::TSoftAffine: return dphi_dw(w, x);
    }
    return dpsi_dw(w, x);
}

}  // namespace transnn
