#pragma once

// Continuous-time network SIS limits of the discrete transmission dynamics.
//
// Single particle:  dp_i/dt = (1 - p_i) sum_{j != i} a_ij c_ij p_j - c_ii p_i
// Multi particle:   dp_h/dt = -c_hh k_hh p_h + (1 - p_h) sum_{q != h} c_hq k_hq p_q
//
// plus a fixed-step RK4 integrator and a harness that measures how fast the
// discrete model with step Delta approaches the ODE as Delta -> 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "transnn/dynamics.hpp"
#include "transnn/network.hpp"
#include "transnn/types.hpp"

namespace transnn {

struct ContinuousRates {
    Matrix c;      // c_ij transmission rate j -> i; c_ii self-healing rate
    Matrix kappa;  // per-particle rates (multi-particle model); empty otherwise
    double epsilon = 0.5;

    bool multi() const noexcept { return !kappa.empty(); }
    std::size_t size() const noexcept { return c.rows(); }
};

inline void validate_rates(const ContinuousRates& r) {
    if (!r.c.square() || r.c.rows() == 0) throw ValidationError("c", "rate matrix must be square and non-empty");
    for (std::size_t i = 0; i < r.c.rows(); ++i) {
        for (std::size_t j = 0; j < r.c.cols(); ++j) {
            if (!(r.c(i, j) >= 0.0) || !std::isfinite(r.c(i, j))) {
                throw ValidationError(entry_name("c", i, j), "rate must be finite and nonnegative");
            }
        }
    }
    if (r.multi()) {
        if (r.kappa.rows() != r.c.rows() || r.kappa.cols() != r.c.cols()) {
            throw ValidationError("kappa", "shape differs from c");
        }
        for (std::size_t i = 0; i < r.kappa.rows(); ++i) {
            for (std::size_t j = 0; j < r.kappa.cols(); ++j) {
                if (!(r.kappa(i, j) >= 0.0) || !std::isfinite(r.kappa(i, j))) {
                    throw ValidationError(entry_name("kappa", i, j), "rate must be finite and nonnegative");
                }
            }
        }
    }
    if (!(r.epsilon >= 0.0 && r.epsilon <= 1.0)) throw ValidationError("epsilon", "must lie in [0,1]");
}

/// All-ones off-diagonal adjacency (complete graph without self-loops).
inline Matrix complete_adjacency(std::size_t n) {
    Matrix adj(n, n, 1.0);
    for (std::size_t i = 0; i < n; ++i) adj(i, i) = 0.0;
    return adj;
}

inline Vector sis_rhs_single(const ContinuousRates& rates, const Matrix& adj, std::span<const double> p) {
    const std::size_t n = rates.size();
    if (p.size() != n || adj.rows() != n || adj.cols() != n) {
        throw std::invalid_argument("sis_rhs_single: shape mismatch");
    }
    Vector dp(n);
    for (std::size_t i = 0; i < n; ++i) {
        double inflow = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) inflow += adj(i, j) * rates.c(i, j) * p[j];
        }
        dp[i] = (1.0 - p[i]) * inflow - rates.c(i, i) * p[i];
    }
    return dp;
}

inline Vector sis_rhs_multi(const ContinuousRates& rates, std::span<const double> p) {
    const std::size_t n = rates.size();
    if (!rates.multi()) throw std::invalid_argument("sis_rhs_multi: kappa is missing");
    if (p.size() != n) throw std::invalid_argument("sis_rhs_multi: shape mismatch");
    Vector dp(n);
    for (std::size_t h = 0; h < n; ++h) {
        double inflow = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            if (q != h) inflow += rates.c(h, q) * rates.kappa(h, q) * p[q];
        }
        dp[h] = -rates.c(h, h) * rates.kappa(h, h) * p[h] + (1.0 - p[h]) * inflow;
    }
    return dp;
}

// ---------------------------------------------------------------------------
// RK4

using VectorField = std::function<Vector(std::span<const double>)>;

struct ClampEvent {
    std::size_t step;
    std::size_t node;
    double amount;  // distance moved back into [0,1]
};

struct TimeSeries {
    std::vector<double> t;
    std::vector<Vector> p;
    std::vector<ClampEvent> clamps;

    double max_clamp() const {
        double m = 0.0;
        for (const auto& e : clamps) m = std::max(m, e.amount);
        return m;
    }
};

/// Classical fixed-step RK4 from 0 to t_end; the last step is shortened to
/// land exactly on t_end. States are clamped to [0,1] with every clamp logged.
inline TimeSeries integrate(const VectorField& rhs, const ProbabilityState& p0, double t_end, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
    if (!(t_end >= 0.0)) throw std::invalid_argument("integrate: t_end must be nonnegative");
    const std::size_t n = p0.size();
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    TimeSeries ts;
    ts.t.reserve(steps + 1);
    ts.p.reserve(steps + 1);
    Vector x = p0.values();
    ts.t.push_back(0.0);
    ts.p.push_back(x);

    auto check = [&](const Vector& v, std::size_t step) {
        for (double d : v) {
            if (std::isnan(d)) throw NumericalError("step " + std::to_string(step), "NaN in vector field");
        }
    };
    Vector tmp(n);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t0 = static_cast<double>(k - 1) * dt;
        const double h = (k == steps) ? t_end - t0 : dt;
        const Vector k1 = rhs(x);
        check(k1, k);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
        const Vector k2 = rhs(tmp);
        check(k2, k);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
        const Vector k3 = rhs(tmp);
        check(k3, k);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
        const Vector k4 = rhs(tmp);
        check(k4, k);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (std::isnan(x[i])) throw NumericalError("step " + std::to_string(k), "NaN state");
            const double clamped = std::clamp(x[i], 0.0, 1.0);
            if (clamped != x[i]) {
                ts.clamps.push_back({k, i, std::abs(clamped - x[i])});
                x[i] = clamped;
            }
        }
        ts.t.push_back(k == steps ? t_end : static_cast<double>(k) * dt);
        ts.p.push_back(x);
    }
    return ts;
}

inline void write_time_series_csv(std::ostream& out, const TimeSeries& ts) {
    out << "t,node,p\n" << std::setprecision(17);
    for (std::size_t k = 0; k < ts.t.size(); ++k) {
        for (std::size_t i = 0; i < ts.p[k].size(); ++i) out << ts.t[k] << ',' << i << ',' << ts.p[k][i] << '\n';
    }
}

// ---------------------------------------------------------------------------
// Disease-free linearisation: B_ij = a_ij c_ij (i != j), B_ii = -c_ii.

inline Matrix sis_linearization(const ContinuousRates& rates, const Matrix& adj) {
    const std::size_t n = rates.size();
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            b(i, j) = (i == j) ? -rates.c(i, i) : adj(i, j) * rates.c(i, j);
        }
    }
    return b;
}

inline double max_real_eigenvalue(const Matrix& m) {
    const auto n = static_cast<Eigen::Index>(m.rows());
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> view(
        m.data().data(), n, n);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(view, false);
    return solver.eigenvalues().real().maxCoeff();
}

// ---------------------------------------------------------------------------
// Delta -> 0 consistency harness

enum class SelfTransmission { Exponential, Linear };

class DeltaTooLarge : public DomainError {
public:
    DeltaTooLarge(double delta, const std::string& entry)
        : DomainError("delta=" + std::to_string(delta) + " too large: " + entry + " exceeds 1"),
          delta_(delta), entry_(entry) {}
    double delta() const noexcept { return delta_; }
    const std::string& entry() const noexcept { return entry_; }

private:
    double delta_;
    std::string entry_;
};

struct ConsistencyOptions {
    double horizon = 5.0;
    SelfTransmission self = SelfTransmission::Exponential;
    std::size_t reference_substeps = 16;  // RK4 steps per Delta for the reference
};

struct ConsistencyRow {
    double delta = 0.0;
    double sup_error = 0.0;
    double order_estimate = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double self_weight(double rate, double delta, SelfTransmission self, std::size_t node) {
    if (self == SelfTransmission::Exponential) return std::exp(-rate * delta);
    const double w = 1.0 - rate * delta;
    if (w < 0.0) throw DeltaTooLarge(delta, "self-healing " + entry_name("c", node, node) + " * delta");
    return w;
}

// Discrete network whose Delta -> 0 limit is the SIS field for `rates`.
inline TransmissionNetwork discretize(const ContinuousRates& rates, const Matrix& adj, double delta,
                                      SelfTransmission self) {
    const std::size_t n = rates.size();
    Matrix a(n, n), w(n, n);
    if (!rates.multi()) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) {
                    a(i, i) = 1.0;
                    w(i, i) = self_weight(rates.c(i, i), delta, self, i);
                } else if (adj(i, j) != 0.0) {
                    a(i, j) = 1.0;
                    w(i, j) = rates.c(i, j) * delta;
                    if (w(i, j) > 1.0) throw DeltaTooLarge(delta, entry_name("c", i, j) + " * delta");
                }
            }
        }
        return TransmissionNetwork(NetworkKind::SingleParticle, std::move(a), std::move(w));
    }
    // Cross links split Delta between particle count and per-particle
    // probability: a = Delta^eps c, w = Delta^(1-eps) kappa. The self link keeps
    // one particle healing at rate c_hh kappa_hh.
    const double eps = rates.epsilon;
    for (std::size_t h = 0; h < n; ++h) {
        for (std::size_t q = 0; q < n; ++q) {
            if (h == q) {
                a(h, h) = 1.0;
                w(h, h) = self_weight(rates.c(h, h) * rates.kappa(h, h), delta, self, h);
            } else {
                a(h, q) = std::pow(delta, eps) * rates.c(h, q);
                w(h, q) = std::pow(delta, 1.0 - eps) * rates.kappa(h, q);
                if (w(h, q) > 1.0) throw DeltaTooLarge(delta, entry_name("kappa", h, q) + " * delta^(1-eps)");
            }
        }
    }
    return TransmissionNetwork(NetworkKind::MultiParticle, std::move(a), std::move(w));
}

}  // namespace detail

/// For each Delta, runs the discrete model for ceil(T/Delta) steps and reports
/// the sup-norm deviation (over grid times and nodes) from an RK4 reference.
/// For the single-particle model `adj` selects the links; it is ignored for
/// the multi-particle model.
inline std::vector<ConsistencyRow> discretization_consistency(const ContinuousRates& rates, const Matrix& adj,
                                                              const ProbabilityState& p0,
                                                              const std::vector<double>& deltas,
                                                              const ConsistencyOptions& opt = {}) {
    validate_rates(rates);
    const std::size_t n = rates.size();
    if (p0.size() != n) throw std::invalid_argument("discretization_consistency: p0 length != n");
    if (!rates.multi() && (adj.rows() != n || adj.cols() != n)) {
        throw std::invalid_argument("discretization_consistency: adjacency shape mismatch");
    }
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (!(deltas[k] > 0.0)) throw std::invalid_argument("discretization_consistency: deltas must be positive");
        if (k > 0 && !(deltas[k] < deltas[k - 1])) {
            throw std::invalid_argument("discretization_consistency: deltas must be decreasing");
        }
    }
    // build every discrete network first so an oversized Delta fails early
    std::vector<TransmissionNetwork> nets;
    for (double d : deltas) nets.push_back(detail::discretize(rates, adj, d, opt.self));

    const VectorField field = rates.multi()
        ? VectorField([&](std::span<const double> p) { return sis_rhs_multi(rates, p); })
        : VectorField([&](std::span<const double> p) { return sis_rhs_single(rates, adj, p); });

    std::vector<ConsistencyRow> table;
    for (std::size_t r = 0; r < deltas.size(); ++r) {
        const double delta = deltas[r];
        const auto steps = static_cast<std::size_t>(std::ceil(opt.horizon / delta - 1e-9));
        const TimeSeries ref = integrate(field, p0, static_cast<double>(steps) * delta,
                                         delta / static_cast<double>(opt.reference_substeps));
        double sup = 0.0;
        simulate_streaming(nets[r], p0, steps, Representation::Probability, [&](std::size_t k, const Vector& p) {
            const Vector& q = ref.p[k * opt.reference_substeps];
            for (std::size_t i = 0; i < n; ++i) sup = std::max(sup, std::abs(p[i] - q[i]));
            return true;
        });
        ConsistencyRow row;
        row.delta = delta;
        row.sup_error = sup;
        if (r > 0) {
            const ConsistencyRow& prev = table.back();
            row.order_estimate = std::log(prev.sup_error / sup) / std::log(prev.delta / delta);
        }
        table.push_back(row);
    }
    return table;
}

inline void write_consistency_csv(std::ostream& out, const std::vector<ConsistencyRow>& table) {
    out << "delta,sup_error,order_estimate\n" << std::setprecision(17);
    for (const auto& row : table) {
        out << row.delta << ',' << row.sup_error << ',';
        if (std::isnan(row.order_estimate)) out << "nan";
        else out << row.order_estimate;
        out << '\n';
    }
}

}  // namespace transnn
