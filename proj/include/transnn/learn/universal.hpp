#pragma once

// Single-hidden-layer approximation demos:
//     y_r(x) = sum_i a_ri f(w_i, eta_i^T x + b),  b fixed and nonzero.
// fit_universal trains (eta, w, a) with full-batch Adam, periodically
// re-solving the output weights a by regularized least squares, and reports
// the sup error on a grid that is denser than (and offset from) the training
// grid. The optional rational mode replaces each a_ri by its best rational
// approximation with bounded denominator and reports the change.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "transnn/learn/model.hpp"
#include "transnn/learn/train.hpp"
#include "transnn/types.hpp"

namespace transnn::learn {

struct Target {
    std::string name;
    std::size_t inputs = 1;
    std::size_t outputs = 1;
    Vector lo;
    Vector hi;
    std::function<Vector(std::span<const double>)> f;
};

inline Target sin_target() {
    return {"sin", 1, 1, {-std::numbers::pi}, {std::numbers::pi},
            [](std::span<const double> x) { return Vector{std::sin(x[0])}; }};
}

inline Target gaussian_bump_target() {
    return {"gaussian-bump", 1, 1, {-2.0}, {2.0},
            [](std::span<const double> x) { return Vector{std::exp(-2.0 * x[0] * x[0])}; }};
}

/// Five-term Fourier partial sum of a sawtooth wave.
inline Target sawtooth_smooth_target() {
    return {"sawtooth-smooth", 1, 1, {-std::numbers::pi}, {std::numbers::pi}, [](std::span<const double> x) {
                double y = 0.0;
                for (int k = 1; k <= 5; ++k) y += ((k % 2) ? 1.0 : -1.0) * std::sin(k * x[0]) / k;
                return Vector{y};
            }};
}

inline Target peaks_target() {
    return {"2d-peaks", 2, 1, {-3.0, -3.0}, {3.0, 3.0}, [](std::span<const double> v) {
                const double x = v[0], y = v[1];
                const double z = 3.0 * (1 - x) * (1 - x) * std::exp(-x * x - (y + 1) * (y + 1)) -
                                 10.0 * (x / 5 - x * x * x - std::pow(y, 5)) * std::exp(-x * x - y * y) -
                                 std::exp(-(x + 1) * (x + 1) - y * y) / 3.0;
                return Vector{z};
            }};
}

/// Vector-valued target (sin, cos) on [-pi, pi].
inline Target sincos_target() {
    return {"sincos", 1, 2, {-std::numbers::pi}, {std::numbers::pi},
            [](std::span<const double> x) { return Vector{std::sin(x[0]), std::cos(x[0])}; }};
}

inline Target constant_target(double c, double lo = -1.0, double hi = 1.0) {
    return {"constant", 1, 1, {lo}, {hi}, [c](std::span<const double>) { return Vector{c}; }};
}

inline std::vector<std::string> target_names() { return {"sin", "gaussian-bump", "sawtooth-smooth", "2d-peaks", "sincos"}; }

inline Target target_by_name(const std::string& name) {
    if (name == "sin") return sin_target();
    if (name == "gaussian-bump") return gaussian_bump_target();
    if (name == "sawtooth-smooth") return sawtooth_smooth_target();
    if (name == "2d-peaks") return peaks_target();
    if (name == "sincos") return sincos_target();
    throw ValidationError("target", "unknown target '" + name + "'");
}

/// Tensor grid with `per_dim` points per axis, endpoints included.
inline Matrix box_grid(const Target& t, std::size_t per_dim) {
    if (per_dim < 2) throw std::invalid_argument("box_grid: need at least 2 points per axis");
    std::size_t total = 1;
    for (std::size_t d = 0; d < t.inputs; ++d) total *= per_dim;
    Matrix g(total, t.inputs);
    for (std::size_t r = 0; r < total; ++r) {
        std::size_t idx = r;
        for (std::size_t d = 0; d < t.inputs; ++d) {
            const std::size_t k = idx % per_dim;
            idx /= per_dim;
            g(r, d) = t.lo[d] + (t.hi[d] - t.lo[d]) * static_cast<double>(k) / static_cast<double>(per_dim - 1);
        }
    }
    return g;
}

inline Dataset sample_target(const Target& t, std::size_t per_dim) {
    Dataset ds{box_grid(t, per_dim), Matrix()};
    ds.targets = Matrix(ds.size(), t.outputs);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Vector y = t.f(ds.input(i));
        std::copy(y.begin(), y.end(), ds.targets.row(i).begin());
    }
    return ds;
}

inline double sup_error(const LayeredTransNN& model, const Dataset& grid) {
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vector y = predict(model, grid.input(i));
        for (std::size_t r = 0; r < y.size(); ++r) worst = std::max(worst, std::abs(y[r] - grid.targets(i, r)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Rational rounding

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Closest fraction p/q to x with 1 <= q <= max_den, from the convergents and
/// semiconvergents of the continued-fraction expansion.
inline Rational best_rational(double x, std::int64_t max_den) {
    if (!std::isfinite(x)) throw DomainError("best_rational: non-finite value");
    if (max_den < 1) throw std::invalid_argument("best_rational: max_den must be >= 1");
    const bool neg = x < 0;
    const double ax = std::abs(x);
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double rem = ax;
    Rational best{static_cast<std::int64_t>(std::llround(ax)), 1};
    for (int iter = 0; iter < 64; ++iter) {
        const double fl = std::floor(rem);
        const auto a = static_cast<std::int64_t>(fl);
        const std::int64_t q2 = q0 + a * q1;
        if (q2 > max_den) {
            const std::int64_t k = (max_den - q0) / q1;
            const Rational semi{p0 + k * p1, q0 + k * q1};
            const Rational conv{p1, q1};
            best = std::abs(semi.value() - ax) < std::abs(conv.value() - ax) ? semi : conv;
            break;
        }
        const std::int64_t p2 = p0 + a * p1;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        best = {p1, q1};
        const double frac = rem - fl;
        if (frac < 1e-300 || static_cast<double>(p1) / static_cast<double>(q1) == ax) break;
        rem = 1.0 / frac;
    }
    if (neg) best.num = -best.num;
    return best;
}

// ---------------------------------------------------------------------------
// Fitting

struct UniversalConfig {
    ActivationKind activation = ActivationKind::TLogSigmoid;
    double b = 1.0;
    std::size_t epochs = 3000;
    double learning_rate = 0.01;
    double decay = 0.999;              // exponential decay per epoch
    std::size_t train_points = 256;    // per axis
    std::size_t eval_points = 4001;    // per axis
    std::size_t refit_every = 200;     // epochs between least-squares solves for a (0 disables)
    double ridge = 1e-10;
    double eta_max = 8.0;
    std::uint64_t seed = 1;
    bool rational = false;
    std::int64_t max_denominator = 1'000'000;

    void validate() const {
        if (b == 0.0) throw ValidationError("b", "fixed bias must be nonzero");
        if (activation == ActivationKind::TLogSigmoidPlus && b <= 0.0) {
            throw ValidationError("b", "TLogSigmoidPlus requires a positive bias");
        }
        if (epochs == 0) throw ValidationError("epochs", "must be positive");
        if (!(learning_rate > 0.0)) throw ValidationError("learning_rate", "must be positive");
        if (train_points < 2 || eval_points < 2) throw ValidationError("points", "need at least 2 per axis");
        if (max_denominator < 1) throw ValidationError("max_denominator", "must be >= 1");
    }
};

struct RationalReport {
    double sup_error = 0.0;
    double sup_error_change = 0.0;
    double max_abs_delta_a = 0.0;
    double perturbation_bound = 0.0;  // sum_i |delta a_i| * max_x |f(w_i, eta_i^T x + b)|
    std::vector<Rational> weights;    // row-major over (output, hidden)
};

struct UniversalFit {
    LayeredTransNN model;
    double sup_error = 0.0;
    double train_mse = 0.0;
    std::optional<RationalReport> rational;
};

namespace detail {

inline Matrix hidden_features(const LayeredTransNN& model, const Dataset& data) {
    const Layer& in = model.layers()[0];
    const Layer& hid = model.layers()[1];
    Matrix feat(data.size(), hid.inputs());
    for (std::size_t r = 0; r < data.size(); ++r) {
        const Vector z = layer_forward(in, model.activation(), data.input(r));
        for (std::size_t i = 0; i < z.size(); ++i) feat(r, i) = activate(model.activation(), hid.level(0, i), z[i]);
    }
    return feat;
}

/// Solves min ||F a_r - y_r||^2 + ridge ||a_r||^2 for every output r.
inline void refit_output_weights(LayeredTransNN& model, const Dataset& data, double ridge) {
    const Matrix feat = hidden_features(model, data);
    const auto n = static_cast<Eigen::Index>(feat.rows()), k = static_cast<Eigen::Index>(feat.cols());
    Eigen::MatrixXd f(n, k);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < k; ++c) f(r, c) = feat(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    const double scale = std::max(1.0, f.squaredNorm() / static_cast<double>(k));
    Eigen::MatrixXd normal = f.transpose() * f;
    normal.diagonal().array() += ridge * scale;
    const Eigen::LDLT<Eigen::MatrixXd> solver(normal);
    Layer& hid = model.layers()[1];
    for (std::size_t out = 0; out < hid.outputs(); ++out) {
        Eigen::VectorXd y(n);
        for (Eigen::Index r = 0; r < n; ++r) y(r) = data.targets(static_cast<std::size_t>(r), out);
        const Eigen::VectorXd a = solver.solve(f.transpose() * y);
        if (!a.allFinite()) continue;
        for (Eigen::Index c = 0; c < k; ++c) hid.a(out, static_cast<std::size_t>(c)) = a(c);
    }
}

/// Places each unit's transition point uniformly inside the box.
inline void spread_input_weights(LayeredTransNN& model, const Target& t, double b, double eta_max,
                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double radius = 0.0;
    for (std::size_t d = 0; d < t.inputs; ++d) radius = std::max(radius, std::max(std::abs(t.lo[d]), std::abs(t.hi[d])));
    Layer& in = model.layers()[0];
    for (std::size_t i = 0; i < in.outputs(); ++i) {
        double norm = 0.0;
        Vector u(t.inputs);
        for (double& v : u) {
            v = gauss(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        const double offset = std::max(radius * unit(rng), 1e-3);
        const double s = std::clamp(std::abs(b) / offset, 0.25, eta_max);
        for (std::size_t d = 0; d < t.inputs; ++d) in.a(i, d) = s * u[d] / norm;
    }
}

}  // namespace detail

inline UniversalFit fit_universal(const Target& target, std::size_t width, const UniversalConfig& cfg) {
    cfg.validate();
    if (width == 0) throw ValidationError("width", "must be >= 1");
    LayeredTransNN model = make_single_hidden(target.inputs, width, target.outputs, cfg.activation, cfg.b, cfg.seed);
    detail::spread_input_weights(model, target, cfg.b, cfg.eta_max, cfg.seed);

    const Dataset train_set = sample_target(target, cfg.train_points);
    const Dataset eval_set = sample_target(target, cfg.eval_points);

    TrainConfig tc;
    tc.loss = Loss::MSE;
    tc.optimizer = OptimizerKind::Adam;
    tc.learning_rate = cfg.learning_rate;
    tc.schedule = Schedule::Exponential;
    tc.decay = cfg.decay;
    tc.train_bias = false;
    tc.seed = cfg.seed;

    Optimizer opt(model, tc);
    std::vector<std::size_t> all(train_set.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Gradients g;
    if (cfg.refit_every) detail::refit_output_weights(model, train_set, cfg.ridge);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double loss = batch_gradient(model, train_set, all, tc, g);
        if (!std::isfinite(loss) || !finite(g)) {
            throw NumericalError("epoch " + std::to_string(epoch + 1) + " batch 0", "non-finite loss or gradient");
        }
        opt.step(model, g, tc.rate_at(epoch));
        if (cfg.refit_every && (epoch + 1) % cfg.refit_every == 0) {
            detail::refit_output_weights(model, train_set, cfg.ridge);
        }
    }
    if (cfg.refit_every) detail::refit_output_weights(model, train_set, cfg.ridge);

    UniversalFit fit{model, sup_error(model, eval_set), objective(model, train_set, tc), std::nullopt};
    if (cfg.rational) {
        RationalReport rep;
        LayeredTransNN rounded = model;
        Layer& hid = rounded.layers()[1];
        Vector delta(hid.a.size());
        for (std::size_t i = 0; i < hid.a.size(); ++i) {
            const Rational q = best_rational(hid.a.data()[i], cfg.max_denominator);
            rep.weights.push_back(q);
            delta[i] = std::abs(q.value() - hid.a.data()[i]);
            hid.a.data()[i] = q.value();
            rep.max_abs_delta_a = std::max(rep.max_abs_delta_a, delta[i]);
        }
        const Matrix feat = detail::hidden_features(model, eval_set);
        for (std::size_t out = 0; out < hid.outputs(); ++out) {
            double bound = 0.0;
            for (std::size_t i = 0; i < hid.inputs(); ++i) {
                double fmax = 0.0;
                for (std::size_t r = 0; r < feat.rows(); ++r) fmax = std::max(fmax, std::abs(feat(r, i)));
                bound += delta[out * hid.inputs() + i] * fmax;
            }
            rep.perturbation_bound = std::max(rep.perturbation_bound, bound);
        }
        rep.sup_error = sup_error(rounded, eval_set);
        rep.sup_error_change = std::abs(rep.sup_error - fit.sup_error);
        fit.rational = std::move(rep);
    }
    return fit;
}

}  // namespace transnn::learn
