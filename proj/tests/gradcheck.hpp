#pragma once

// Central finite-difference check of the reverse-mode gradients of a
// layered model on the scalar objective c . output.

#include <algorithm>
#include <cmath>
#include <span>

#include "transnn/learn/model.hpp"

namespace gradcheck {

using transnn::Vector;
using transnn::learn::LayeredTransNN;

inline double weighted_output(const LayeredTransNN& m, const Vector& x, const Vector& c) {
    const Vector y = transnn::learn::predict(m, x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += c[i] * y[i];
    return s;
}

/// Largest |analytic - fd| / max(|fd|, floor) over every parameter.
inline double max_relative_error(LayeredTransNN m, const Vector& x, const Vector& c, double h = 1e-5,
                                 double floor = 1e-3) {
    using namespace transnn::learn;
    const Gradients g = backward(m, forward(m, x), c);
    double worst = 0.0;
    auto probe = [&](std::span<double> params, std::span<const double> grad) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double keep = params[i];
            params[i] = keep + h;
            const double up = weighted_output(m, x, c);
            params[i] = keep - h;
            const double down = weighted_output(m, x, c);
            params[i] = keep;
            const double fd = (up - down) / (2 * h);
            worst = std::max(worst, std::abs(grad[i] - fd) / std::max(std::abs(fd), floor));
        }
    };
    for (std::size_t k = 0; k < m.layers().size(); ++k) {
        auto& l = m.layers()[k];
        probe(l.a.data(), g.a[k].data());
        if (!l.linear) probe(l.w.data(), g.w[k].data());
        probe(l.bias, g.bias[k]);
    }
    return worst;
}

}  // namespace gradcheck
