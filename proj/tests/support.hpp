#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "idfd/encoder.hpp"
#include "idfd/matrix.hpp"
#include "idfd/rng.hpp"

namespace testing {

inline idfd::Matrix random_matrix(std::size_t r, std::size_t c, idfd::SeededRng& rng, double scale = 1.0) {
    idfd::Matrix m(r, c);
    for (double& x : m.data()) x = scale * rng.normal();
    return m;
}

/// Largest elementwise relative error; entries where both sides are below
/// `floor` in magnitude are compared against `floor` instead.
inline double max_rel_error(std::span<const double> analytic, std::span<const double> numeric,
                            double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    return worst;
}

/// Central differences of f at x, step eps, one coordinate at a time.
inline std::vector<double> numeric_gradient(const std::function<double(const idfd::Matrix&)>& f,
                                            idfd::Matrix x, double eps = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x.data()[i];
        x.data()[i] = keep + eps;
        const double up = f(x);
        x.data()[i] = keep - eps;
        const double down = f(x);
        x.data()[i] = keep;
        g[i] = (up - down) / (2.0 * eps);
    }
    return g;
}

inline std::vector<double> flatten(const idfd::EncoderParams& p) {
    std::vector<double> out;
    for (const auto& l : p.layers) {
        out.insert(out.end(), l.weight.data().begin(), l.weight.data().end());
        out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
    return out;
}

/// Writes `flat` back into the layers of `p`, in flatten() order.
inline idfd::EncoderParams unflatten(idfd::EncoderParams p, std::span<const double> flat) {
    std::size_t k = 0;
    for (auto& l : p.layers) {
        for (double& w : l.weight.data()) w = flat[k++];
        for (double& b : l.bias) b = flat[k++];
    }
    return p;
}

/// He-initialised layers with small random biases.
inline idfd::EncoderParams small_net(std::vector<std::size_t> dims, std::uint64_t seed) {
    idfd::SeededRng rng(seed);
    auto p = idfd::EncoderParams::he_init(dims, rng);
    for (auto& l : p.layers) {
        for (double& b : l.bias) b = 0.1 * rng.normal();
    }
    return p;
}

}  // namespace testing
