#include "idfd/encoder.hpp"

#include <cmath>
#include <string>

#include "idfd/errors.hpp"
#include "idfd/linalg.hpp"

namespace idfd {

std::size_t EncoderParams::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers) {
        n += l.weight.size() + l.bias.size();
    }
    return n;
}

EncoderParams EncoderParams::zeros_like() const {
    EncoderParams z;
    z.layers.reserve(layers.size());
    for (const auto& l : layers) {
        z.layers.push_back({Matrix(l.in_dim(), l.out_dim()), std::vector<double>(l.out_dim(), 0.0)});
    }
    return z;
}

EncoderParams EncoderParams::he_init(std::span<const std::size_t> dims, SeededRng& rng) {
    if (dims.size() < 2) {
        throw ShapeMismatch("encoder needs at least an input and an output dimension");
    }
    EncoderParams p;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        if (dims[i] == 0 || dims[i + 1] == 0) {
            throw ShapeMismatch("encoder layer dimensions must be positive");
        }
        DenseLayer layer{Matrix(dims[i], dims[i + 1]), std::vector<double>(dims[i + 1], 0.0)};
        const double scale = std::sqrt(2.0 / static_cast<double>(dims[i]));
        for (double& w : layer.weight.data()) {
            w = scale * rng.normal();
        }
        p.layers.push_back(std::move(layer));
    }
    return p;
}

void validate(const EncoderParams& params) {
    if (params.layers.empty()) {
        throw ShapeMismatch("encoder has no layers");
    }
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const auto& l = params.layers[i];
        if (l.bias.size() != l.out_dim()) {
            throw ShapeMismatch("layer " + std::to_string(i) + ": bias length differs from width");
        }
        if (i > 0 && params.layers[i - 1].out_dim() != l.in_dim()) {
            throw ShapeMismatch("layer " + std::to_string(i) + ": input width does not chain");
        }
    }
}

ForwardResult forward(const EncoderParams& params, const Matrix& x) {
    validate(params);
    if (x.cols() != params.input_dim()) {
        throw ShapeMismatch("forward: input has " + std::to_string(x.cols()) +
                            " features, encoder expects " + std::to_string(params.input_dim()));
    }
    ForwardCache cache;
    Matrix a = x;
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const auto& layer = params.layers[i];
        Matrix z = matmul(a, layer.weight);
        for (std::size_t r = 0; r < z.rows(); ++r) {
            auto row = z.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) row[c] += layer.bias[c];
        }
        cache.inputs.push_back(std::move(a));
        a = z;
        if (i + 1 < params.layers.size()) {
            for (double& v : a.data()) v = v > 0.0 ? v : 0.0;
        }
        cache.pre_activations.push_back(std::move(z));
    }
    cache.output_norms.resize(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        cache.output_norms[r] = norm(a.row(r));
    }
    cache.output = l2_normalize_rows(a);
    Matrix v = cache.output;
    return {std::move(v), std::move(cache)};
}

EncoderParams backward(const EncoderParams& params, const ForwardCache& cache,
                       const Matrix& grad_v) {
    if (grad_v.rows() != cache.output.rows() || grad_v.cols() != cache.output.cols() ||
        cache.inputs.size() != params.layers.size()) {
        throw ShapeMismatch("backward: cotangent or cache does not match the forward pass");
    }
    // Through the normalisation: (I - v v^T) g / ||h||.
    Matrix delta(grad_v.rows(), grad_v.cols());
    for (std::size_t r = 0; r < grad_v.rows(); ++r) {
        const auto v = cache.output.row(r);
        const auto g = grad_v.row(r);
        const double proj = dot(v, g);
        auto out = delta.row(r);
        for (std::size_t c = 0; c < out.size(); ++c) {
            out[c] = (g[c] - v[c] * proj) / cache.output_norms[r];
        }
    }

    EncoderParams grads = params.zeros_like();
    for (std::size_t i = params.layers.size(); i-- > 0;) {
        if (i + 1 < params.layers.size()) {
            const Matrix& z = cache.pre_activations[i];
            for (std::size_t k = 0; k < delta.size(); ++k) {
                if (!(z.data()[k] > 0.0)) delta.data()[k] = 0.0;
            }
        }
        grads.layers[i].weight = matmul_tn(cache.inputs[i], delta);
        auto& db = grads.layers[i].bias;
        for (std::size_t r = 0; r < delta.rows(); ++r) {
            const auto row = delta.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) db[c] += row[c];
        }
        if (i > 0) {
            delta = matmul_nt(delta, params.layers[i].weight);
        }
    }
    return grads;
}

MomentumStep sgd_momentum_step(const EncoderParams& params, const EncoderParams& grads,
                               const EncoderParams& velocity, double lr, double beta) {
    if (grads.layers.size() != params.layers.size() ||
        velocity.layers.size() != params.layers.size()) {
        throw ShapeMismatch("sgd_momentum_step: parameter structures differ");
    }
    MomentumStep out{params, velocity};
    auto step = [&](std::span<double> p, std::span<const double> g, std::span<double> v) {
        if (p.size() != g.size() || p.size() != v.size()) {
            throw ShapeMismatch("sgd_momentum_step: tensor sizes differ");
        }
        for (std::size_t k = 0; k < p.size(); ++k) {
            v[k] = beta * v[k] + g[k];
            p[k] -= lr * v[k];
        }
    };
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        step(out.params.layers[i].weight.data(), grads.layers[i].weight.data(),
             out.velocity.layers[i].weight.data());
        step(out.params.layers[i].bias, grads.layers[i].bias, out.velocity.layers[i].bias);
    }
    return out;
}

}  // namespace idfd
