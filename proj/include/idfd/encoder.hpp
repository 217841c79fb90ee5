#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "idfd/matrix.hpp"
#include "idfd/rng.hpp"

namespace idfd {

/// Fully connected layer computing y = x W + b. `weight` is in x out.
struct DenseLayer {
    Matrix weight;
    std::vector<double> bias;

    std::size_t in_dim() const noexcept { return weight.rows(); }
    std::size_t out_dim() const noexcept { return weight.cols(); }
    bool operator==(const DenseLayer&) const = default;
};

/// Feed-forward encoder: dense layers with rectifiers between them, no
/// activation after the last layer, then row-wise L2 normalisation.
struct EncoderParams {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const noexcept { return layers.empty() ? 0 : layers.front().in_dim(); }
    std::size_t output_dim() const noexcept { return layers.empty() ? 0 : layers.back().out_dim(); }
    std::size_t parameter_count() const noexcept;

    /// Same shapes, every entry zero. Used for gradients and velocities.
    EncoderParams zeros_like() const;

    /// He-normal weights, zero biases. `dims` lists input, hidden..., output.
    static EncoderParams he_init(std::span<const std::size_t> dims, SeededRng& rng);

    bool operator==(const EncoderParams&) const = default;
};

/// Throws ShapeMismatch if consecutive layer dimensions do not chain.
void validate(const EncoderParams& params);

struct ForwardCache {
    std::vector<Matrix> inputs;          ///< input to each layer
    std::vector<Matrix> pre_activations; ///< x W + b of each layer
    Matrix output;                       ///< normalised rows
    std::vector<double> output_norms;    ///< row norms before normalisation
};

struct ForwardResult {
    Matrix v;
    ForwardCache cache;
};

ForwardResult forward(const EncoderParams& params, const Matrix& x);

/// Reverse mode of `forward` for a cotangent on the normalised outputs.
EncoderParams backward(const EncoderParams& params, const ForwardCache& cache,
                       const Matrix& grad_v);

struct MomentumStep {
    EncoderParams params;
    EncoderParams velocity;
};

/// velocity' = beta * velocity + grads; params' = params - lr * velocity'.
MomentumStep sgd_momentum_step(const EncoderParams& params, const EncoderParams& grads,
                               const EncoderParams& velocity, double lr, double beta);

}  // namespace idfd
