#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "idfd/rng.hpp"

namespace idfd {

/// Height x width x channels, stored HWC row-major. Plain feature vectors use
/// {1, p, 1}.
struct SampleShape {
    std::size_t height = 1;
    std::size_t width = 1;
    std::size_t channels = 1;

    std::size_t size() const noexcept { return height * width * channels; }
    bool operator==(const SampleShape&) const = default;
};

struct HorizontalFlip {
    double probability = 0.5;
};
/// Zero-pad by `padding` on every side, then crop back at a random offset.
struct RandomCrop {
    std::size_t padding = 0;
};
/// Multiplies every value by 1 + U(-amplitude, amplitude).
struct ColorJitter {
    double amplitude = 0.0;
};
/// Replaces every pixel's channels by their mean.
struct RandomGrayscale {
    double probability = 0.0;
};
/// Adds sigma * N(0, 1) to every value.
struct GaussianNoise {
    double sigma = 0.0;
};

using Transform = std::variant<HorizontalFlip, RandomCrop, ColorJitter, RandomGrayscale, GaussianNoise>;

struct AugmentationSpec {
    SampleShape shape;
    std::vector<Transform> transforms;  ///< applied in order
};

/// Throws DomainError if a parameter lies outside its range.
void validate(const AugmentationSpec& spec);

/// Applies the transforms in order. Every transform consumes the same number
/// of draws whether or not it fires, so streams stay aligned across specs
/// that differ only in parameters.
std::vector<double> augment(std::span<const double> sample, const AugmentationSpec& spec,
                            SeededRng& rng);

std::string describe(const Transform& t);

}  // namespace idfd
