#include "idfd/augment.hpp"

#include <algorithm>
#include <sstream>

#include "idfd/errors.hpp"

namespace idfd {

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void require_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError(std::string(name) + " probability must lie in [0, 1]");
    }
}

std::size_t at(const SampleShape& s, std::size_t y, std::size_t x, std::size_t c) {
    return (y * s.width + x) * s.channels + c;
}

}  // namespace

void validate(const AugmentationSpec& spec) {
    for (const auto& t : spec.transforms) {
        std::visit(overloaded{
                       [](const HorizontalFlip& f) { require_probability(f.probability, "flip"); },
                       [&](const RandomCrop& c) {
                           if (c.padding > std::max(spec.shape.height, spec.shape.width)) {
                               throw DomainError("crop padding exceeds the sample size");
                           }
                       },
                       [](const ColorJitter& j) {
                           if (!(j.amplitude >= 0.0 && j.amplitude < 1.0)) {
                               throw DomainError("jitter amplitude must lie in [0, 1)");
                           }
                       },
                       [](const RandomGrayscale& g) {
                           require_probability(g.probability, "grayscale");
                       },
                       [](const GaussianNoise& n) {
                           if (!(n.sigma >= 0.0)) {
                               throw DomainError("noise sigma must be non-negative");
                           }
                       },
                   },
                   t);
    }
}

std::vector<double> augment(std::span<const double> sample, const AugmentationSpec& spec,
                            SeededRng& rng) {
    const SampleShape& s = spec.shape;
    if (sample.size() != s.size()) {
        throw ShapeMismatch("augment: sample has " + std::to_string(sample.size()) +
                            " values, spec expects " + std::to_string(s.size()));
    }
    std::vector<double> x(sample.begin(), sample.end());
    std::vector<double> tmp(x.size());

    for (const auto& t : spec.transforms) {
        std::visit(
            overloaded{
                [&](const HorizontalFlip& f) {
                    if (!rng.bernoulli(f.probability)) return;
                    for (std::size_t y = 0; y < s.height; ++y)
                        for (std::size_t xx = 0; xx < s.width; ++xx)
                            for (std::size_t c = 0; c < s.channels; ++c)
                                tmp[at(s, y, s.width - 1 - xx, c)] = x[at(s, y, xx, c)];
                    x.swap(tmp);
                },
                [&](const RandomCrop& crop) {
                    const std::size_t span = 2 * crop.padding + 1;
                    const auto oy = static_cast<std::ptrdiff_t>(rng.below(span)) -
                                    static_cast<std::ptrdiff_t>(crop.padding);
                    const auto ox = static_cast<std::ptrdiff_t>(rng.below(span)) -
                                    static_cast<std::ptrdiff_t>(crop.padding);
                    if (oy == 0 && ox == 0) return;
                    const auto h = static_cast<std::ptrdiff_t>(s.height);
                    const auto w = static_cast<std::ptrdiff_t>(s.width);
                    for (std::ptrdiff_t y = 0; y < h; ++y) {
                        for (std::ptrdiff_t xx = 0; xx < w; ++xx) {
                            const std::ptrdiff_t sy = y + oy;
                            const std::ptrdiff_t sx = xx + ox;
                            const bool inside = sy >= 0 && sy < h && sx >= 0 && sx < w;
                            for (std::size_t c = 0; c < s.channels; ++c) {
                                tmp[at(s, y, xx, c)] =
                                    inside ? x[at(s, static_cast<std::size_t>(sy),
                                                  static_cast<std::size_t>(sx), c)]
                                           : 0.0;
                            }
                        }
                    }
                    x.swap(tmp);
                },
                [&](const ColorJitter& j) {
                    const double factor = 1.0 + j.amplitude * (2.0 * rng.uniform() - 1.0);
                    if (j.amplitude == 0.0) return;
                    for (double& v : x) v *= factor;
                },
                [&](const RandomGrayscale& g) {
                    if (!rng.bernoulli(g.probability) || s.channels < 2) return;
                    for (std::size_t p = 0; p < s.height * s.width; ++p) {
                        double mean = 0.0;
                        for (std::size_t c = 0; c < s.channels; ++c) mean += x[p * s.channels + c];
                        mean /= static_cast<double>(s.channels);
                        for (std::size_t c = 0; c < s.channels; ++c) x[p * s.channels + c] = mean;
                    }
                },
                [&](const GaussianNoise& n) {
                    for (double& v : x) {
                        const double z = rng.normal();
                        if (n.sigma != 0.0) v += n.sigma * z;
                    }
                },
            },
            t);
    }
    return x;
}

std::string describe(const Transform& t) {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const HorizontalFlip& f) { os << "flip(p=" << f.probability << ")"; },
                   [&](const RandomCrop& c) { os << "crop(pad=" << c.padding << ")"; },
                   [&](const ColorJitter& j) { os << "jitter(a=" << j.amplitude << ")"; },
                   [&](const RandomGrayscale& g) { os << "grayscale(p=" << g.probability << ")"; },
                   [&](const GaussianNoise& n) { os << "noise(sigma=" << n.sigma << ")"; },
               },
               t);
    return os.str();
}

}  // namespace idfd
