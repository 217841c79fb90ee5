#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace idfd {

/// n unit vectors on a circle, optionally collapsed onto k equally spaced
/// cluster points (n / k per point).
struct ToyModelConfig {
    std::size_t n = 2;
    std::size_t k = 1;
    double tau = 1.0;
};

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

/// Per-sample instance loss when n points are spread uniformly on the circle:
/// -log[ exp(1/tau) / sum_m exp(cos(2 pi m / n) / tau) ].
double uniform_loss(std::size_t n, double tau);

/// Per-sample instance loss when the n points sit on k equally spaced
/// cluster points: -log[ (1/n) exp(1/tau) / ((1/k) sum_c exp(cos(2 pi c / k) / tau)) ].
/// Throws DivisibilityError unless k divides n.
double compact_loss(std::size_t n, std::size_t k, double tau);

inline double uniform_loss(const ToyModelConfig& cfg) { return uniform_loss(cfg.n, cfg.tau); }
inline double compact_loss(const ToyModelConfig& cfg) { return compact_loss(cfg.n, cfg.k, cfg.tau); }

/// |L_uniform - L_compact| / L_uniform.
double tau_gap(std::size_t n, std::size_t k, double tau);

struct ConcentrationProfile {
    double tau = 1.0;
    std::vector<double> theta;  ///< grid on [0, 2 pi], endpoints included
    std::vector<double> value;  ///< exp(cos(theta) / tau)
    double flatness = 1.0;      ///< max / min of value
};

ConcentrationProfile concentration_profile(double tau, std::size_t grid);

struct TemperatureRow {
    double tau = 0.0;
    double uniform = 0.0;
    double compact = 0.0;
    double gap = 0.0;
};

std::vector<TemperatureRow> temperature_table(std::size_t n, std::size_t k,
                                              std::span<const double> taus);

/// Header: tau,L_uniform,L_compact,gap
void write_temperature_csv(std::ostream& os, std::span<const TemperatureRow> rows);
/// Header: tau,theta,value
void write_profile_csv(std::ostream& os, std::span<const ConcentrationProfile> profiles);

}  // namespace idfd
