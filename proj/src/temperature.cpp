#include "idfd/temperature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "idfd/errors.hpp"
#include "idfd/format.hpp"

namespace idfd {

namespace {

void require_tau(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw DomainError("tau must be a positive finite number");
    }
}

/// log sum_{m < count} exp((cos(2 pi m / count) - 1) / tau). Every term is at
/// most 1 and the m = 0 term is exactly 1, so no further shift is needed.
double log_circle_sum(std::size_t count, double tau) {
    std::vector<double> terms(count);
    const double step = 2.0 * std::numbers::pi / static_cast<double>(count);
    for (std::size_t m = 0; m < count; ++m) {
        terms[m] = std::exp((std::cos(step * static_cast<double>(m)) - 1.0) / tau);
    }
    return std::log(pairwise_sum(terms));
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double uniform_loss(std::size_t n, double tau) {
    require_tau(tau);
    if (n == 0) {
        throw DomainError("uniform_loss: n must be positive");
    }
    return log_circle_sum(n, tau);
}

double compact_loss(std::size_t n, std::size_t k, double tau) {
    require_tau(tau);
    if (n == 0 || k == 0 || k > n) {
        throw DomainError("compact_loss: needs 1 <= k <= n");
    }
    if (n % k != 0) {
        throw DivisibilityError("compact_loss: k=" + std::to_string(k) + " does not divide n=" +
                                std::to_string(n));
    }
    return std::log(static_cast<double>(n / k)) + log_circle_sum(k, tau);
}

double tau_gap(std::size_t n, std::size_t k, double tau) {
    if (n < 2) {
        throw DomainError("tau_gap: n must be at least 2");
    }
    const double u = uniform_loss(n, tau);
    const double c = compact_loss(n, k, tau);
    return std::abs(u - c) / u;
}

ConcentrationProfile concentration_profile(double tau, std::size_t grid) {
    require_tau(tau);
    if (grid < 2) {
        throw DomainError("concentration_profile: grid needs at least two points");
    }
    ConcentrationProfile p;
    p.tau = tau;
    p.theta.resize(grid);
    p.value.resize(grid);
    for (std::size_t i = 0; i < grid; ++i) {
        const double theta =
            2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(grid - 1);
        p.theta[i] = theta;
        p.value[i] = std::exp(std::cos(theta) / tau);
    }
    const auto [lo, hi] = std::minmax_element(p.value.begin(), p.value.end());
    p.flatness = *hi / *lo;
    return p;
}

std::vector<TemperatureRow> temperature_table(std::size_t n, std::size_t k,
                                              std::span<const double> taus) {
    std::vector<TemperatureRow> rows;
    rows.reserve(taus.size());
    for (double tau : taus) {
        const double u = uniform_loss(n, tau);
        const double c = compact_loss(n, k, tau);
        rows.push_back({tau, u, c, std::abs(u - c) / u});
    }
    return rows;
}

void write_temperature_csv(std::ostream& os, std::span<const TemperatureRow> rows) {
    os << "tau,L_uniform,L_compact,gap\n";
    for (const auto& r : rows) {
        os << format_double(r.tau) << ',' << format_double(r.uniform) << ','
           << format_double(r.compact) << ',' << format_double(r.gap) << '\n';
    }
}

void write_profile_csv(std::ostream& os, std::span<const ConcentrationProfile> profiles) {
    os << "tau,theta,value\n";
    for (const auto& p : profiles) {
        for (std::size_t i = 0; i < p.theta.size(); ++i) {
            os << format_double(p.tau) << ',' << format_double(p.theta[i]) << ','
               << format_double(p.value[i]) << '\n';
        }
    }
}

}  // namespace idfd
