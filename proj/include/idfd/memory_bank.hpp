#pragma once

#include <cstddef>
#include <span>

#include "idfd/matrix.hpp"
#include "idfd/rng.hpp"

namespace idfd {

/// One unit-norm representation per dataset instance.
///
/// Rows are updated by momentum blending followed by renormalisation:
///   row_i <- normalize(m * row_i + (1 - m) * v_i)
class MemoryBank {
public:
    MemoryBank() = default;
    /// Takes ownership of the rows and normalises any that are not unit norm.
    MemoryBank(Matrix vectors, double momentum);

    /// Isotropic Gaussian rows, normalised.
    static MemoryBank random(std::size_t n, std::size_t dim, double momentum, SeededRng& rng);

    std::size_t size() const noexcept { return vectors_.rows(); }
    std::size_t dim() const noexcept { return vectors_.cols(); }
    double momentum() const noexcept { return momentum_; }
    const Matrix& vectors() const noexcept { return vectors_; }
    std::span<const double> row(std::size_t i) const noexcept { return vectors_.row(i); }

    /// Blends batch row b into slot indices[b] for every b. Rows of
    /// `batch` must be unit norm.
    void update(std::span<const std::size_t> indices, const Matrix& batch);

    bool operator==(const MemoryBank&) const = default;

private:
    Matrix vectors_;
    double momentum_ = 0.5;
};

/// Functional form of MemoryBank::update.
MemoryBank bank_update(const MemoryBank& bank, std::span<const std::size_t> indices,
                       const Matrix& batch);

}  // namespace idfd
