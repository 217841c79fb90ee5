#include "idfd/memory_bank.hpp"

#include <cmath>
#include <string>

#include "idfd/errors.hpp"
#include "idfd/linalg.hpp"

namespace idfd {

MemoryBank::MemoryBank(Matrix vectors, double momentum)
    : vectors_(std::move(vectors)), momentum_(momentum) {
    if (!(momentum >= 0.0 && momentum <= 1.0)) {
        throw DomainError("bank momentum must lie in [0, 1]");
    }
    // Rows already unit within tolerance are kept verbatim so that a stored
    // bank reloads bit for bit.
    for (std::size_t r = 0; r < vectors_.rows(); ++r) {
        const double n = norm(vectors_.row(r));
        if (n < kZeroNormTolerance) {
            throw ZeroRow("bank row " + std::to_string(r) + " has zero norm");
        }
        if (std::abs(n - 1.0) > 1e-12) {
            for (double& x : vectors_.row(r)) x /= n;
        }
    }
}

MemoryBank MemoryBank::random(std::size_t n, std::size_t dim, double momentum, SeededRng& rng) {
    Matrix m(n, dim);
    for (double& x : m.data()) {
        x = rng.normal();
    }
    return MemoryBank(std::move(m), momentum);
}

void MemoryBank::update(std::span<const std::size_t> indices, const Matrix& batch) {
    if (batch.rows() != indices.size() || batch.cols() != dim()) {
        throw ShapeMismatch("bank update: batch shape does not match indices/bank width");
    }
    for (std::size_t b = 0; b < indices.size(); ++b) {
        if (indices[b] >= size()) {
            throw IndexOutOfRange("bank update: index " + std::to_string(indices[b]) +
                                  " outside bank of size " + std::to_string(size()));
        }
    }
    if (momentum_ == 1.0) return;
    for (std::size_t b = 0; b < indices.size(); ++b) {
        auto dst = vectors_.row(indices[b]);
        auto src = batch.row(b);
        double ss = 0.0;
        for (std::size_t c = 0; c < dst.size(); ++c) {
            dst[c] = momentum_ * dst[c] + (1.0 - momentum_) * src[c];
            ss += dst[c] * dst[c];
        }
        const double n = std::sqrt(ss);
        if (n < kZeroNormTolerance) {
            throw ZeroRow("bank update cancelled row " + std::to_string(indices[b]));
        }
        for (double& x : dst) {
            x /= n;
        }
    }
}

MemoryBank bank_update(const MemoryBank& bank, std::span<const std::size_t> indices,
                       const Matrix& batch) {
    MemoryBank out = bank;
    out.update(indices, batch);
    return out;
}

}  // namespace idfd
