#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "idfd/matrix.hpp"
#include "idfd/rng.hpp"

namespace idfd {

/// Hard cluster assignment: every id lies in [0, k).
class Partition {
public:
    Partition() = default;
    Partition(std::vector<std::size_t> assignments, std::size_t k);

    /// Relabels arbitrary integer labels to 0..k-1 in order of first appearance.
    static Partition from_labels(std::span<const long long> labels);

    std::size_t size() const noexcept { return assignments_.size(); }
    std::size_t k() const noexcept { return k_; }
    std::size_t operator[](std::size_t i) const noexcept { return assignments_[i]; }
    const std::vector<std::size_t>& assignments() const noexcept { return assignments_; }

    bool operator==(const Partition&) const = default;

private:
    std::vector<std::size_t> assignments_;
    std::size_t k_ = 0;
};

struct KMeansOptions {
    std::size_t restarts = 10;
    std::size_t max_iterations = 300;
};

struct KMeansResult {
    Partition partition;
    Matrix centroids;  ///< k x d
    double inertia = 0.0;
    std::size_t iterations = 0;
    /// Inertia after every Lloyd iteration of the winning restart.
    std::vector<double> inertia_trace;
};

/// Lloyd's algorithm from k-means++ seeds; best inertia over the restarts.
/// Each restart draws from rng.derive(restart), so the result does not depend
/// on the order restarts are evaluated in.
KMeansResult kmeans(const Matrix& x, std::size_t k, const SeededRng& rng,
                    const KMeansOptions& opts = {});

/// Sum of squared distances from each row to its assigned centroid.
double inertia(const Matrix& x, const Partition& p, const Matrix& centroids);

/// Contingency counts: rows index `a` clusters, columns index `b` clusters.
std::vector<std::vector<std::size_t>> contingency(const Partition& a, const Partition& b);

/// Minimum-cost perfect assignment on a rectangular cost matrix
/// (rows <= cols). Returns the column chosen for each row.
std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost);

/// Best-bijection matching accuracy.
double acc(const Partition& truth, const Partition& predicted);
/// Mutual information over the arithmetic mean of the two entropies.
double nmi(const Partition& a, const Partition& b);
/// Adjusted Rand index.
double ari(const Partition& a, const Partition& b);

struct ClusterScores {
    double acc = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
    bool operator==(const ClusterScores&) const = default;
};
ClusterScores score(const Partition& truth, const Partition& predicted);

struct CorrelationReport {
    Matrix correlation;  ///< d x d Pearson matrix, unit diagonal
    /// Off-diagonal entries left at 0 because a column had zero variance.
    std::size_t undefined_entries = 0;
};

/// Pearson correlation between the columns of `v`.
CorrelationReport feature_correlation(const Matrix& v);

/// Mean |r_jl| over j != l.
double mean_abs_offdiagonal(const Matrix& correlation);

}  // namespace idfd
