#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "idfd/clustering.hpp"
#include "idfd/linalg.hpp"
#include "idfd/matrix.hpp"
#include "idfd/rng.hpp"

namespace idfd {

/// Fully connected similarity graph with unnormalised Laplacian L = D - W.
struct SimilarityGraph {
    Matrix w;
    std::vector<double> degree;  ///< D_ii = sum_m W_im
    Matrix laplacian;

    std::size_t size() const noexcept { return w.rows(); }
};

/// W_ij = exp(v_i . v_j / tau) over the rows of `v`, which must be unit norm.
SimilarityGraph build_graph(const Matrix& v, double tau);

/// Wraps an arbitrary symmetric non-negative weight matrix.
SimilarityGraph graph_from_weights(const Matrix& w);

/// Tr(F^T L F).
double loss_sp(const SimilarityGraph& graph, const Matrix& f);
/// (1/2) sum_k sum_ij w_ij (f_ik - f_jk)^2, the same quantity as loss_sp.
double loss_sp_pairwise(const SimilarityGraph& graph, const Matrix& f);

/// sum_ij exp(cos(theta_ij) / tau) sin^2(theta_ij / 2) over the angles between
/// unit rows. Equals loss_sp(build_graph(v, tau), v) / 2.
double loss_sp_cosine_form(const Matrix& v, double tau);

/// (1/tau) sin(theta) (tau - 1 + cos(theta)) exp(cos(theta) / tau), the
/// derivative of one pair's cosine-form contribution (times 2) in its angle.
double dLsp_dtheta(double theta, double tau);

/// Eigenvectors of the k smallest Laplacian eigenvalues as columns (n x k).
struct SpectralEmbedding {
    Matrix embedding;
    std::vector<double> eigenvalues;
};
SpectralEmbedding spectral_embed(const SimilarityGraph& graph, std::size_t k);

/// k-means on the rows of the spectral embedding (not re-normalised).
Partition spectral_cluster(const SimilarityGraph& graph, std::size_t k, const SeededRng& rng,
                           const KMeansOptions& opts = {});
Partition spectral_cluster(const Matrix& v, double tau, std::size_t k, const SeededRng& rng,
                           const KMeansOptions& opts = {});

/// CSV dumps for inspection: W and L as square tables, eigenvalues one per line.
void write_matrix_csv(std::ostream& os, const Matrix& m);
void write_eigenvalues_csv(std::ostream& os, const std::vector<double>& values);

}  // namespace idfd
