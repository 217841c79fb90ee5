#include "idfd/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "idfd/errors.hpp"
#include "idfd/format.hpp"

namespace idfd {

namespace {

void fill_laplacian(SimilarityGraph& g) {
    const std::size_t n = g.w.rows();
    g.degree.assign(n, 0.0);
    g.laplacian = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t m = 0; m < n; ++m) deg += g.w(i, m);
        g.degree[i] = deg;
        for (std::size_t j = 0; j < n; ++j) {
            g.laplacian(i, j) = (i == j ? deg : 0.0) - g.w(i, j);
        }
    }
}

}  // namespace

SimilarityGraph build_graph(const Matrix& v, double tau) {
    if (!(tau > 0.0)) {
        throw DomainError("build_graph: tau must be positive");
    }
    const std::size_t n = v.rows();
    SimilarityGraph g;
    g.w = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double s = std::exp(dot(v.row(i), v.row(j)) / tau);
            g.w(i, j) = s;
            g.w(j, i) = s;
        }
    }
    fill_laplacian(g);
    return g;
}

SimilarityGraph graph_from_weights(const Matrix& w) {
    if (w.rows() != w.cols()) {
        throw ShapeMismatch("graph_from_weights: weight matrix is not square");
    }
    for (std::size_t i = 0; i < w.rows(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) {
            if (w(i, j) < 0.0) throw DomainError("graph weights must be non-negative");
            if (w(i, j) != w(j, i)) throw NotSymmetric("graph weights must be symmetric");
        }
    }
    SimilarityGraph g;
    g.w = w;
    fill_laplacian(g);
    return g;
}

double loss_sp(const SimilarityGraph& graph, const Matrix& f) {
    if (f.rows() != graph.size()) {
        throw ShapeMismatch("loss_sp: F must have one row per graph node");
    }
    const Matrix lf = matmul(graph.laplacian, f);
    double trace = 0.0;
    for (std::size_t i = 0; i < f.rows(); ++i) {
        trace += dot(f.row(i), lf.row(i));
    }
    return trace;
}

double loss_sp_pairwise(const SimilarityGraph& graph, const Matrix& f) {
    if (f.rows() != graph.size()) {
        throw ShapeMismatch("loss_sp_pairwise: F must have one row per graph node");
    }
    const std::size_t n = f.rows();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t k = 0; k < f.cols(); ++k) {
                const double d = f(i, k) - f(j, k);
                sq += d * d;
            }
            total += graph.w(i, j) * sq;
        }
    }
    return 0.5 * total;
}

double loss_sp_cosine_form(const Matrix& v, double tau) {
    if (!(tau > 0.0)) {
        throw DomainError("loss_sp_cosine_form: tau must be positive");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < v.rows(); ++i) {
        for (std::size_t j = 0; j < v.rows(); ++j) {
            const double c = std::clamp(dot(v.row(i), v.row(j)), -1.0, 1.0);
            const double half = std::sin(0.5 * std::acos(c));
            total += std::exp(c / tau) * half * half;
        }
    }
    return total;
}

double dLsp_dtheta(double theta, double tau) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi) || !(tau > 0.0)) {
        throw DomainError("dLsp_dtheta: needs theta in [0, pi] and tau > 0");
    }
    const double c = std::cos(theta);
    return std::sin(theta) * (tau - 1.0 + c) * std::exp(c / tau) / tau;
}

SpectralEmbedding spectral_embed(const SimilarityGraph& graph, std::size_t k) {
    if (k == 0 || k >= graph.size()) {
        throw ShapeMismatch("spectral_embed: k must lie in [1, n)");
    }
    EigenResult eig = symmetric_eigen(graph.laplacian, k);
    return {std::move(eig.vectors), std::move(eig.values)};
}

Partition spectral_cluster(const SimilarityGraph& graph, std::size_t k, const SeededRng& rng,
                           const KMeansOptions& opts) {
    if (k == 1) {
        return Partition(std::vector<std::size_t>(graph.size(), 0), 1);
    }
    const SpectralEmbedding e = spectral_embed(graph, k);
    return kmeans(e.embedding, k, rng, opts).partition;
}

Partition spectral_cluster(const Matrix& v, double tau, std::size_t k, const SeededRng& rng,
                           const KMeansOptions& opts) {
    return spectral_cluster(build_graph(v, tau), k, rng, opts);
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) os << ',';
            os << format_double(m(r, c));
        }
        os << '\n';
    }
}

void write_eigenvalues_csv(std::ostream& os, const std::vector<double>& values) {
    os << "index,eigenvalue\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        os << i << ',' << format_double(values[i]) << '\n';
    }
}

}  // namespace idfd
