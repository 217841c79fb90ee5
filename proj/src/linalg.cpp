#include "idfd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "idfd/errors.hpp"

namespace idfd {

Matrix l2_normalize_rows(const Matrix& m) {
    Matrix out = m;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double n = norm(m.row(r));
        if (n < kZeroNormTolerance) {
            throw ZeroRow("row " + std::to_string(r) + " has zero norm");
        }
        for (double& x : out.row(r)) {
            x /= n;
        }
    }
    return out;
}

Matrix l2_normalize_columns(const Matrix& m) {
    Matrix out = m;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double ss = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            ss += m(r, c) * m(r, c);
        }
        const double n = std::sqrt(ss);
        if (n < kZeroNormTolerance) {
            throw DegenerateFeature("feature column " + std::to_string(c) + " is all zero");
        }
        for (std::size_t r = 0; r < m.rows(); ++r) {
            out(r, c) /= n;
        }
    }
    return out;
}

Matrix gram(const Matrix& m) {
    const std::size_t n = m.rows();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = dot(m.row(i), m.row(j));
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

EigenResult symmetric_eigen(const Matrix& m, std::size_t k, const JacobiOptions& opts) {
    const std::size_t n = m.rows();
    if (m.cols() != n) {
        throw ShapeMismatch("symmetric_eigen: matrix is not square");
    }
    if (k > n) {
        throw ShapeMismatch("symmetric_eigen: requested more eigenpairs than the dimension");
    }

    double scale = 1.0;
    for (double x : m.data()) {
        scale = std::max(scale, std::abs(x));
    }
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(m(i, j) - m(j, i)) > opts.symmetry_tolerance * scale) {
                throw NotSymmetric("symmetric_eigen: entries (" + std::to_string(i) + "," +
                                   std::to_string(j) + ") and their mirror differ");
            }
            a(i, j) = 0.5 * (m(i, j) + m(j, i));
        }
    }
    Matrix v = Matrix::identity(n);

    const double total = frobenius_norm(a);
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j) s += a(i, j) * a(i, j);
            }
        }
        return std::sqrt(s);
    };

    bool converged = false;
    for (int sweep = 0; sweep <= opts.max_sweeps; ++sweep) {
        const double off = off_norm();
        if (off <= opts.tolerance * total || off == 0.0) {
            converged = true;
            break;
        }
        if (sweep == opts.max_sweeps) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    const double np = c * arp - s * arq;
                    const double nq = s * arp + c * arq;
                    a(r, p) = np;
                    a(p, r) = np;
                    a(r, q) = nq;
                    a(q, r) = nq;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }
    if (!converged) {
        throw ConvergenceFailure("Jacobi eigensolver did not converge within " +
                                 std::to_string(opts.max_sweeps) + " sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    EigenResult out{std::vector<double>(k), Matrix(n, k)};
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t src = order[c];
        out.values[c] = a(src, src);
        for (std::size_t r = 0; r < n; ++r) {
            out.vectors(r, c) = v(r, src);
        }
    }
    return out;
}

}  // namespace idfd
