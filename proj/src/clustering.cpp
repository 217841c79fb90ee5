#include "idfd/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "idfd/errors.hpp"

namespace idfd {

Partition::Partition(std::vector<std::size_t> assignments, std::size_t k)
    : assignments_(std::move(assignments)), k_(k) {
    if (assignments_.empty()) {
        throw EmptyInput("partition must cover at least one point");
    }
    for (std::size_t a : assignments_) {
        if (a >= k_) {
            throw IndexOutOfRange("cluster id " + std::to_string(a) + " not below k=" +
                                  std::to_string(k_));
        }
    }
}

Partition Partition::from_labels(std::span<const long long> labels) {
    std::map<long long, std::size_t> ids;
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (long long l : labels) {
        auto [it, inserted] = ids.try_emplace(l, ids.size());
        out.push_back(it->second);
    }
    return Partition(std::move(out), ids.size());
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::size_t nearest(std::span<const double> x, const Matrix& centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double d = squared_distance(x, centroids.row(c));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

Matrix kmeans_plus_plus(const Matrix& x, std::size_t k, SeededRng& rng) {
    const std::size_t n = x.rows();
    Matrix centroids(k, x.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::size_t pick = static_cast<std::size_t>(rng.below(n));
    for (std::size_t c = 0; c < k; ++c) {
        std::copy(x.row(pick).begin(), x.row(pick).end(), centroids.row(c).begin());
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(x.row(i), centroids.row(c)));
            total += d2[i];
        }
        if (c + 1 == k) break;
        if (total <= 0.0) {
            pick = static_cast<std::size_t>(rng.below(n));
            continue;
        }
        double target = rng.uniform() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= d2[i];
            if (target < 0.0) {
                pick = i;
                break;
            }
        }
    }
    return centroids;
}

/// Cluster means of `assign`. Empty clusters take the point farthest from its
/// own centroid (drawn from clusters with more than one member), which edits
/// `assign`.
Matrix update_centroids(const Matrix& x, std::vector<std::size_t>& assign, std::size_t k) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    for (;;) {
        Matrix sums(k, d);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = sums.row(assign[i]);
            auto src = x.row(i);
            for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
            ++count[assign[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] == 0) continue;
            for (double& v : sums.row(c)) v /= static_cast<double>(count[c]);
        }
        const auto empty = std::find(count.begin(), count.end(), std::size_t{0});
        if (empty == count.end()) {
            return sums;
        }
        std::size_t far = n;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (count[assign[i]] < 2) continue;
            const double dist = squared_distance(x.row(i), sums.row(assign[i]));
            if (dist > far_d) {
                far_d = dist;
                far = i;
            }
        }
        assign[far] = static_cast<std::size_t>(empty - count.begin());
    }
}

struct LloydRun {
    std::vector<std::size_t> assign;
    Matrix centroids;
    double inertia = 0.0;
    std::size_t iterations = 0;
    std::vector<double> trace;
};

LloydRun lloyd(const Matrix& x, std::size_t k, SeededRng rng, std::size_t max_iterations) {
    const std::size_t n = x.rows();
    LloydRun run;
    Matrix centroids = kmeans_plus_plus(x, k, rng);
    run.assign.resize(n);
    for (std::size_t i = 0; i < n; ++i) run.assign[i] = nearest(x.row(i), centroids);

    std::vector<std::size_t> next(n);
    for (;;) {
        run.centroids = update_centroids(x, run.assign, k);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += squared_distance(x.row(i), run.centroids.row(run.assign[i]));
        }
        run.trace.push_back(total);
        run.inertia = total;
        ++run.iterations;
        if (run.iterations >= max_iterations) break;
        for (std::size_t i = 0; i < n; ++i) next[i] = nearest(x.row(i), run.centroids);
        if (next == run.assign) break;
        run.assign = next;
    }
    return run;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, std::size_t k, const SeededRng& rng,
                    const KMeansOptions& opts) {
    if (x.rows() == 0 || k == 0) {
        throw EmptyInput("kmeans needs at least one point and one cluster");
    }
    if (k > x.rows()) {
        throw EmptyInput("kmeans: more clusters (" + std::to_string(k) + ") than points (" +
                         std::to_string(x.rows()) + ")");
    }
    const std::size_t restarts = std::max<std::size_t>(1, opts.restarts);
    const std::size_t cap = std::max<std::size_t>(1, opts.max_iterations);
    LloydRun best;
    bool have = false;
    for (std::size_t r = 0; r < restarts; ++r) {
        LloydRun run = lloyd(x, k, rng.derive(r), cap);
        if (!have || run.inertia < best.inertia) {
            best = std::move(run);
            have = true;
        }
    }
    KMeansResult out;
    out.partition = Partition(std::move(best.assign), k);
    out.centroids = std::move(best.centroids);
    out.inertia = best.inertia;
    out.iterations = best.iterations;
    out.inertia_trace = std::move(best.trace);
    return out;
}

double inertia(const Matrix& x, const Partition& p, const Matrix& centroids) {
    if (p.size() != x.rows()) {
        throw LengthMismatch("inertia: partition length differs from point count");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        total += squared_distance(x.row(i), centroids.row(p[i]));
    }
    return total;
}

std::vector<std::vector<std::size_t>> contingency(const Partition& a, const Partition& b) {
    if (a.size() != b.size()) {
        throw LengthMismatch("partitions have different lengths (" + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()) + ")");
    }
    std::vector<std::vector<std::size_t>> table(a.k(), std::vector<std::size_t>(b.k(), 0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++table[a[i]][b[i]];
    }
    return table;
}

std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    if (n == 0) return {};
    const std::size_t m = cost.front().size();
    if (m < n) {
        throw ShapeMismatch("hungarian: needs at least as many columns as rows");
    }
    // Potentials formulation, 1-based with a sentinel column 0.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

double acc(const Partition& truth, const Partition& predicted) {
    const auto table = contingency(predicted, truth);
    const std::size_t k = std::max(predicted.k(), truth.k());
    std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < predicted.k(); ++i) {
        for (std::size_t j = 0; j < truth.k(); ++j) {
            cost[i][j] = -static_cast<double>(table[i][j]);
        }
    }
    const auto match = hungarian(cost);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.k(); ++i) {
        if (match[i] < truth.k()) hits += table[i][match[i]];
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

namespace {

double entropy(std::span<const std::size_t> counts, double n) {
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h;
}

bool is_bijection(const std::vector<std::vector<std::size_t>>& table) {
    std::vector<std::size_t> per_col(table.empty() ? 0 : table.front().size(), 0);
    for (const auto& row : table) {
        std::size_t nz = 0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] != 0) {
                ++nz;
                ++per_col[j];
            }
        }
        if (nz > 1) return false;
    }
    return std::all_of(per_col.begin(), per_col.end(), [](std::size_t c) { return c <= 1; });
}

}  // namespace

double nmi(const Partition& a, const Partition& b) {
    const auto table = contingency(a, b);
    if (is_bijection(table)) {
        return 1.0;
    }
    const double n = static_cast<double>(a.size());
    std::vector<std::size_t> ra(a.k(), 0), rb(b.k(), 0);
    for (std::size_t i = 0; i < a.k(); ++i) {
        for (std::size_t j = 0; j < b.k(); ++j) {
            ra[i] += table[i][j];
            rb[j] += table[i][j];
        }
    }
    // Terms are summed in sorted order so that nmi(a, b) == nmi(b, a) bit for bit.
    std::vector<double> terms;
    for (std::size_t i = 0; i < a.k(); ++i) {
        for (std::size_t j = 0; j < b.k(); ++j) {
            const std::size_t c = table[i][j];
            if (c == 0) continue;
            const double cd = static_cast<double>(c);
            terms.push_back(cd / n *
                            std::log(n * cd / (static_cast<double>(ra[i]) * static_cast<double>(rb[j]))));
        }
    }
    std::sort(terms.begin(), terms.end());
    double mi = 0.0;
    for (double t : terms) mi += t;
    const double ha = entropy(ra, n);
    const double hb = entropy(rb, n);
    const double denom = 0.5 * (ha + hb);
    if (denom <= 0.0) {
        return 1.0;
    }
    return std::clamp(mi / denom, 0.0, 1.0);
}

double ari(const Partition& a, const Partition& b) {
    const auto table = contingency(a, b);
    auto comb2 = [](std::size_t x) -> unsigned long long {
        return static_cast<unsigned long long>(x) * (x > 0 ? x - 1 : 0) / 2;
    };
    std::vector<std::size_t> ra(a.k(), 0), rb(b.k(), 0);
    unsigned long long index = 0;
    for (std::size_t i = 0; i < a.k(); ++i) {
        for (std::size_t j = 0; j < b.k(); ++j) {
            index += comb2(table[i][j]);
            ra[i] += table[i][j];
            rb[j] += table[i][j];
        }
    }
    unsigned long long sa = 0, sb = 0;
    for (std::size_t x : ra) sa += comb2(x);
    for (std::size_t x : rb) sb += comb2(x);
    // Pair-confusion form keeps small cases exact.
    const double tp = static_cast<double>(index);
    const double fp = static_cast<double>(sb - index);
    const double fn = static_cast<double>(sa - index);
    const double tn = static_cast<double>(comb2(a.size()) - sa - sb + index);
    if (fn == 0.0 && fp == 0.0) {
        return 1.0;
    }
    return 2.0 * (tp * tn - fn * fp) / ((tp + fn) * (fn + tn) + (tp + fp) * (fp + tn));
}

ClusterScores score(const Partition& truth, const Partition& predicted) {
    return {acc(truth, predicted), nmi(truth, predicted), ari(truth, predicted)};
}

CorrelationReport feature_correlation(const Matrix& v) {
    const std::size_t n = v.rows();
    const std::size_t d = v.cols();
    if (n < 2) {
        throw EmptyInput("feature_correlation needs at least two rows");
    }
    std::vector<double> mean(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) mean[c] += v(r, c);
    }
    for (double& m : mean) m /= static_cast<double>(n);
    Matrix centered(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) centered(r, c) = v(r, c) - mean[c];
    }
    std::vector<double> sd(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) ss += centered(r, c) * centered(r, c);
        sd[c] = std::sqrt(ss);
    }
    CorrelationReport out{Matrix::identity(d), 0};
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t l = j + 1; l < d; ++l) {
            double r = 0.0;
            if (sd[j] <= 1e-12 || sd[l] <= 1e-12) {
                out.undefined_entries += 2;
            } else {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += centered(i, j) * centered(i, l);
                r = std::clamp(s / (sd[j] * sd[l]), -1.0, 1.0);
            }
            out.correlation(j, l) = r;
            out.correlation(l, j) = r;
        }
    }
    return out;
}

double mean_abs_offdiagonal(const Matrix& correlation) {
    const std::size_t d = correlation.rows();
    if (d < 2) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t l = 0; l < d; ++l) {
            if (j != l) s += std::abs(correlation(j, l));
        }
    }
    return s / static_cast<double>(d * (d - 1));
}

}  // namespace idfd
