#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "idfd/clustering.hpp"
#include "idfd/errors.hpp"
#include "support.hpp"

using namespace idfd;

namespace {

Partition P(std::vector<long long> labels) { return Partition::from_labels(labels); }

Partition random_partition(std::size_t n, std::size_t k, SeededRng& rng) {
    std::vector<std::size_t> a(n);
    for (auto& x : a) x = rng.below(k);
    return Partition(a, k);
}

/// max over all bijections (injections when k differs) of matched fraction.
double brute_force_acc(const Partition& y, const Partition& p) {
    const std::size_t k = std::max(y.k(), p.k());
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t hit = 0;
        for (std::size_t i = 0; i < y.size(); ++i) hit += perm[p[i]] == y[i];
        best = std::max(best, hit);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(y.size());
}

/// Exhaustive k-partition minimising within-cluster squared distance.
double brute_force_inertia(const Matrix& x, std::size_t k) {
    const std::size_t n = x.rows();
    std::vector<std::size_t> a(n, 0);
    double best = INFINITY;
    for (;;) {
        std::vector<std::size_t> count(k, 0);
        for (auto c : a) ++count[c];
        if (std::all_of(count.begin(), count.end(), [](std::size_t c) { return c > 0; })) {
            Matrix cent(k, x.cols());
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t d = 0; d < x.cols(); ++d) cent(a[i], d) += x(i, d) / static_cast<double>(count[a[i]]);
            }
            best = std::min(best, inertia(x, Partition(a, k), cent));
        }
        std::size_t i = 0;
        while (i < n && ++a[i] == k) a[i++] = 0;
        if (i == n) break;
    }
    return best;
}

}  // namespace

TEST_CASE("partition validation and relabeling") {
    CHECK_THROWS_AS(Partition({0, 3}, 2), Error);
    CHECK_THROWS_AS(Partition({}, 1), Error);
    const auto p = P({7, 7, -1, 3, -1});
    CHECK(p.k() == 3);
    CHECK(p.assignments() == std::vector<std::size_t>{0, 0, 1, 2, 1});
}

TEST_CASE("acc examples") {
    CHECK(acc(P({0, 1, 1}), P({1, 0, 0})) == 1.0);
    CHECK(acc(P({0, 0, 1, 1}), P({0, 1, 0, 1})) == 0.5);
    CHECK(acc(P({0, 1, 2, 2}), P({0, 1, 2, 2})) == 1.0);
    CHECK_THROWS_AS(acc(P({0, 1}), P({0, 1, 1})), LengthMismatch);
}

TEST_CASE("acc matches brute force over all bijections for k <= 6") {
    SeededRng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 1 + trial % 6;
        const std::size_t n = 5 + rng.below(30);
        const auto y = random_partition(n, k, rng);
        const auto p = random_partition(n, 1 + rng.below(6), rng);
        if (y.k() != k || p.k() == 0) continue;
        CHECK(acc(y, p) == doctest::Approx(brute_force_acc(y, p)).epsilon(1e-15));
    }
}

TEST_CASE("acc is invariant under relabeling") {
    SeededRng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto y = random_partition(40, 5, rng);
        const auto p = random_partition(40, 5, rng);
        const auto perm = shuffled_indices(5, rng);
        std::vector<std::size_t> relabeled(40);
        for (std::size_t i = 0; i < 40; ++i) relabeled[i] = perm[p[i]];
        CHECK(acc(y, p) == acc(y, Partition(relabeled, 5)));
        CHECK(acc(y, p) == acc(p, y));
    }
}

TEST_CASE("hungarian solves small assignment problems exactly") {
    const std::vector<std::vector<double>> cost{{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
    const auto col = hungarian(cost);
    double total = 0.0;
    for (std::size_t r = 0; r < 3; ++r) total += cost[r][col[r]];
    CHECK(total == 5.0);
    const std::vector<std::vector<double>> wide{{1, 0, 3}, {2, 5, 0}};
    const auto w = hungarian(wide);
    CHECK(w[0] == 1);
    CHECK(w[1] == 2);
}

TEST_CASE("nmi examples") {
    CHECK(nmi(P({0, 0, 1, 1}), P({1, 1, 0, 0})) == 1.0);
    CHECK(nmi(P({0, 0, 1, 1}), P({0, 1, 0, 1})) == doctest::Approx(0.0));
    CHECK(std::abs(nmi(P({0, 0, 1, 1}), P({0, 1, 0, 1}))) <= 1e-15);

    // Contingency [[2,0],[1,1]], n = 4, by the defining sums.
    const double i = 0.5 * std::log(4.0 / 3.0) + 0.25 * std::log(2.0 / 3.0) + 0.25 * std::log(2.0);
    const double hy = std::log(2.0);
    const double hp = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
    CHECK(nmi(P({0, 0, 1, 1}), P({0, 0, 0, 1})) == doctest::Approx(i / ((hy + hp) / 2.0)).epsilon(1e-14));
}

TEST_CASE("ari examples") {
    CHECK(ari(P({0, 1, 1, 2}), P({5, 4, 4, 3})) == 1.0);
    CHECK(ari(P({0, 0, 1, 1}), P({0, 1, 0, 1})) == -0.5);
    CHECK(ari(P({0, 0, 1, 1, 2, 2}), P({0, 0, 0, 0, 0, 0})) == 0.0);
}

TEST_CASE("nmi and ari agree with reference fixtures") {
    struct Fixture {
        std::vector<long long> y, p;
        double nmi, ari;
    };
    // Reference values: arithmetic-mean NMI and ARI from scikit-learn 1.7.
    const std::vector<Fixture> fixtures{
        {{0, 0, 1, 1}, {0, 0, 0, 1}, 0.3437110184854508, 0.0},
        {{0, 0, 0, 1, 1, 1, 2, 2, 2}, {0, 0, 1, 1, 1, 2, 2, 2, 0}, 0.42061983571430506, 0.1111111111111111},
        {{0, 1, 2, 0, 1, 2, 0, 1}, {1, 1, 0, 0, 2, 2, 1, 0}, 0.2386226022652617, -0.14285714285714285},
        {{0, 0, 1, 1, 2, 2}, {0, 0, 0, 0, 0, 0}, 0.0, 0.0},
        {{3, 3, 7, 7, 7, 1, 1, 1, 1, 0}, {0, 1, 1, 1, 2, 2, 2, 2, 0, 0}, 0.45119264010703525, 0.16},
    };
    for (const auto& f : fixtures) {
        CHECK(nmi(P(f.y), P(f.p)) == doctest::Approx(f.nmi).epsilon(1e-12));
        CHECK(ari(P(f.y), P(f.p)) == doctest::Approx(f.ari).epsilon(1e-12));
    }
}

TEST_CASE("nmi and ari are exactly symmetric; all metrics hit 1 only on relabelings") {
    SeededRng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto y = random_partition(25, 2 + trial % 4, rng);
        const auto p = random_partition(25, 2 + trial % 5, rng);
        CHECK(nmi(y, p) == nmi(p, y));
        CHECK(ari(y, p) == ari(p, y));
        CHECK(ari(y, p) <= 1.0);
        const auto s = score(y, p);
        const bool same = acc(y, p) == 1.0;
        CHECK((s.nmi == 1.0) == same);
        CHECK((s.ari == 1.0) == same);

        const auto perm = shuffled_indices(y.k(), rng);
        std::vector<std::size_t> relabeled(25);
        for (std::size_t i = 0; i < 25; ++i) relabeled[i] = perm[y[i]];
        const auto r = score(y, Partition(relabeled, y.k()));
        CHECK(r.acc == 1.0);
        CHECK(r.nmi == 1.0);
        CHECK(r.ari == 1.0);
    }
}

TEST_CASE("kmeans examples") {
    const Matrix two{{0, 0}, {3, 4}};
    const auto r = kmeans(two, 2, SeededRng(1));
    CHECK(r.inertia == 0.0);
    CHECK(r.partition[0] != r.partition[1]);

    SeededRng rng(2);
    const Matrix x = testing::random_matrix(15, 3, rng);
    const auto one = kmeans(x, 1, SeededRng(3));
    double var = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 15; ++i) mean += x(i, d) / 15.0;
        CHECK(one.centroids(0, d) == doctest::Approx(mean).epsilon(1e-12));
        for (std::size_t i = 0; i < 15; ++i) var += (x(i, d) - mean) * (x(i, d) - mean);
    }
    CHECK(one.inertia == doctest::Approx(var).epsilon(1e-12));

    CHECK_THROWS_AS(kmeans(Matrix(), 1, SeededRng(1)), EmptyInput);
    CHECK_THROWS_AS(kmeans(x, 16, SeededRng(1)), Error);
    CHECK_THROWS_AS(kmeans(x, 0, SeededRng(1)), Error);
}

TEST_CASE("kmeans on separated blobs matches exhaustive search") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SeededRng rng(seed);
        Matrix x(12, 2);
        std::vector<long long> truth(12);
        for (std::size_t i = 0; i < 12; ++i) {
            const std::size_t c = i % 3;
            truth[i] = static_cast<long long>(c);
            x(i, 0) = 10.0 * std::cos(2.0 * c) + 0.3 * rng.normal();
            x(i, 1) = 10.0 * std::sin(2.0 * c) + 0.3 * rng.normal();
        }
        const auto r = kmeans(x, 3, SeededRng(seed));
        CHECK(r.inertia == doctest::Approx(brute_force_inertia(x, 3)).epsilon(1e-10));
        CHECK(acc(Partition::from_labels(truth), r.partition) == 1.0);
    }

    // n = 30, three blobs.
    SeededRng rng(9);
    Matrix x(30, 2);
    std::vector<long long> truth(30);
    for (std::size_t i = 0; i < 30; ++i) {
        truth[i] = static_cast<long long>(i / 10);
        x(i, 0) = 8.0 * static_cast<double>(i / 10) + 0.5 * rng.normal();
        x(i, 1) = 0.5 * rng.normal();
    }
    CHECK(acc(Partition::from_labels(truth), kmeans(x, 3, SeededRng(4)).partition) == 1.0);
}

TEST_CASE("kmeans invariants: inertia consistent, trace non-increasing, deterministic") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SeededRng rng(seed);
        const Matrix x = testing::random_matrix(40, 4, rng);
        const std::size_t k = 2 + seed % 5;
        const auto r = kmeans(x, k, SeededRng(seed));
        CHECK(std::abs(r.inertia - inertia(x, r.partition, r.centroids)) <= 1e-9);
        REQUIRE(!r.inertia_trace.empty());
        for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
            CHECK(r.inertia_trace[i] <= r.inertia_trace[i - 1] + 1e-12);
        }
        CHECK(r.iterations <= 300);
        const auto again = kmeans(x, k, SeededRng(seed));
        CHECK(again.partition == r.partition);
        CHECK(again.inertia == r.inertia);
    }
}

TEST_CASE("kmeans keeps every cluster alive on duplicated points") {
    const Matrix x{{0, 0}, {0, 0}, {0, 0}, {1, 1}, {1, 1}};
    const auto r = kmeans(x, 3, SeededRng(1));
    std::vector<std::size_t> count(3, 0);
    for (auto a : r.partition.assignments()) ++count[a];
    for (auto c : count) CHECK(c > 0);
}

TEST_CASE("feature_correlation") {
    SeededRng rng(6);
    Matrix v(500, 4);
    for (std::size_t i = 0; i < 500; ++i) {
        v(i, 0) = rng.normal();
        v(i, 1) = 2.0 * v(i, 0) + 1.0;  // affine copy
        v(i, 2) = rng.normal();
        v(i, 3) = rng.normal();
    }
    const auto rep = feature_correlation(v);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(rep.correlation(j, j) == 1.0);
        for (std::size_t l = 0; l < 4; ++l) CHECK(rep.correlation(j, l) == rep.correlation(l, j));
    }
    CHECK(rep.correlation(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    const double bound = 3.0 / std::sqrt(500.0);
    CHECK(std::abs(rep.correlation(0, 2)) < bound);
    CHECK(std::abs(rep.correlation(2, 3)) < bound);
    CHECK(rep.undefined_entries == 0);

    const Matrix flat{{1, 5}, {2, 5}, {3, 5}};
    const auto c = feature_correlation(flat);
    CHECK(c.correlation(0, 1) == 0.0);
    CHECK(c.correlation(1, 1) == 1.0);
    CHECK(c.undefined_entries == 2);
    CHECK_THROWS_AS(feature_correlation(Matrix{{1, 2}}), Error);

    CHECK(mean_abs_offdiagonal(Matrix{{1, -0.5}, {-0.5, 1}}) == 0.5);
}
