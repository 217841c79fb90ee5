// Runs each acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status is non-zero if any selected
// criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "idfd/clustering.hpp"
#include "idfd/encoder.hpp"
#include "idfd/experiment.hpp"
#include "idfd/format.hpp"
#include "idfd/linalg.hpp"
#include "idfd/losses.hpp"
#include "idfd/memory_bank.hpp"
#include "idfd/spectral.hpp"
#include "idfd/temperature.hpp"
#include "support.hpp"

using namespace idfd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// ---- 1: gradient suite ------------------------------------------------------

Outcome gradients() {
    constexpr double kTol = 1e-4;
    double worst = 0.0;
    std::size_t checks = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SeededRng rng(seed);
        const std::size_t b = seed % 2 == 0 ? 4 : 8;
        const std::size_t d = (seed / 2) % 2 == 0 ? 4 : 16;
        const std::size_t n = b + 5;
        const Matrix batch = testing::random_matrix(b, d, rng);
        const MemoryBank bank = MemoryBank::random(n, d, 0.5, rng);
        const auto perm = shuffled_indices(n, rng);
        const std::vector<std::size_t> idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(b));
        const double tau = 0.2 + 0.1 * static_cast<double>(seed % 5);
        const double tau2 = 0.5 + 0.5 * static_cast<double>(seed % 4);
        const InstanceLossConfig icfg{tau, idx};

        auto probe = [&](const std::function<LossReport(const Matrix&)>& f) {
            const auto numeric = testing::numeric_gradient([&](const Matrix& x) { return f(x).value; }, batch);
            worst = std::max(worst, testing::max_rel_error(f(batch).grad.data(), numeric));
            ++checks;
        };
        probe([&](const Matrix& x) { return loss_id(x, bank, idx, tau); });
        probe([&](const Matrix& x) { return loss_fo(x); });
        probe([&](const Matrix& x) { return loss_fd(x, tau2); });
        probe([&](const Matrix& x) { return combined_loss(x, bank, icfg, {tau2, 1.0}, ObjectiveMode::IDFD); });
        probe([&](const Matrix& x) { return combined_loss(x, bank, icfg, {tau2, 10.0}, ObjectiveMode::IDFO); });

        // Full pipeline: loss through a two-layer encoder, bank frozen.
        const auto p = testing::small_net({5, 6, 4}, 40 + seed);
        const Matrix x = testing::random_matrix(4, 5, rng);
        const MemoryBank small_bank = MemoryBank::random(8, 4, 0.5, rng);
        const std::vector<std::size_t> pidx{6, 1, 3, 4};
        const InstanceLossConfig pcfg{tau, pidx};
        for (auto mode : {ObjectiveMode::ID, ObjectiveMode::IDFO, ObjectiveMode::IDFD}) {
            const FeatureLossConfig fcfg{tau2, mode == ObjectiveMode::IDFO ? 10.0 : 1.0};
            const auto fwd = forward(p, x);
            const auto loss = combined_loss(fwd.v, small_bank, pcfg, fcfg, mode);
            const auto analytic = testing::flatten(backward(p, fwd.cache, loss.grad));
            const auto base = testing::flatten(p);
            const auto numeric = testing::numeric_gradient(
                [&](const Matrix& m) {
                    return combined_loss(forward(testing::unflatten(p, m.data()), x).v, small_bank, pcfg, fcfg, mode)
                        .value;
                },
                Matrix(1, base.size(), base));
            worst = std::max(worst, testing::max_rel_error(analytic, numeric));
            ++checks;
        }
    }
    return {worst <= kTol, std::to_string(checks) + " gradient checks, worst relative error " + num(worst) +
                               " (limit 1e-4)"};
}

// ---- 2: closed-form z partial bounds ----------------------------------------

Outcome partial_bounds() {
    bool ok = true;
    double lo_f = INFINITY, hi_f = -INFINITY, lo_fo = INFINITY, hi_fo = -INFINITY;
    for (double tau2 : {0.5, 1.0, 2.0, 5.0}) {
        for (int i = 0; i <= 1000; ++i) {
            const double z = -1.0 + 2.0 * i / 1000.0;
            const double df = decorrelation_partial(z, ZEntry::OffDiagonal, tau2);
            const double dfo = orthogonality_partial(z, ZEntry::OffDiagonal);
            ok = ok && df >= 0.0 && df <= 1.0 / tau2 && dfo >= -2.0 && dfo <= 2.0;
            lo_f = std::min(lo_f, df * tau2);
            hi_f = std::max(hi_f, df * tau2);
            lo_fo = std::min(lo_fo, dfo);
            hi_fo = std::max(hi_fo, dfo);
        }
    }
    return {ok, "tau2 in {0.5,1,2,5}: tau2*dL_F/dz in [" + num(lo_f) + ", " + num(hi_f) + "], dL_FO/dz in [" +
                    num(lo_fo) + ", " + num(hi_fo) + "]"};
}

// ---- 3: sign of the spectral angle derivative -------------------------------

Outcome angle_sign() {
    double worst = INFINITY;
    for (double tau : {2.0, 3.0, 5.0, 10.0}) {
        for (int i = 0; i <= 2000; ++i) {
            worst = std::min(worst, dLsp_dtheta(std::numbers::pi * i / 2000.0, tau));
        }
    }
    double most_negative = INFINITY;
    for (int i = 0; i <= 2000; ++i) {
        most_negative = std::min(most_negative, dLsp_dtheta(std::numbers::pi * i / 2000.0, 0.07));
    }
    return {worst >= -1e-12 && most_negative < 0.0,
            "min over tau>=2 grid " + num(worst) + ", min at tau=0.07 " + num(most_negative)};
}

// ---- 4: trace form vs pairwise form -----------------------------------------

Outcome dual_form() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SeededRng rng(1000 + seed);
        const std::size_t n = 2 + rng.below(29);
        const std::size_t k = 1 + rng.below(5);
        const std::size_t dim = 2 + rng.below(8);
        const double tau = rng.uniform(0.1, 3.0);
        const auto g = build_graph(l2_normalize_rows(testing::random_matrix(n, dim, rng)), tau);
        const Matrix f = testing::random_matrix(n, k, rng);
        const double a = loss_sp(g, f), b = loss_sp_pairwise(g, f);
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
    }
    return {worst <= 1e-8, "50 instances, n <= 30, worst relative difference " + num(worst)};
}

// ---- 5: toy-model temperature gap -------------------------------------------

Outcome temperature_gap() {
    const auto t0 = std::chrono::steady_clock::now();
    const double taus[] = {0.07, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
    std::vector<double> gaps;
    for (double t : taus) gaps.push_back(tau_gap(3600, 10, t));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool monotone = true;
    for (std::size_t i = 1; i < gaps.size(); ++i) monotone = monotone && gaps[i] <= gaps[i - 1];
    const bool small_at_5 = gaps[5] < 0.05;
    const bool large_at_007 = gaps[0] > 0.5;
    std::string detail = "gaps";
    for (double g : gaps) detail += " " + num(g);
    detail += std::string("; non-increasing ") + (monotone ? "yes" : "no") + ", gap(5) < 0.05 " +
              (small_at_5 ? "yes" : "no") + ", gap(0.07) > 0.5 " + (large_at_007 ? "yes" : "no") + ", " +
              num(secs) + " s";
    return {monotone && small_at_5 && large_at_007 && secs < 10.0, detail};
}

// ---- 6: metric oracles --------------------------------------------------------

Partition random_partition(std::size_t n, std::size_t k, SeededRng& rng) {
    std::vector<std::size_t> a(n);
    for (auto& x : a) x = rng.below(k);
    for (std::size_t c = 0; c < k; ++c) a[c] = c;  // every cluster used
    return Partition(a, k);
}

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

Outcome metric_oracles() {
    std::size_t acc_mismatch = 0;
    SeededRng rng(606);
    for (int t = 0; t < 100; ++t) {
        const std::size_t k = 1 + static_cast<std::size_t>(t) % 6;
        const auto y = random_partition(12 + rng.below(40), k, rng);
        const auto p = random_partition(y.size(), 1 + rng.below(6), rng);
        if (std::abs(acc(y, p) - brute_force_acc(y, p)) > 1e-15) ++acc_mismatch;
    }

    auto P = [](std::vector<long long> v) { return Partition::from_labels(v); };
    // Contingency [[2,0],[1,1]] over 4 points.
    const double i01 = 0.5 * std::log(4.0 / 3.0) + 0.25 * std::log(2.0 / 3.0) + 0.25 * std::log(2.0);
    const double hp = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
    const double nmi_hand = i01 / ((std::log(2.0) + hp) / 2.0);
    struct Fixture {
        std::vector<long long> y, p;
        double nmi, ari;
    };
    // Pair counts for the second fixture: index 3, row pairs 9, column pairs 9, total 36.
    const double ari2 = (3.0 - 81.0 / 36.0) / (9.0 - 81.0 / 36.0);
    const std::vector<Fixture> fixtures{
        {{0, 0, 1, 1}, {0, 0, 0, 1}, nmi_hand, 0.0},
        {{0, 0, 0, 1, 1, 1, 2, 2, 2}, {0, 0, 1, 1, 1, 2, 2, 2, 0}, 0.42061983571430506, ari2},
        {{0, 1, 2, 0, 1, 2, 0, 1}, {1, 1, 0, 0, 2, 2, 1, 0}, 0.2386226022652617, -0.14285714285714285},
        {{0, 0, 1, 1, 2, 2}, {0, 0, 0, 0, 0, 0}, 0.0, 0.0},
        {{3, 3, 7, 7, 7, 1, 1, 1, 1, 0}, {0, 1, 1, 1, 2, 2, 2, 2, 0, 0}, 0.45119264010703525, 0.16},
    };
    std::size_t fixture_mismatch = 0;
    for (const auto& f : fixtures) {
        if (std::abs(nmi(P(f.y), P(f.p)) - f.nmi) > 1e-12) ++fixture_mismatch;
        if (std::abs(ari(P(f.y), P(f.p)) - f.ari) > 1e-12) ++fixture_mismatch;
    }
    const double ari_half = ari(P({0, 0, 1, 1}), P({0, 1, 0, 1}));
    return {acc_mismatch == 0 && fixture_mismatch == 0 && ari_half == -0.5,
            "ACC vs brute force mismatches " + std::to_string(acc_mismatch) + "/100, NMI/ARI fixture mismatches " +
                std::to_string(fixture_mismatch) + "/" + std::to_string(2 * fixtures.size()) +
                ", ARI([0,0,1,1],[0,1,0,1]) = " + format_double(ari_half)};
}

// ---- 7: spectral block recovery ----------------------------------------------

Outcome block_recovery() {
    std::size_t runs = 0, exact = 0;
    for (std::size_t k : {2, 3, 4}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            SeededRng rng(700 + 31 * seed + k);
            const std::size_t n = k * (3 + rng.below(6));
            std::vector<long long> labels(n);
            for (auto& l : labels) l = static_cast<long long>(rng.below(k));
            for (std::size_t c = 0; c < k; ++c) labels[c] = static_cast<long long>(c);
            Matrix w(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i; j < n; ++j) {
                    if (labels[i] == labels[j]) w(i, j) = w(j, i) = rng.uniform(0.5, 1.5);
                }
            }
            const auto p = spectral_cluster(graph_from_weights(w), k, SeededRng(seed));
            ++runs;
            exact += acc(Partition::from_labels(labels), p) == 1.0;
        }
    }
    return {exact == runs, std::to_string(exact) + "/" + std::to_string(runs) +
                               " block-diagonal graphs (k in {2,3,4}) recovered with ACC 1.0"};
}

// ---- 8-10: desk-scale benchmark ----------------------------------------------

constexpr std::uint64_t kSeeds = 5;

/// The default benchmark: RunConfig defaults with the given seed.
RunConfig benchmark(std::uint64_t seed, ObjectiveMode mode) {
    RunConfig cfg;
    cfg.train.seed = seed;
    cfg.mode = mode;
    return cfg;
}

struct SeedStats {
    std::vector<double> acc;
    std::vector<double> corr;
    double mean_acc() const { return std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size()); }
    double mean_corr() const {
        return std::accumulate(corr.begin(), corr.end(), 0.0) / static_cast<double>(corr.size());
    }
};

SeedStats run_seeds(ObjectiveMode mode) {
    SeedStats s;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
        const auto r = run_experiment(benchmark(seed, mode));
        s.acc.push_back(r.final_scores->acc);
        s.corr.push_back(r.mean_abs_correlation);
    }
    return s;
}

std::string list(const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : " ") + num(x);
    return out;
}

Outcome id_vs_idfd() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto id = run_seeds(ObjectiveMode::ID);
    const auto idfd = run_seeds(ObjectiveMode::IDFD);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = idfd.mean_acc() >= id.mean_acc() && idfd.mean_acc() >= 0.90 && secs < 600.0;
    return {ok, "mean ACC IDFD " + num(idfd.mean_acc()) + " [" + list(idfd.acc) + "] vs ID " + num(id.mean_acc()) +
                    " [" + list(id.acc) + "], " + num(secs) + " s for 10 runs"};
}

Outcome temperature_sweeps() {
    const std::vector<double> taus{0.07, 1.0, 10.0}, tau2s{0.5, 2.0, 5.0};
    std::vector<double> tau_acc(3, 0.0), tau2_acc(3, 0.0);
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
        const RunConfig cfg = benchmark(seed, ObjectiveMode::IDFD);
        const auto a = sweep(cfg, SweepParameter::Tau, taus);
        const auto b = sweep(cfg, SweepParameter::Tau2, tau2s);
        for (std::size_t i = 0; i < 3; ++i) {
            tau_acc[i] += a.rows[i].report.final_scores->acc / static_cast<double>(kSeeds);
            tau2_acc[i] += b.rows[i].report.final_scores->acc / static_cast<double>(kSeeds);
        }
    }
    auto range = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *hi - *lo;
    };
    const bool mid_best = tau_acc[1] >= tau_acc[0] && tau_acc[1] >= tau_acc[2];
    const bool robust = range(tau2_acc) <= 0.5 * range(tau_acc);
    return {mid_best && robust, "mean ACC at tau {0.07,1,10}: " + list(tau_acc) + "; at tau2 {0.5,2,5}: " +
                                    list(tau2_acc) + "; ranges " + num(range(tau_acc)) + " vs " +
                                    num(range(tau2_acc))};
}

Outcome decorrelation() {
    const auto id = run_seeds(ObjectiveMode::ID);
    const auto idfd = run_seeds(ObjectiveMode::IDFD);
    return {idfd.mean_corr() < id.mean_corr(), "mean |offdiag corr| IDFD " + num(idfd.mean_corr()) + " [" +
                                                   list(idfd.corr) + "] vs ID " + num(id.mean_corr()) + " [" +
                                                   list(id.corr) + "]"};
}

// ---- 11: byte-identical reruns through the CLI --------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "idfd_acceptance";
    fs::remove_all(root);
    const std::vector<std::string> configs{
        "--seed 0",
        "--seed 3 --mode id --epochs 30 --spectral true",
        "--seed 9 --mode idfo --alpha 10 --epochs 30 --eval_every 4 --eval_source bank",
        "--seed 12 --epochs 25 --eval_every 0 --hidden none --gen_k 3 --gen_noise 0.4",
    };
    const char* reports[] = {"history.csv", "correlation.csv", "embeddings.csv", "summary.json", "metrics.json"};
    std::size_t identical = 0, compared = 0;
    std::string problems;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        std::vector<fs::path> dirs;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path dir = root / ("cfg" + std::to_string(c) + "_" + std::to_string(rep));
            const std::string cmd = std::string("\"") + IDFD_CLI_PATH + "\" train " + configs[c] +
                                    " --output_dir \"" + dir.string() + "\" > \"" + (root / "log.txt").string() +
                                    "\" 2>&1";
            fs::create_directories(root);
            if (std::system(cmd.c_str()) != 0) problems += " [exit status of '" + configs[c] + "']";
            dirs.push_back(dir);
        }
        for (const char* f : reports) {
            ++compared;
            const std::string a = slurp(dirs[0] / f), b = slurp(dirs[1] / f);
            if (!a.empty() && a == b) ++identical;
            else problems += std::string(" [") + f + " of '" + configs[c] + "']";
        }
    }
    return {identical == compared && problems.empty(),
            std::to_string(identical) + "/" + std::to_string(compared) + " report files byte-identical across " +
                std::to_string(configs.size()) + " train configs" + problems};
}

struct Criterion {
    int id;
    const char* title;
    Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "gradient suite", gradients},
    {2, "bounds of dL_F/dz and dL_FO/dz", partial_bounds},
    {3, "sign of dL_SP/dtheta", angle_sign},
    {4, "trace and pairwise forms agree", dual_form},
    {5, "toy-model temperature gap", temperature_gap},
    {6, "metric oracles", metric_oracles},
    {7, "spectral block recovery", block_recovery},
    {8, "ID vs IDFD end to end", id_vs_idfd},
    {9, "tau and tau2 sweeps", temperature_sweeps},
    {10, "feature decorrelation", decorrelation},
    {11, "train rerun determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> selected;
    app.add_option("-n,--criterion", selected, "criteria to run (default: all)")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);

    int failed = 0;
    for (const auto& c : kCriteria) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "criterion " << c.id << " " << (out.pass ? "PASS" : "FAIL") << " " << c.title << ": "
                  << out.detail << " [" << num(secs) << " s]" << std::endl;
        failed += !out.pass;
    }
    return failed == 0 ? 0 : 1;
}
