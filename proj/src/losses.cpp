#include "idfd/losses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "idfd/errors.hpp"
#include "idfd/linalg.hpp"

namespace idfd {

namespace {

/// log sum_j exp(x_j), shifted by the maximum.
double log_sum_exp(std::span<const double> x) {
    const double mx = *std::max_element(x.begin(), x.end());
    double s = 0.0;
    for (double v : x) {
        s += std::exp(v - mx);
    }
    return mx + std::log(s);
}

void require_positive(double t, const char* what) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw DomainError(std::string(what) + " must be a positive finite number");
    }
}

/// Pulls a gradient with respect to normalised columns back to the raw
/// columns: dc = (df - f (f . df)) / ||c||.
Matrix column_normalization_backward(const Matrix& normalized, std::span<const double> norms,
                                     const Matrix& grad_normalized) {
    const std::size_t rows = normalized.rows();
    Matrix out(rows, normalized.cols());
    for (std::size_t c = 0; c < normalized.cols(); ++c) {
        double proj = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            proj += normalized(r, c) * grad_normalized(r, c);
        }
        for (std::size_t r = 0; r < rows; ++r) {
            out(r, c) = (grad_normalized(r, c) - normalized(r, c) * proj) / norms[c];
        }
    }
    return out;
}

struct FeatureColumns {
    Matrix f;                  ///< B x d, unit columns
    std::vector<double> norm;  ///< raw column norms
    Matrix z;                  ///< d x d similarity, exactly symmetric
};

FeatureColumns feature_columns(const Matrix& batch) {
    FeatureColumns fc;
    fc.norm.resize(batch.cols());
    for (std::size_t c = 0; c < batch.cols(); ++c) {
        double ss = 0.0;
        for (std::size_t r = 0; r < batch.rows(); ++r) {
            ss += batch(r, c) * batch(r, c);
        }
        fc.norm[c] = std::sqrt(ss);
    }
    fc.f = l2_normalize_columns(batch);
    const std::size_t d = batch.cols();
    fc.z = Matrix(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t l = j; l < d; ++l) {
            double s = 0.0;
            for (std::size_t r = 0; r < batch.rows(); ++r) {
                s += fc.f(r, j) * fc.f(r, l);
            }
            fc.z(j, l) = s;
            fc.z(l, j) = s;
        }
    }
    return fc;
}

/// Chain rule through Z = F^T F for a symmetric or asymmetric dL/dZ.
Matrix grad_through_gram(const FeatureColumns& fc, const Matrix& dz) {
    const std::size_t d = dz.rows();
    Matrix sym(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t l = 0; l < d; ++l) {
            sym(j, l) = dz(j, l) + dz(l, j);
        }
    }
    return column_normalization_backward(fc.f, fc.norm, matmul(fc.f, sym));
}

}  // namespace

std::string_view to_string(ObjectiveMode mode) noexcept {
    switch (mode) {
        case ObjectiveMode::ID: return "ID";
        case ObjectiveMode::IDFO: return "IDFO";
        case ObjectiveMode::IDFD: return "IDFD";
    }
    return "?";
}

ObjectiveMode parse_objective_mode(std::string_view text) {
    std::string up(text);
    std::transform(up.begin(), up.end(), up.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "ID") return ObjectiveMode::ID;
    if (up == "IDFO") return ObjectiveMode::IDFO;
    if (up == "IDFD") return ObjectiveMode::IDFD;
    throw ConfigError("unknown objective mode '" + std::string(text) + "'");
}

double instance_prob(std::span<const double> v, const MemoryBank& bank, std::size_t i, double tau) {
    require_positive(tau, "tau");
    if (i >= bank.size()) {
        throw IndexOutOfRange("instance_prob: class " + std::to_string(i) + " outside bank");
    }
    if (v.size() != bank.dim()) {
        throw ShapeMismatch("instance_prob: vector width differs from bank width");
    }
    std::vector<double> logits(bank.size());
    for (std::size_t j = 0; j < bank.size(); ++j) {
        logits[j] = dot(bank.row(j), v) / tau;
    }
    return std::exp(logits[i] - log_sum_exp(logits));
}

LossReport loss_id(const Matrix& batch, const MemoryBank& bank,
                   std::span<const std::size_t> indices, double tau) {
    require_positive(tau, "tau");
    if (batch.cols() != bank.dim()) {
        throw ShapeMismatch("loss_id: batch width differs from bank width");
    }
    if (indices.size() != batch.rows()) {
        throw ShapeMismatch("loss_id: one index per batch row is required");
    }
    std::vector<bool> seen(bank.size(), false);
    for (std::size_t idx : indices) {
        if (idx >= bank.size()) {
            throw IndexOutOfRange("loss_id: index " + std::to_string(idx) + " outside bank");
        }
        if (seen[idx]) {
            throw IndexOutOfRange("loss_id: index " + std::to_string(idx) + " repeated in batch");
        }
        seen[idx] = true;
    }

    const Matrix v = l2_normalize_rows(batch);
    const std::size_t n = bank.size();
    const std::size_t d = bank.dim();

    LossReport report{0.0, Matrix(batch.rows(), d), {}};
    std::vector<double> logits(n);
    std::vector<double> gv(d);
    for (std::size_t b = 0; b < batch.rows(); ++b) {
        const auto vb = v.row(b);
        const std::size_t own = indices[b];
        for (std::size_t j = 0; j < n; ++j) {
            logits[j] = (j == own ? dot(vb, vb) : dot(bank.row(j), vb)) / tau;
        }
        const double lse = log_sum_exp(logits);
        report.value += lse - logits[own];

        std::fill(gv.begin(), gv.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double p = std::exp(logits[j] - lse);
            if (j == own) {
                for (std::size_t c = 0; c < d; ++c) gv[c] += 2.0 * (p - 1.0) * vb[c];
            } else {
                const auto w = bank.row(j);
                for (std::size_t c = 0; c < d; ++c) gv[c] += p * w[c];
            }
        }
        for (double& g : gv) g /= tau;

        // Row normalisation Jacobian: (I - v v^T) / ||h||.
        const double h_norm = norm(batch.row(b));
        const double proj = dot(vb, gv);
        auto out = report.grad.row(b);
        for (std::size_t c = 0; c < d; ++c) {
            out[c] = (gv[c] - vb[c] * proj) / h_norm;
        }
    }
    report.components.emplace(kInstanceComponent, report.value);
    return report;
}

double feature_prob(std::span<const double> f, const Matrix& features, std::size_t l, double tau2) {
    require_positive(tau2, "tau2");
    if (l >= features.rows()) {
        throw IndexOutOfRange("feature_prob: feature " + std::to_string(l) + " out of range");
    }
    if (f.size() != features.cols()) {
        throw ShapeMismatch("feature_prob: feature length mismatch");
    }
    std::vector<double> logits(features.rows());
    for (std::size_t m = 0; m < features.rows(); ++m) {
        logits[m] = dot(features.row(m), f) / tau2;
    }
    return std::exp(logits[l] - log_sum_exp(logits));
}

LossReport loss_fo(const Matrix& batch) {
    const FeatureColumns fc = feature_columns(batch);
    const std::size_t d = batch.cols();
    Matrix dz(d, d);
    double value = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t l = 0; l < d; ++l) {
            const double r = fc.z(j, l) - (j == l ? 1.0 : 0.0);
            value += r * r;
            dz(j, l) = 2.0 * r;
        }
    }
    LossReport report{value, grad_through_gram(fc, dz), {}};
    report.components.emplace(kOrthogonalityComponent, value);
    return report;
}

LossReport loss_fd(const Matrix& batch, double tau2) {
    require_positive(tau2, "tau2");
    const FeatureColumns fc = feature_columns(batch);
    const std::size_t d = batch.cols();
    Matrix dz(d, d);
    double value = 0.0;
    std::vector<double> column(d);
    for (std::size_t l = 0; l < d; ++l) {
        for (std::size_t j = 0; j < d; ++j) {
            column[j] = fc.z(j, l);
        }
        const std::vector<double> partial = decorrelation_column_partials(column, l, tau2);
        std::vector<double> logits(d);
        for (std::size_t j = 0; j < d; ++j) {
            logits[j] = column[j] / tau2;
            dz(j, l) = partial[j];
        }
        value += -logits[l] + log_sum_exp(logits);
    }
    LossReport report{value, grad_through_gram(fc, dz), {}};
    report.components.emplace(kDecorrelationComponent, value);
    return report;
}

LossReport combined_loss(const Matrix& batch, const MemoryBank& bank,
                         const InstanceLossConfig& instance_cfg,
                         const FeatureLossConfig& feature_cfg, ObjectiveMode mode) {
    if (!(feature_cfg.alpha >= 0.0)) {
        throw DomainError("alpha must be non-negative");
    }
    LossReport report = loss_id(batch, bank, instance_cfg.batch_indices, instance_cfg.tau);
    if (mode == ObjectiveMode::ID) {
        return report;
    }
    const LossReport feature =
        mode == ObjectiveMode::IDFD ? loss_fd(batch, feature_cfg.tau2) : loss_fo(batch);
    const double alpha = feature_cfg.alpha;
    report.value += alpha * feature.value;
    auto g = report.grad.data();
    auto fg = feature.grad.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] += alpha * fg[i];
    }
    report.components.insert(feature.components.begin(), feature.components.end());
    return report;
}

std::vector<double> decorrelation_column_partials(std::span<const double> column, std::size_t l,
                                                  double tau2) {
    require_positive(tau2, "tau2");
    if (l >= column.size()) {
        throw IndexOutOfRange("decorrelation_column_partials: diagonal index out of range");
    }
    std::vector<double> logits(column.size());
    for (std::size_t j = 0; j < column.size(); ++j) {
        logits[j] = column[j] / tau2;
    }
    const double lse = log_sum_exp(logits);
    std::vector<double> out(column.size());
    for (std::size_t j = 0; j < column.size(); ++j) {
        out[j] = (std::exp(logits[j] - lse) - (j == l ? 1.0 : 0.0)) / tau2;
    }
    return out;
}

namespace {

void require_cosine(double z) {
    if (!(std::abs(z) <= 1.0 + 1e-9)) {
        throw DomainError("similarity " + std::to_string(z) + " outside [-1, 1]");
    }
}

}  // namespace

double decorrelation_partial(double z, ZEntry entry, double tau2) {
    require_cosine(z);
    if (entry == ZEntry::OffDiagonal) {
        const double column[2] = {1.0, z};
        return decorrelation_column_partials(column, 0, tau2)[1];
    }
    const double column[2] = {z, 0.0};
    return decorrelation_column_partials(column, 0, tau2)[0];
}

double orthogonality_partial(double z, ZEntry entry) {
    require_cosine(z);
    return (entry == ZEntry::Diagonal ? -2.0 : 0.0) + 2.0 * z;
}

}  // namespace idfd
