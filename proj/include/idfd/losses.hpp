#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idfd/matrix.hpp"
#include "idfd/memory_bank.hpp"

namespace idfd {

enum class ObjectiveMode { ID, IDFO, IDFD };

std::string_view to_string(ObjectiveMode mode) noexcept;
/// Accepts "ID", "IDFO", "IDFD" (case-insensitive); throws ConfigError otherwise.
ObjectiveMode parse_objective_mode(std::string_view text);

struct InstanceLossConfig {
    double tau = 1.0;
    std::vector<std::size_t> batch_indices;
};

struct FeatureLossConfig {
    double tau2 = 2.0;
    double alpha = 1.0;
};

inline constexpr std::string_view kInstanceComponent = "L_I";
inline constexpr std::string_view kDecorrelationComponent = "L_F";
inline constexpr std::string_view kOrthogonalityComponent = "L_FO";

struct LossReport {
    double value = 0.0;
    Matrix grad;  ///< d value / d batch, same shape as the batch
    std::map<std::string, double, std::less<>> components;
};

// --- instance discrimination -------------------------------------------------

/// Softmax probability that `v` belongs to instance class `i` of the bank,
/// with temperature `tau`.
double instance_prob(std::span<const double> v, const MemoryBank& bank, std::size_t i, double tau);

/// Negative log-likelihood summed over the batch.
///
/// Row b of `batch` is the representation of instance indices[b]; rows are
/// L2-normalised on entry and the returned gradient is with respect to the
/// raw rows (so it passes through the normalisation Jacobian). Bank rows act
/// as constant class weights, except that the sample's own class weight is
/// the sample itself, making its own logit v.v / tau.
LossReport loss_id(const Matrix& batch, const MemoryBank& bank,
                   std::span<const std::size_t> indices, double tau);

// --- feature constraints -----------------------------------------------------
//
// Feature vectors are the columns of the B x d batch, each L2-normalised
// before evaluation; gradients include that normalisation.

/// Softmax over feature similarities. `features` holds one feature vector per
/// row (d rows); `f` is compared against each of them.
double feature_prob(std::span<const double> f, const Matrix& features, std::size_t l, double tau2);

/// ||Z - I||_F^2 with Z the Gram matrix of the normalised feature columns.
LossReport loss_fo(const Matrix& batch);

/// Softmax decorrelation penalty: sum_l -log Q(l | f_l).
LossReport loss_fd(const Matrix& batch, double tau2);

LossReport combined_loss(const Matrix& batch, const MemoryBank& bank,
                         const InstanceLossConfig& instance_cfg,
                         const FeatureLossConfig& feature_cfg, ObjectiveMode mode);

// --- closed-form partials in z_jl = f_j . f_l ---------------------------------

enum class ZEntry { Diagonal, OffDiagonal };

/// Partials of the decorrelation term -z_ll/tau2 + log sum_j exp(z_jl/tau2)
/// with respect to every entry z_jl of one similarity column.
std::vector<double> decorrelation_column_partials(std::span<const double> column, std::size_t l,
                                                  double tau2);

/// d L_F / d z for a representative entry, evaluated on a two-feature column.
/// OffDiagonal: the column is (z_ll = 1, z_jl = z) and the partial is taken
/// at z_jl. Diagonal: the column is (z_ll = z, z_jl = 0) and the partial is
/// taken at z_ll.
double decorrelation_partial(double z, ZEntry entry, double tau2);

/// d L_FO / d z_jl = -2 delta_jl + 2 z_jl.
double orthogonality_partial(double z, ZEntry entry);

}  // namespace idfd
