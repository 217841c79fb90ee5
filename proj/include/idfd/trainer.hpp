#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "idfd/augment.hpp"
#include "idfd/clustering.hpp"
#include "idfd/encoder.hpp"
#include "idfd/losses.hpp"
#include "idfd/matrix.hpp"
#include "idfd/memory_bank.hpp"

namespace idfd {

struct TrainConfig {
    double lr0 = 0.03;
    double momentum_beta = 0.9;
    std::size_t batch_size = 64;
    std::size_t epochs = 200;
    /// lr0 until warm_epochs, then x decay_factor every decay_every epochs.
    std::size_t warm_epochs = 120;
    std::size_t decay_every = 40;
    double decay_factor = 0.1;
    double tau = 1.0;
    double tau2 = 2.0;
    double alpha = 1.0;
    double bank_momentum = 0.5;
    std::vector<std::size_t> hidden = {128};
    std::size_t dim = 32;
    std::uint64_t seed = 0;

    /// Full-scale schedule: d = 128, B = 128, 2000 epochs, decays at 600, 950, 1300, ...
    static TrainConfig full_scale();
};

/// Throws ConfigError for out-of-range values.
void validate(const TrainConfig& cfg);

double lr_at_epoch(const TrainConfig& cfg, std::size_t epoch);

struct EpochRecord {
    std::size_t epoch = 0;
    double loss_instance = 0.0;  ///< mean per batch
    double loss_feature = 0.0;   ///< L_FO under IDFO, L_F otherwise; mean per batch
    double loss_total = 0.0;     ///< mean per batch of the optimised objective
    double lr = 0.0;
    std::optional<ClusterScores> scores;
    bool operator==(const EpochRecord&) const = default;
};

struct TrainState {
    EncoderParams params;
    EncoderParams velocity;
    MemoryBank bank;
    SeededRng rng;
    std::size_t epoch = 0;  ///< epochs completed
};

/// Called after every epoch; may fill record.scores.
using EpochHook = std::function<void(EpochRecord& record, const TrainState& state)>;

struct TrainResult {
    EncoderParams params;
    MemoryBank bank;
    std::vector<EpochRecord> history;
    SeededRng rng;
};

/// Fresh parameters, zero velocity and a random bank, all drawn from cfg.seed.
TrainState initial_state(std::size_t input_dim, std::size_t n, const TrainConfig& cfg);

/// One pass over shuffled minibatches: augment, forward, loss, backward,
/// momentum step on the gradient of the batch-mean loss, bank update. A trailing batch with fewer than two rows is
/// dropped, since feature columns of length one are degenerate.
EpochRecord run_epoch(TrainState& state, const Matrix& data, const TrainConfig& cfg,
                      const AugmentationSpec& aug, ObjectiveMode mode);

TrainResult train(const Matrix& data, const TrainConfig& cfg, const AugmentationSpec& aug,
                  ObjectiveMode mode, const EpochHook& hook = {});

/// Row-normalised encoder outputs for every sample, no augmentation.
Matrix encode(const EncoderParams& params, const Matrix& data);

}  // namespace idfd
