#include "idfd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "idfd/errors.hpp"

namespace idfd {

TrainConfig TrainConfig::full_scale() {
    TrainConfig cfg;
    cfg.batch_size = 128;
    cfg.epochs = 2000;
    cfg.warm_epochs = 600;
    cfg.decay_every = 350;
    cfg.dim = 128;
    return cfg;
}

void validate(const TrainConfig& cfg) {
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (!(cfg.lr0 >= 0.0)) fail("lr must be non-negative");
    if (!(cfg.momentum_beta >= 0.0 && cfg.momentum_beta < 1.0)) fail("momentum must lie in [0, 1)");
    if (cfg.batch_size < 2) fail("batch_size must be at least 2");
    if (cfg.decay_every == 0) fail("decay_every must be positive");
    if (!(cfg.decay_factor > 0.0 && cfg.decay_factor <= 1.0)) fail("decay_factor must lie in (0, 1]");
    if (!(cfg.tau > 0.0)) fail("tau must be positive");
    if (!(cfg.tau2 > 0.0)) fail("tau2 must be positive");
    if (!(cfg.alpha >= 0.0)) fail("alpha must be non-negative");
    if (!(cfg.bank_momentum >= 0.0 && cfg.bank_momentum <= 1.0)) {
        fail("bank_momentum must lie in [0, 1]");
    }
    if (cfg.dim == 0) fail("dim must be positive");
    for (std::size_t h : cfg.hidden) {
        if (h == 0) fail("hidden layer widths must be positive");
    }
}

double lr_at_epoch(const TrainConfig& cfg, std::size_t epoch) {
    if (epoch < cfg.warm_epochs) {
        return cfg.lr0;
    }
    const std::size_t decays = 1 + (epoch - cfg.warm_epochs) / cfg.decay_every;
    return cfg.lr0 * std::pow(cfg.decay_factor, static_cast<double>(decays));
}

TrainState initial_state(std::size_t input_dim, std::size_t n, const TrainConfig& cfg) {
    validate(cfg);
    const SeededRng root(cfg.seed);
    std::vector<std::size_t> dims;
    dims.push_back(input_dim);
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    dims.push_back(cfg.dim);

    SeededRng init_rng = root.derive(1);
    SeededRng bank_rng = root.derive(2);
    TrainState state{EncoderParams::he_init(dims, init_rng), {}, {}, root.derive(3), 0};
    state.velocity = state.params.zeros_like();
    state.bank = MemoryBank::random(n, cfg.dim, cfg.bank_momentum, bank_rng);
    return state;
}

EpochRecord run_epoch(TrainState& state, const Matrix& data, const TrainConfig& cfg,
                      const AugmentationSpec& aug, ObjectiveMode mode) {
    const std::size_t n = data.rows();
    if (n != state.bank.size()) {
        throw ShapeMismatch("run_epoch: dataset size differs from memory bank size");
    }
    EpochRecord rec;
    rec.epoch = state.epoch;
    rec.lr = lr_at_epoch(cfg, state.epoch);

    const auto order = shuffled_indices(n, state.rng);
    const FeatureLossConfig feature_cfg{cfg.tau2, cfg.alpha};
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
        const std::size_t stop = std::min(n, start + cfg.batch_size);
        if (stop - start < 2) break;
        InstanceLossConfig instance_cfg{cfg.tau, {order.begin() + static_cast<std::ptrdiff_t>(start),
                                                  order.begin() + static_cast<std::ptrdiff_t>(stop)}};
        const auto& idx = instance_cfg.batch_indices;

        Matrix x(idx.size(), data.cols());
        for (std::size_t b = 0; b < idx.size(); ++b) {
            auto src = data.row(idx[b]);
            auto dst = x.row(b);
            if (aug.transforms.empty()) {
                std::copy(src.begin(), src.end(), dst.begin());
            } else {
                const auto view = augment(src, aug, state.rng);
                std::copy(view.begin(), view.end(), dst.begin());
            }
        }

        const ForwardResult fwd = forward(state.params, x);
        const LossReport loss = combined_loss(fwd.v, state.bank, instance_cfg, feature_cfg, mode);
        // Step on the batch mean so lr does not scale with B.
        Matrix g = loss.grad;
        const double inv_b = 1.0 / static_cast<double>(idx.size());
        for (double& q : g.data()) q *= inv_b;
        const EncoderParams grads = backward(state.params, fwd.cache, g);
        MomentumStep step =
            sgd_momentum_step(state.params, grads, state.velocity, rec.lr, cfg.momentum_beta);
        state.params = std::move(step.params);
        state.velocity = std::move(step.velocity);
        state.bank.update(idx, fwd.v);

        rec.loss_instance += loss.components.at(std::string(kInstanceComponent));
        rec.loss_total += loss.value;
        if (mode == ObjectiveMode::IDFO) {
            rec.loss_feature += loss.components.at(std::string(kOrthogonalityComponent));
        } else if (mode == ObjectiveMode::IDFD) {
            rec.loss_feature += loss.components.at(std::string(kDecorrelationComponent));
        } else {
            rec.loss_feature += loss_fd(fwd.v, cfg.tau2).value;
        }
        ++batches;
    }
    if (batches > 0) {
        const double b = static_cast<double>(batches);
        rec.loss_instance /= b;
        rec.loss_feature /= b;
        rec.loss_total /= b;
    }
    ++state.epoch;
    return rec;
}

TrainResult train(const Matrix& data, const TrainConfig& cfg, const AugmentationSpec& aug,
                  ObjectiveMode mode, const EpochHook& hook) {
    if (data.rows() < 2) {
        throw EmptyInput("train: dataset needs at least two samples");
    }
    validate(aug);
    TrainState state = initial_state(data.cols(), data.rows(), cfg);
    std::vector<EpochRecord> history;
    history.reserve(cfg.epochs);
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        EpochRecord rec = run_epoch(state, data, cfg, aug, mode);
        if (hook) hook(rec, state);
        history.push_back(rec);
    }
    return {std::move(state.params), std::move(state.bank), std::move(history), state.rng};
}

Matrix encode(const EncoderParams& params, const Matrix& data) {
    return forward(params, data).v;
}

}  // namespace idfd
