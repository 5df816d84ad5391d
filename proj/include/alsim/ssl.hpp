#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "alsim/dataset.hpp"
#include "alsim/model.hpp"

namespace alsim {

// Vector-data augmentation: Gaussian jitter followed by random feature masking.
struct AugmentSpec {
    double noise_std = 0.2;
    double mask_prob = 0.1;  // independent probability of zeroing each coordinate
};

struct ByolConfig {
    std::vector<std::size_t> encoder_hidden = {32};  // must match the classifier encoder
    Activation activation = Activation::relu;
    std::size_t epochs = 30;
    std::size_t batch_size = 50;
    double learning_rate = 0.05;
    double momentum = 0.0;  // plain SGD by default
    double tau = 0.99;      // EMA coefficient for the target network
    AugmentSpec augment;
    std::uint64_t seed = 0;
};

// Twin-network state: the online branch (encoder, projector, predictor) is
// trained by gradient descent; the target branch only follows by EMA.
struct ByolState {
    MlpBlock online_encoder;
    MlpBlock online_projector;
    MlpBlock online_predictor;
    MlpBlock target_encoder;
    MlpBlock target_projector;
    double tau = 0.99;
};

std::vector<double> augment(std::span<const double> features, const AugmentSpec& spec, Rng& rng);

// Norm-adjusted MSE between the online prediction and the target projection:
// ||u/||u|| - v/||v||||^2, which equals 2 - 2 cos(u, v). Range [0, 4].
double byol_loss(std::span<const double> online_pred, std::span<const double> target_proj);

// theta_target <- tau * theta_target + (1 - tau) * theta_online.
void ema_update(ByolState& state);

// Deterministic initial state: target blocks start as copies of the online ones.
ByolState init_byol_state(std::size_t input_dim, const ByolConfig& config);

struct ByolGrads {
    BlockGrads encoder;
    BlockGrads projector;
    BlockGrads predictor;
};

ByolGrads make_byol_grads(const ByolState& state);

// Accumulates the gradients of the symmetric per-sample objective
// L(view1 -> view2) + L(view2 -> view1) into the online blocks' grads.
// Returns the symmetric loss value. The target branch receives no gradient.
// Directions whose branch output has zero norm (possible with dead relu rows
// early in training) are skipped and contribute neither loss nor gradient.
double byol_sample_grads(const ByolState& state, std::span<const double> view1,
                         std::span<const double> view2, ByolGrads& grads);

struct PretrainResult {
    MlpBlock encoder;                // the trained online encoder
    std::vector<double> epoch_loss;  // mean symmetric loss per epoch
    ByolState state;                 // full final state, kept for inspection
};

PretrainResult pretrain(const Archive& archive, const ByolConfig& config);

// Classifier whose encoder is the given (pre-trained) block and whose head is
// freshly seeded.
ModelParams transfer(const MlpBlock& encoder, std::size_t num_classes, std::uint64_t head_seed);

}  // namespace alsim
