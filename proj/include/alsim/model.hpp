#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "alsim/dataset.hpp"
#include "alsim/mlp.hpp"

namespace alsim {

// Feed-forward multi-label classifier: an encoder stack producing the
// penultimate feature vector h, and a final linear layer mapping h to C logits.
struct ModelParams {
    MlpBlock encoder;  // d -> h1 -> ... -> hk, activated output; empty = identity
    Layer head;        // p -> C, linear

    std::size_t input_dim() const { return encoder.input_dim(); }
    std::size_t penultimate_dim() const { return encoder.output_dim(); }
    std::size_t num_classes() const { return head.out; }

    bool operator==(const ModelParams&) const = default;
};

struct ForwardResult {
    std::vector<double> penultimate;
    std::vector<double> logits;
    std::vector<double> probs;  // sigmoid(logits), strictly inside (0, 1)
};

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 10;
    double learning_rate = 0.025;
    double lr_decay_factor = 0.1;   // multiplied in after lr_decay_epoch epochs
    std::size_t lr_decay_epoch = 80;
    std::uint64_t seed = 0;
    double augment_noise_std = 0.0;  // zero-mean Gaussian feature noise per batch; 0 disables
    bool freeze_encoder = false;     // train only the classification head
};

// Flattened last-layer loss gradient; values[j * p + r] = dL/dW[j][r].
struct GradientEmbedding {
    std::vector<double> values;
    double magnitude = 0.0;  // cached ||values||_2
};

ModelParams init_model(std::size_t input_dim, const std::vector<std::size_t>& hidden_sizes,
                       std::size_t num_classes, std::uint64_t seed,
                       Activation activation = Activation::relu);

ForwardResult forward(const ModelParams& params, std::span<const double> features);

// Mean binary cross-entropy over classes, log arguments clamped at 1e-12.
double bce_loss(std::span<const double> probs, const MultiLabelVector& labels);

// SGD over shuffled mini-batches of the mean per-sample BCE loss. Returns new
// parameters; the input is untouched. Deterministic given config.seed.
ModelParams train(const ModelParams& params, const std::vector<Sample>& labeled,
                  const TrainConfig& config);

// Closed-form gradient of bce_loss w.r.t. the head weights (biases excluded):
// dL/dW[j][r] = (probs[j] - labels[j]) * h[r] / C.
GradientEmbedding last_layer_gradient(const ModelParams& params, std::span<const double> features,
                                      const MultiLabelVector& labels);

// Text checkpoint container; round-trip reproduces forward outputs exactly.
void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

void save_encoder(const MlpBlock& encoder, const std::string& path);
MlpBlock load_encoder(const std::string& path);

}  // namespace alsim
