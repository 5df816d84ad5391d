#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "alsim/rng.hpp"

namespace alsim {

enum class Activation { identity, relu, tanh };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// One dense layer. Weights are row-major: w[o * in + i] maps input i to output o.
struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> w;
    std::vector<double> b;

    bool operator==(const Layer&) const = default;
};

// A stack of dense layers with a shared hidden activation. The activation is
// applied after every layer except the last, and after the last one too when
// activate_output is set (the classifier encoder wants an activated penultimate
// vector; projector/predictor heads end linear). An empty stack is the identity
// on in_dim inputs.
struct MlpBlock {
    std::size_t in_dim = 0;
    std::vector<Layer> layers;
    Activation activation = Activation::relu;
    bool activate_output = true;

    std::size_t input_dim() const { return in_dim; }
    std::size_t output_dim() const { return layers.empty() ? in_dim : layers.back().out; }

    bool operator==(const MlpBlock&) const = default;
};

// Glorot-scaled uniform init, biases zero.
Layer make_layer(std::size_t in, std::size_t out, Rng& rng);

MlpBlock make_block(std::size_t in_dim, const std::vector<std::size_t>& layer_sizes,
                    Activation activation, bool activate_output, Rng& rng);

// Per-layer intermediate values recorded by a forward pass, consumed by backward.
struct BlockTrace {
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> post;  // post-activation per layer
};

std::vector<double> block_forward(const MlpBlock& block, std::span<const double> x,
                                  BlockTrace* trace = nullptr);

// Gradient accumulator with the same shapes as the block it mirrors.
struct BlockGrads {
    std::vector<Layer> layers;
};

BlockGrads make_grads(const MlpBlock& block);
void zero_grads(BlockGrads& grads);
void scale_grads(BlockGrads& grads, double factor);

// Backpropagates d_out (dL/d block output) through the block, accumulating
// parameter gradients into grads and returning dL/d block input.
std::vector<double> block_backward(const MlpBlock& block, std::span<const double> x,
                                   const BlockTrace& trace, std::span<const double> d_out,
                                   BlockGrads& grads);

// Plain SGD step: w -= lr * g.
void sgd_step(MlpBlock& block, const BlockGrads& grads, double lr);

// Momentum SGD step: velocity = momentum * velocity + g; w -= lr * velocity.
void sgd_step(MlpBlock& block, const BlockGrads& grads, double lr, double momentum,
              BlockGrads& velocity);

bool all_finite(const MlpBlock& block);

}  // namespace alsim
