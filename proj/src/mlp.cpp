#include "alsim/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "alsim/error.hpp"

namespace alsim {

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
    }
    return "relu";
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::identity;
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    throw ConfigError("unknown activation: " + name);
}

namespace {

double activate(Activation a, double x) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::tanh: return std::tanh(x);
    }
    return x;
}

// Derivative expressed through the pre-activation value.
double activate_grad(Activation a, double pre) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: {
            double t = std::tanh(pre);
            return 1.0 - t * t;
        }
    }
    return 1.0;
}

}  // namespace

Layer make_layer(std::size_t in, std::size_t out, Rng& rng) {
    if (in == 0 || out == 0) throw ConfigError("layer dimensions must be positive");
    Layer layer;
    layer.in = in;
    layer.out = out;
    layer.w.resize(in * out);
    layer.b.assign(out, 0.0);
    double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& v : layer.w) v = rng.uniform(-bound, bound);
    return layer;
}

MlpBlock make_block(std::size_t in_dim, const std::vector<std::size_t>& layer_sizes,
                    Activation activation, bool activate_output, Rng& rng) {
    if (in_dim == 0) throw ConfigError("block input dimension must be positive");
    MlpBlock block;
    block.in_dim = in_dim;
    block.activation = activation;
    block.activate_output = activate_output;
    std::size_t prev = in_dim;
    for (std::size_t sz : layer_sizes) {
        block.layers.push_back(make_layer(prev, sz, rng));
        prev = sz;
    }
    return block;
}

std::vector<double> block_forward(const MlpBlock& block, std::span<const double> x,
                                  BlockTrace* trace) {
    if (x.size() != block.in_dim) throw ConfigError("block input dimension mismatch");
    if (trace) {
        trace->pre.assign(block.layers.size(), {});
        trace->post.assign(block.layers.size(), {});
    }
    std::vector<double> cur(x.begin(), x.end());
    for (std::size_t li = 0; li < block.layers.size(); ++li) {
        const Layer& layer = block.layers[li];
        std::vector<double> pre(layer.out);
        for (std::size_t o = 0; o < layer.out; ++o) {
            double acc = layer.b[o];
            const double* row = layer.w.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * cur[i];
            pre[o] = acc;
        }
        bool last = li + 1 == block.layers.size();
        std::vector<double> post(layer.out);
        if (!last || block.activate_output) {
            for (std::size_t o = 0; o < layer.out; ++o) post[o] = activate(block.activation, pre[o]);
        } else {
            post = pre;
        }
        if (trace) {
            trace->pre[li] = pre;
            trace->post[li] = post;
        }
        cur = std::move(post);
    }
    return cur;
}

BlockGrads make_grads(const MlpBlock& block) {
    BlockGrads grads;
    grads.layers.resize(block.layers.size());
    for (std::size_t li = 0; li < block.layers.size(); ++li) {
        const Layer& layer = block.layers[li];
        grads.layers[li].in = layer.in;
        grads.layers[li].out = layer.out;
        grads.layers[li].w.assign(layer.w.size(), 0.0);
        grads.layers[li].b.assign(layer.b.size(), 0.0);
    }
    return grads;
}

void zero_grads(BlockGrads& grads) {
    for (Layer& layer : grads.layers) {
        std::fill(layer.w.begin(), layer.w.end(), 0.0);
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
}

void scale_grads(BlockGrads& grads, double factor) {
    for (Layer& layer : grads.layers) {
        for (double& v : layer.w) v *= factor;
        for (double& v : layer.b) v *= factor;
    }
}

std::vector<double> block_backward(const MlpBlock& block, std::span<const double> x,
                                   const BlockTrace& trace, std::span<const double> d_out,
                                   BlockGrads& grads) {
    if (trace.pre.size() != block.layers.size())
        throw std::logic_error("block_backward: trace does not match block");
    std::vector<double> delta(d_out.begin(), d_out.end());
    for (std::size_t li = block.layers.size(); li-- > 0;) {
        const Layer& layer = block.layers[li];
        bool last = li + 1 == block.layers.size();
        // dL/d pre-activation
        if (!last || block.activate_output) {
            for (std::size_t o = 0; o < layer.out; ++o)
                delta[o] *= activate_grad(block.activation, trace.pre[li][o]);
        }
        std::span<const double> input =
            li == 0 ? x : std::span<const double>(trace.post[li - 1]);
        Layer& g = grads.layers[li];
        for (std::size_t o = 0; o < layer.out; ++o) {
            double d = delta[o];
            g.b[o] += d;
            double* grow = g.w.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) grow[i] += d * input[i];
        }
        std::vector<double> prev(layer.in, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
            double d = delta[o];
            const double* row = layer.w.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) prev[i] += d * row[i];
        }
        delta = std::move(prev);
    }
    return delta;
}

void sgd_step(MlpBlock& block, const BlockGrads& grads, double lr) {
    for (std::size_t li = 0; li < block.layers.size(); ++li) {
        Layer& layer = block.layers[li];
        const Layer& g = grads.layers[li];
        for (std::size_t i = 0; i < layer.w.size(); ++i) layer.w[i] -= lr * g.w[i];
        for (std::size_t i = 0; i < layer.b.size(); ++i) layer.b[i] -= lr * g.b[i];
    }
}

void sgd_step(MlpBlock& block, const BlockGrads& grads, double lr, double momentum,
              BlockGrads& velocity) {
    if (momentum == 0.0) {
        sgd_step(block, grads, lr);
        return;
    }
    for (std::size_t li = 0; li < block.layers.size(); ++li) {
        Layer& layer = block.layers[li];
        const Layer& g = grads.layers[li];
        Layer& v = velocity.layers[li];
        for (std::size_t i = 0; i < layer.w.size(); ++i) {
            v.w[i] = momentum * v.w[i] + g.w[i];
            layer.w[i] -= lr * v.w[i];
        }
        for (std::size_t i = 0; i < layer.b.size(); ++i) {
            v.b[i] = momentum * v.b[i] + g.b[i];
            layer.b[i] -= lr * v.b[i];
        }
    }
}

bool all_finite(const MlpBlock& block) {
    for (const Layer& layer : block.layers) {
        for (double v : layer.w)
            if (!std::isfinite(v)) return false;
        for (double v : layer.b)
            if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace alsim
