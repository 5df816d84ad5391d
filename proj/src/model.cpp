#include "alsim/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "alsim/error.hpp"

namespace alsim {

namespace {

constexpr double kLogClamp = 1e-12;

double sigmoid(double z) {
    if (z >= 0.0) {
        double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

ModelParams init_model(std::size_t input_dim, const std::vector<std::size_t>& hidden_sizes,
                       std::size_t num_classes, std::uint64_t seed, Activation activation) {
    if (input_dim == 0 || num_classes == 0)
        throw ConfigError("model: input_dim and num_classes must be positive");
    for (std::size_t h : hidden_sizes)
        if (h == 0) throw ConfigError("model: hidden sizes must be positive");
    Rng root(seed);
    Rng enc_rng = root.child(stream_id("encoder"));
    Rng head_rng = root.child(stream_id("head"));
    ModelParams params;
    params.encoder = make_block(input_dim, hidden_sizes, activation, true, enc_rng);
    params.head = make_layer(params.encoder.output_dim(), num_classes, head_rng);
    return params;
}

ForwardResult forward(const ModelParams& params, std::span<const double> features) {
    if (features.size() != params.input_dim())
        throw ConfigError("forward: feature dimension mismatch");
    ForwardResult result;
    result.penultimate = block_forward(params.encoder, features);
    const Layer& head = params.head;
    result.logits.resize(head.out);
    result.probs.resize(head.out);
    for (std::size_t j = 0; j < head.out; ++j) {
        double acc = head.b[j];
        const double* row = head.w.data() + j * head.in;
        for (std::size_t r = 0; r < head.in; ++r) acc += row[r] * result.penultimate[r];
        result.logits[j] = acc;
        result.probs[j] = sigmoid(acc);
    }
    return result;
}

double bce_loss(std::span<const double> probs, const MultiLabelVector& labels) {
    if (probs.size() != labels.size()) throw ConfigError("bce_loss: length mismatch");
    const std::size_t C = probs.size();
    double sum = 0.0;
    for (std::size_t j = 0; j < C; ++j) {
        double p = probs[j];
        double y = labels.present(j) ? 1.0 : 0.0;
        sum += y * std::log(std::max(p, kLogClamp)) +
               (1.0 - y) * std::log(std::max(1.0 - p, kLogClamp));
    }
    return -sum / static_cast<double>(C);
}

ModelParams train(const ModelParams& params, const std::vector<Sample>& labeled,
                  const TrainConfig& config) {
    if (labeled.empty()) throw ConfigError("train: labeled set is empty");
    if (config.epochs == 0) throw ConfigError("train: epochs must be at least 1");
    if (config.batch_size == 0) throw ConfigError("train: batch_size must be at least 1");
    if (config.learning_rate <= 0.0) throw ConfigError("train: learning_rate must be positive");
    if (config.lr_decay_factor <= 0.0 || config.lr_decay_factor > 1.0)
        throw ConfigError("train: lr_decay_factor must lie in (0, 1]");
    if (config.lr_decay_epoch < 1 || config.lr_decay_epoch > config.epochs)
        throw ConfigError("train: lr_decay_epoch must lie in [1, epochs]");
    if (config.augment_noise_std < 0.0)
        throw ConfigError("train: augment_noise_std must be nonnegative");
    const std::size_t d = params.input_dim();
    const std::size_t C = params.num_classes();
    for (const Sample& s : labeled) {
        if (s.features.size() != d) throw ConfigError("train: feature dimension mismatch");
        if (s.labels.size() != C) throw ConfigError("train: label dimension mismatch");
    }

    ModelParams model = params;
    MlpBlock head_block;  // wrap the head so the shared block machinery drives both stages
    head_block.in_dim = model.head.in;
    head_block.layers = {model.head};
    head_block.activate_output = false;

    BlockGrads enc_grads = make_grads(model.encoder);
    BlockGrads head_grads = make_grads(head_block);

    Rng root(config.seed);
    Rng order_rng = root.child(stream_id("batch-order"));
    Rng noise_rng = root.child(stream_id("augment"));

    std::vector<std::size_t> order(labeled.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> x(d);
    BlockTrace enc_trace;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        double lr = config.learning_rate;
        if (epoch > config.lr_decay_epoch) lr *= config.lr_decay_factor;
        order_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            std::size_t end = std::min(order.size(), start + config.batch_size);
            zero_grads(enc_grads);
            zero_grads(head_grads);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const Sample& sample = labeled[order[k]];
                x.assign(sample.features.begin(), sample.features.end());
                if (config.augment_noise_std > 0.0)
                    for (double& v : x) v += noise_rng.normal(0.0, config.augment_noise_std);

                std::vector<double> h = block_forward(model.encoder, x, &enc_trace);
                std::vector<double> logits(C), probs(C);
                for (std::size_t j = 0; j < C; ++j) {
                    double acc = model.head.b[j];
                    const double* row = model.head.w.data() + j * model.head.in;
                    for (std::size_t r = 0; r < model.head.in; ++r) acc += row[r] * h[r];
                    logits[j] = acc;
                    probs[j] = sigmoid(acc);
                }
                batch_loss += bce_loss(probs, sample.labels);

                // Sigmoid and BCE compose to dL/dlogit_j = (p_j - y_j) / C.
                std::vector<double> dlogits(C);
                for (std::size_t j = 0; j < C; ++j)
                    dlogits[j] = (probs[j] - (sample.labels.present(j) ? 1.0 : 0.0)) /
                                 static_cast<double>(C);
                Layer& hg = head_grads.layers[0];
                std::vector<double> dh(model.head.in, 0.0);
                for (std::size_t j = 0; j < C; ++j) {
                    double dj = dlogits[j];
                    hg.b[j] += dj;
                    double* grow = hg.w.data() + j * model.head.in;
                    const double* row = model.head.w.data() + j * model.head.in;
                    for (std::size_t r = 0; r < model.head.in; ++r) {
                        grow[r] += dj * h[r];
                        dh[r] += dj * row[r];
                    }
                }
                if (!config.freeze_encoder && !model.encoder.layers.empty())
                    block_backward(model.encoder, x, enc_trace, dh, enc_grads);
            }
            if (!std::isfinite(batch_loss))
                throw TrainError("training diverged at epoch " + std::to_string(epoch));
            double inv = 1.0 / static_cast<double>(end - start);
            scale_grads(head_grads, inv);
            const Layer& hg = head_grads.layers[0];
            for (std::size_t i = 0; i < model.head.w.size(); ++i) model.head.w[i] -= lr * hg.w[i];
            for (std::size_t i = 0; i < model.head.b.size(); ++i) model.head.b[i] -= lr * hg.b[i];
            if (!config.freeze_encoder) {
                scale_grads(enc_grads, inv);
                sgd_step(model.encoder, enc_grads, lr);
            }
        }
        // NaN can slip into the weights without ever surfacing in the loss
        // (relu maps NaN pre-activations to zero), so check the params too.
        bool head_finite = true;
        for (double v : model.head.w) head_finite &= std::isfinite(v);
        for (double v : model.head.b) head_finite &= std::isfinite(v);
        if (!head_finite || !all_finite(model.encoder))
            throw TrainError("training diverged at epoch " + std::to_string(epoch));
    }
    return model;
}

GradientEmbedding last_layer_gradient(const ModelParams& params, std::span<const double> features,
                                      const MultiLabelVector& labels) {
    if (labels.size() != params.num_classes())
        throw ConfigError("last_layer_gradient: label dimension mismatch");
    ForwardResult fr = forward(params, features);
    const std::size_t p = params.penultimate_dim();
    const std::size_t C = params.num_classes();
    GradientEmbedding g;
    g.values.resize(p * C);
    double sq = 0.0;
    for (std::size_t j = 0; j < C; ++j) {
        double dj = (fr.probs[j] - (labels.present(j) ? 1.0 : 0.0)) / static_cast<double>(C);
        for (std::size_t r = 0; r < p; ++r) {
            double v = dj * fr.penultimate[r];
            g.values[j * p + r] = v;
            sq += v * v;
        }
    }
    g.magnitude = std::sqrt(sq);
    return g;
}

// ---------------------------------------------------------------------------
// Checkpoint container. Text based; doubles are written with 17 significant
// digits, which round-trips IEEE754 exactly.

namespace {

constexpr char kMagic[] = "alsim-params v1";

void write_values(std::ostream& out, const std::vector<double>& values) {
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", values[i]);
        out << (i ? " " : "") << buf;
    }
    out << "\n";
}

std::vector<double> read_values(std::istream& in, std::size_t n, const std::string& path) {
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i)
        if (!(in >> values[i])) throw FormatError(path + ": truncated parameter data");
    return values;
}

void write_block(std::ostream& out, const MlpBlock& block) {
    out << "input_dim " << block.in_dim << "\n";
    out << "activation " << activation_name(block.activation) << "\n";
    out << "activate_output " << (block.activate_output ? 1 : 0) << "\n";
    out << "layers " << block.layers.size() << "\n";
    for (const Layer& layer : block.layers) {
        out << "layer " << layer.in << " " << layer.out << "\n";
        write_values(out, layer.w);
        write_values(out, layer.b);
    }
}

MlpBlock read_block(std::istream& in, const std::string& path) {
    auto expect = [&](const char* key) {
        std::string word;
        if (!(in >> word) || word != key)
            throw FormatError(path + ": expected '" + key + "' in checkpoint");
    };
    MlpBlock block;
    expect("input_dim");
    in >> block.in_dim;
    expect("activation");
    std::string act;
    in >> act;
    block.activation = activation_from_name(act);
    expect("activate_output");
    int flag = 0;
    in >> flag;
    block.activate_output = flag != 0;
    expect("layers");
    std::size_t n = 0;
    in >> n;
    for (std::size_t li = 0; li < n; ++li) {
        expect("layer");
        Layer layer;
        if (!(in >> layer.in >> layer.out)) throw FormatError(path + ": bad layer header");
        layer.w = read_values(in, layer.in * layer.out, path);
        layer.b = read_values(in, layer.out, path);
        block.layers.push_back(std::move(layer));
    }
    if (!all_finite(block)) throw FormatError(path + ": checkpoint holds non-finite values");
    return block;
}

std::string read_role(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw FormatError(path + ": not an alsim-params v1 checkpoint");
    std::string key, role;
    if (!(in >> key >> role) || key != "role")
        throw FormatError(path + ": missing role field");
    return role;
}

}  // namespace

void save_model(const ModelParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << kMagic << "\n";
    out << "role classifier\n";
    write_block(out, params.encoder);
    MlpBlock head_block;
    head_block.in_dim = params.head.in;
    head_block.layers = {params.head};
    head_block.activate_output = false;
    head_block.activation = Activation::identity;
    write_block(out, head_block);
    if (!out) throw IoError("write failed: " + path);
}

ModelParams load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::string role = read_role(in, path);
    if (role != "classifier")
        throw FormatError(path + ": expected role classifier, got " + role);
    ModelParams params;
    params.encoder = read_block(in, path);
    MlpBlock head_block = read_block(in, path);
    if (head_block.layers.size() != 1) throw FormatError(path + ": malformed head block");
    params.head = head_block.layers[0];
    return params;
}

void save_encoder(const MlpBlock& encoder, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << kMagic << "\n";
    out << "role pretrained-encoder\n";
    write_block(out, encoder);
    if (!out) throw IoError("write failed: " + path);
}

MlpBlock load_encoder(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::string role = read_role(in, path);
    if (role != "pretrained-encoder")
        throw FormatError(path + ": expected role pretrained-encoder, got " + role);
    return read_block(in, path);
}

}  // namespace alsim
