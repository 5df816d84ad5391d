#include "alsim/ssl.hpp"

#include <cmath>
#include <optional>

#include "alsim/error.hpp"

namespace alsim {

std::vector<double> augment(std::span<const double> features, const AugmentSpec& spec, Rng& rng) {
    std::vector<double> out(features.begin(), features.end());
    if (spec.noise_std > 0.0)
        for (double& v : out) v += rng.normal(0.0, spec.noise_std);
    if (spec.mask_prob > 0.0)
        for (double& v : out)
            if (rng.bernoulli(spec.mask_prob)) v = 0.0;
    return out;
}

namespace {

double norm(std::span<const double> v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    return std::sqrt(sq);
}

}  // namespace

double byol_loss(std::span<const double> online_pred, std::span<const double> target_proj) {
    if (online_pred.size() != target_proj.size())
        throw ConfigError("byol_loss: dimension mismatch");
    double nu = norm(online_pred);
    double nv = norm(target_proj);
    if (nu == 0.0 || nv == 0.0) throw TrainError("byol_loss: zero-norm input");
    double sum = 0.0;
    for (std::size_t i = 0; i < online_pred.size(); ++i) {
        double diff = online_pred[i] / nu - target_proj[i] / nv;
        sum += diff * diff;
    }
    return sum;
}

void ema_update(ByolState& state) {
    auto blend = [&](MlpBlock& target, const MlpBlock& online) {
        if (target.layers.size() != online.layers.size())
            throw ConfigError("ema_update: block shape mismatch");
        for (std::size_t li = 0; li < target.layers.size(); ++li) {
            Layer& t = target.layers[li];
            const Layer& o = online.layers[li];
            if (t.in != o.in || t.out != o.out)
                throw ConfigError("ema_update: layer shape mismatch");
            for (std::size_t i = 0; i < t.w.size(); ++i)
                t.w[i] = state.tau * t.w[i] + (1.0 - state.tau) * o.w[i];
            for (std::size_t i = 0; i < t.b.size(); ++i)
                t.b[i] = state.tau * t.b[i] + (1.0 - state.tau) * o.b[i];
        }
    };
    blend(state.target_encoder, state.online_encoder);
    blend(state.target_projector, state.online_projector);
}

ByolState init_byol_state(std::size_t input_dim, const ByolConfig& config) {
    if (config.tau < 0.0 || config.tau > 1.0) throw ConfigError("byol: tau must lie in [0, 1]");
    if (config.augment.mask_prob < 0.0 || config.augment.mask_prob >= 1.0)
        throw ConfigError("byol: mask_prob must lie in [0, 1)");
    if (config.augment.noise_std < 0.0) throw ConfigError("byol: noise_std must be nonnegative");

    Rng root(config.seed);
    Rng enc_rng = root.child(stream_id("encoder"));
    Rng proj_rng = root.child(stream_id("projector"));
    Rng pred_rng = root.child(stream_id("predictor"));

    ByolState state;
    state.tau = config.tau;
    state.online_encoder =
        make_block(input_dim, config.encoder_hidden, config.activation, true, enc_rng);
    std::size_t p = state.online_encoder.output_dim();
    // Projector and predictor: one hidden layer of width 2p, linear output of width p.
    state.online_projector = make_block(p, {2 * p, p}, config.activation, false, proj_rng);
    state.online_predictor = make_block(p, {2 * p, p}, config.activation, false, pred_rng);
    state.target_encoder = state.online_encoder;
    state.target_projector = state.online_projector;
    return state;
}

ByolGrads make_byol_grads(const ByolState& state) {
    ByolGrads grads;
    grads.encoder = make_grads(state.online_encoder);
    grads.projector = make_grads(state.online_projector);
    grads.predictor = make_grads(state.online_predictor);
    return grads;
}

namespace {

// One direction of the objective: online branch sees `on_view`, target branch
// sees `tgt_view`. Returns the loss and accumulates online-branch gradients.
// A zero-norm branch output (a fully dead relu row can produce one early in
// training) makes the normalized loss undefined; such directions are skipped
// and contribute nothing.
std::optional<double> byol_direction_grads(const ByolState& state,
                                           std::span<const double> on_view,
                                           std::span<const double> tgt_view, ByolGrads& grads) {
    BlockTrace enc_trace, proj_trace, pred_trace;
    std::vector<double> enc_out = block_forward(state.online_encoder, on_view, &enc_trace);
    std::vector<double> proj_out = block_forward(state.online_projector, enc_out, &proj_trace);
    std::vector<double> pred_out = block_forward(state.online_predictor, proj_out, &pred_trace);

    std::vector<double> tgt =
        block_forward(state.target_projector, block_forward(state.target_encoder, tgt_view));

    if (norm(pred_out) == 0.0 || norm(tgt) == 0.0) return std::nullopt;
    double loss = byol_loss(pred_out, tgt);

    // d/du ||u_hat - v_hat||^2 = (2/||u||) * ((u_hat . v_hat) u_hat - v_hat)
    double nu = norm(pred_out);
    double nv = norm(tgt);
    std::size_t p = pred_out.size();
    std::vector<double> u_hat(p), v_hat(p);
    for (std::size_t i = 0; i < p; ++i) {
        u_hat[i] = pred_out[i] / nu;
        v_hat[i] = tgt[i] / nv;
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < p; ++i) dot += u_hat[i] * v_hat[i];
    std::vector<double> d_pred(p);
    for (std::size_t i = 0; i < p; ++i) d_pred[i] = 2.0 / nu * (dot * u_hat[i] - v_hat[i]);

    std::vector<double> d_proj =
        block_backward(state.online_predictor, proj_out, pred_trace, d_pred, grads.predictor);
    std::vector<double> d_enc =
        block_backward(state.online_projector, enc_out, proj_trace, d_proj, grads.projector);
    block_backward(state.online_encoder, on_view, enc_trace, d_enc, grads.encoder);
    return loss;
}

}  // namespace

double byol_sample_grads(const ByolState& state, std::span<const double> view1,
                         std::span<const double> view2, ByolGrads& grads) {
    double loss = byol_direction_grads(state, view1, view2, grads).value_or(0.0);
    loss += byol_direction_grads(state, view2, view1, grads).value_or(0.0);
    return loss;
}

PretrainResult pretrain(const Archive& archive, const ByolConfig& config) {
    if (archive.size() == 0) throw ConfigError("pretrain: empty archive");
    if (config.epochs == 0) throw ConfigError("pretrain: epochs must be at least 1");
    if (config.batch_size == 0) throw ConfigError("pretrain: batch_size must be at least 1");
    if (config.learning_rate < 0.0) throw ConfigError("pretrain: learning_rate must be nonnegative");

    ByolState state = init_byol_state(archive.feature_dim, config);
    ByolGrads grads = make_byol_grads(state);
    ByolGrads vel = make_byol_grads(state);

    Rng root(config.seed);
    Rng order_rng = root.child(stream_id("batch-order"));
    Rng aug_rng = root.child(stream_id("augment"));

    std::vector<std::size_t> order(archive.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    PretrainResult result;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        order_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            std::size_t end = std::min(order.size(), start + config.batch_size);
            zero_grads(grads.encoder);
            zero_grads(grads.projector);
            zero_grads(grads.predictor);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const Sample& sample = archive.samples[order[k]];
                std::vector<double> v1 = augment(sample.features, config.augment, aug_rng);
                std::vector<double> v2 = augment(sample.features, config.augment, aug_rng);
                batch_loss += byol_sample_grads(state, v1, v2, grads);
            }
            if (!std::isfinite(batch_loss))
                throw TrainError("pretraining diverged at epoch " + std::to_string(epoch));
            double inv = 1.0 / static_cast<double>(end - start);
            scale_grads(grads.encoder, inv);
            scale_grads(grads.projector, inv);
            scale_grads(grads.predictor, inv);
            sgd_step(state.online_encoder, grads.encoder, config.learning_rate, config.momentum,
                     vel.encoder);
            sgd_step(state.online_projector, grads.projector, config.learning_rate, config.momentum,
                     vel.projector);
            sgd_step(state.online_predictor, grads.predictor, config.learning_rate, config.momentum,
                     vel.predictor);
            ema_update(state);
            epoch_loss += batch_loss;
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(archive.size()));
    }
    result.encoder = state.online_encoder;
    result.state = std::move(state);
    return result;
}

ModelParams transfer(const MlpBlock& encoder, std::size_t num_classes, std::uint64_t head_seed) {
    if (num_classes == 0) throw ConfigError("transfer: num_classes must be positive");
    ModelParams params;
    params.encoder = encoder;
    Rng rng(head_seed);
    params.head = make_layer(encoder.output_dim(), num_classes, rng);
    return params;
}

}  // namespace alsim
