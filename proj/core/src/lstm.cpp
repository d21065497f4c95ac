#include "podlstm/lstm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include "podlstm/errors.hpp"

namespace podlstm::lstm {

namespace {

constexpr std::array<Eigen::MatrixXd LstmLayerParams::*, 4> kGateWeights = {
    &LstmLayerParams::w_f, &LstmLayerParams::w_i, &LstmLayerParams::w_c,
    &LstmLayerParams::w_o};
constexpr std::array<Eigen::VectorXd LstmLayerParams::*, 4> kGateBiases = {
    &LstmLayerParams::b_f, &LstmLayerParams::b_i, &LstmLayerParams::b_c,
    &LstmLayerParams::b_o};

double sigmoid_scalar(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& a) {
    return a.unaryExpr([](double v) { return sigmoid_scalar(v); });
}

// Everything backward needs from one recurrence step.
struct StepCache {
    Eigen::VectorXd z; // [h_prev; x]
    Eigen::VectorXd c_prev;
    Eigen::VectorXd g_f, g_i, c_hat, g_o;
    Eigen::VectorXd c, tanh_c, h;
};

void step_into_cache(const LstmLayerParams& params, StepCache& cache) {
    cache.g_f = sigmoid(params.w_f * cache.z + params.b_f);
    cache.g_i = sigmoid(params.w_i * cache.z + params.b_i);
    cache.c_hat = (params.w_c * cache.z + params.b_c).array().tanh();
    cache.g_o = sigmoid(params.w_o * cache.z + params.b_o);
    cache.c = cache.g_f.cwiseProduct(cache.c_prev) + cache.g_i.cwiseProduct(cache.c_hat);
    cache.tanh_c = cache.c.array().tanh();
    cache.h = cache.g_o.cwiseProduct(cache.tanh_c);
}

// Normalized-space forward pass; fills per-layer step caches when asked.
Eigen::VectorXd run_forward(const LstmModel& model, const Eigen::MatrixXd& window,
                            int valid_length,
                            std::vector<std::vector<StepCache>>* caches) {
    if (valid_length < 1)
        throw ArgumentError("forward: valid_length must be >= 1");
    if (valid_length > model.window_length)
        throw ArgumentError("forward: valid_length " + std::to_string(valid_length) +
                            " exceeds window length " + std::to_string(model.window_length));
    if (window.cols() < valid_length)
        throw ArgumentError("forward: window has fewer columns than valid_length");
    if (window.rows() != model.input_size())
        throw ArgumentError("forward: window has " + std::to_string(window.rows()) +
                            " features, model expects " + std::to_string(model.input_size()));

    const int steps = valid_length;
    const Eigen::Index first = window.cols() - steps;
    const auto n_layers = model.layers.size();
    if (caches) caches->assign(n_layers, std::vector<StepCache>(static_cast<std::size_t>(steps)));

    std::vector<StepCache> local(caches ? 0 : n_layers);
    Eigen::VectorXd top_h;
    for (int s = 0; s < steps; ++s) {
        Eigen::VectorXd x = window.col(first + s);
        for (std::size_t l = 0; l < n_layers; ++l) {
            const auto& params = model.layers[l];
            const int n_h = params.hidden_size();
            StepCache& cache = caches ? (*caches)[l][static_cast<std::size_t>(s)] : local[l];
            Eigen::VectorXd h_prev =
                s == 0 ? Eigen::VectorXd::Zero(n_h)
                       : (caches ? (*caches)[l][static_cast<std::size_t>(s - 1)].h : local[l].h);
            Eigen::VectorXd c_prev =
                s == 0 ? Eigen::VectorXd::Zero(n_h)
                       : (caches ? (*caches)[l][static_cast<std::size_t>(s - 1)].c : local[l].c);
            StepCache next;
            next.z.resize(n_h + params.input_size());
            next.z << h_prev, x;
            next.c_prev = std::move(c_prev);
            step_into_cache(params, next);
            x = next.h;
            cache = std::move(next);
        }
        top_h = x;
    }

    if (model.has_output_layer) return model.output_weight * top_h + model.output_bias;
    return top_h;
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite())
        throw NumericError(std::string(what) + " contains non-finite values");
}

} // namespace

void LstmLayerParams::validate() const {
    const Eigen::Index n_h = w_f.rows();
    const Eigen::Index n_z = w_f.cols();
    if (n_h < 1 || n_z <= n_h)
        throw ArgumentError("LstmLayerParams: weight shape implies non-positive input size");
    for (auto member : kGateWeights) {
        const auto& w = this->*member;
        if (w.rows() != n_h || w.cols() != n_z)
            throw ArgumentError("LstmLayerParams: gate weight shapes disagree");
        check_finite(w, "LstmLayerParams weight");
    }
    for (auto member : kGateBiases) {
        const auto& b = this->*member;
        if (b.size() != n_h) throw ArgumentError("LstmLayerParams: bias size disagrees");
        check_finite(b, "LstmLayerParams bias");
    }
}

void LstmModel::validate() const {
    if (layers.empty()) throw ArgumentError("LstmModel: no layers");
    if (window_length < 1) throw ArgumentError("LstmModel: window_length must be >= 1");
    int expected_input = layers.front().input_size();
    for (const auto& layer : layers) {
        layer.validate();
        if (layer.input_size() != expected_input)
            throw ArgumentError("LstmModel: layer input size does not match previous hidden size");
        expected_input = layer.hidden_size();
    }
    if (has_output_layer) {
        if (output_weight.cols() != layers.back().hidden_size())
            throw ArgumentError("LstmModel: output layer width does not match last hidden size");
        if (output_bias.size() != output_weight.rows())
            throw ArgumentError("LstmModel: output bias size mismatch");
        check_finite(output_weight, "LstmModel output weight");
        check_finite(output_bias, "LstmModel output bias");
    }
    if (normalization.input_shift.size() != input_size() ||
        normalization.input_scale.size() != input_size())
        throw ArgumentError("LstmModel: input normalization size mismatch");
    if (normalization.target_shift.size() != output_size() ||
        normalization.target_scale.size() != output_size())
        throw ArgumentError("LstmModel: target normalization size mismatch");
}

CellState cell_forward(const Eigen::VectorXd& x, const CellState& prev,
                       const LstmLayerParams& params) {
    const int n_h = params.hidden_size();
    const int n_x = params.input_size();
    if (x.size() != n_x)
        throw ArgumentError("cell_forward: input size " + std::to_string(x.size()) +
                            ", layer expects " + std::to_string(n_x));
    if (prev.h.size() != n_h || prev.c.size() != n_h)
        throw ArgumentError("cell_forward: state size does not match hidden size");

    StepCache cache;
    cache.z.resize(n_h + n_x);
    cache.z << prev.h, x;
    cache.c_prev = prev.c;
    step_into_cache(params, cache);
    return {std::move(cache.h), std::move(cache.c)};
}

LstmModel make_model(const std::vector<int>& hidden_sizes, int input_size, int output_size,
                     bool output_layer, int window_length, std::uint64_t seed) {
    if (hidden_sizes.empty()) throw ArgumentError("make_model: no hidden sizes");
    if (input_size < 1 || output_size < 1)
        throw ArgumentError("make_model: input and output sizes must be >= 1");
    if (window_length < 1) throw ArgumentError("make_model: window_length must be >= 1");
    for (int n_h : hidden_sizes)
        if (n_h < 1) throw ArgumentError("make_model: hidden sizes must be >= 1");
    if (!output_layer && hidden_sizes.back() != output_size)
        throw ConfigError("make_model: without an output layer the last hidden size (" +
                          std::to_string(hidden_sizes.back()) + ") must equal the output size (" +
                          std::to_string(output_size) + ")");

    std::mt19937_64 rng(seed);
    auto fill_uniform = [&rng](Eigen::MatrixXd& m, double limit) {
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
    };

    LstmModel model;
    model.window_length = window_length;
    model.has_output_layer = output_layer;
    int n_x = input_size;
    for (int n_h : hidden_sizes) {
        LstmLayerParams layer;
        const double limit = std::sqrt(6.0 / static_cast<double>(n_h + n_x + n_h));
        for (auto member : kGateWeights) {
            (layer.*member).resize(n_h, n_h + n_x);
            fill_uniform(layer.*member, limit);
        }
        for (auto member : kGateBiases) (layer.*member) = Eigen::VectorXd::Zero(n_h);
        layer.b_f.setOnes(); // open forget gates early in training
        model.layers.push_back(std::move(layer));
        n_x = n_h;
    }
    if (output_layer) {
        const double limit = std::sqrt(6.0 / static_cast<double>(n_x + output_size));
        model.output_weight.resize(output_size, n_x);
        fill_uniform(model.output_weight, limit);
        model.output_bias = Eigen::VectorXd::Zero(output_size);
    }

    model.normalization.input_shift = Eigen::VectorXd::Zero(input_size);
    model.normalization.input_scale = Eigen::VectorXd::Ones(input_size);
    model.normalization.target_shift = Eigen::VectorXd::Zero(output_size);
    model.normalization.target_scale = Eigen::VectorXd::Ones(output_size);
    model.validate();
    return model;
}

Eigen::VectorXd forward_normalized(const LstmModel& model, const Eigen::MatrixXd& window,
                                   int valid_length) {
    return run_forward(model, window, valid_length, nullptr);
}

Eigen::VectorXd forward(const LstmModel& model, const Eigen::MatrixXd& window,
                        int valid_length) {
    return model.normalization.invert_target(run_forward(model, window, valid_length, nullptr));
}

double loss_se(const Eigen::VectorXd& target, const Eigen::VectorXd& pred) {
    if (target.size() != pred.size())
        throw ArgumentError("loss_se: dimension mismatch");
    return (target - pred).squaredNorm() / static_cast<double>(target.size());
}

Gradients zero_gradients(const LstmModel& model) {
    Gradients grads;
    grads.layers.reserve(model.layers.size());
    for (const auto& layer : model.layers) {
        LstmLayerParams g;
        for (auto member : kGateWeights)
            (g.*member) = Eigen::MatrixXd::Zero(layer.w_f.rows(), layer.w_f.cols());
        for (auto member : kGateBiases) (g.*member) = Eigen::VectorXd::Zero(layer.w_f.rows());
        grads.layers.push_back(std::move(g));
    }
    if (model.has_output_layer) {
        grads.output_weight =
            Eigen::MatrixXd::Zero(model.output_weight.rows(), model.output_weight.cols());
        grads.output_bias = Eigen::VectorXd::Zero(model.output_bias.size());
    }
    return grads;
}

double batch_loss(const LstmModel& model, const std::vector<dataset::WindowSample>& batch) {
    if (batch.empty()) throw ArgumentError("batch_loss: empty batch");
    double total = 0.0;
    for (const auto& sample : batch) {
        const Eigen::MatrixXd window = model.normalization.apply_inputs(sample.inputs);
        const Eigen::VectorXd target = model.normalization.apply_target(sample.target);
        total += loss_se(target, forward_normalized(model, window, sample.valid_length));
    }
    return total / static_cast<double>(batch.size());
}

BackwardResult backward(const LstmModel& model,
                        const std::vector<dataset::WindowSample>& batch) {
    if (batch.empty()) throw ArgumentError("backward: empty batch");
    const auto n_layers = model.layers.size();
    const int r = model.output_size();

    BackwardResult result;
    result.gradients = zero_gradients(model);
    std::vector<std::vector<StepCache>> caches;

    for (const auto& sample : batch) {
        const Eigen::MatrixXd window = model.normalization.apply_inputs(sample.inputs);
        const Eigen::VectorXd target = model.normalization.apply_target(sample.target);
        const Eigen::VectorXd pred = run_forward(model, window, sample.valid_length, &caches);

        const double sample_loss = loss_se(target, pred);
        if (!std::isfinite(sample_loss))
            throw NumericError("backward: non-finite loss for sample from simulation " +
                               std::to_string(sample.sim_id) + " at step " +
                               std::to_string(sample.time_index));
        result.loss += sample_loss;

        const int steps = sample.valid_length;
        Eigen::VectorXd dy = (2.0 / static_cast<double>(r)) * (pred - target);

        // Gradient flowing into each layer's hidden state from above, per step.
        std::vector<Eigen::VectorXd> dh_ext(static_cast<std::size_t>(steps));
        if (model.has_output_layer) {
            const auto& top_last = caches[n_layers - 1][static_cast<std::size_t>(steps - 1)];
            result.gradients.output_weight.noalias() += dy * top_last.h.transpose();
            result.gradients.output_bias += dy;
            dy = model.output_weight.transpose() * dy;
        }
        const int top_hidden = model.layers.back().hidden_size();
        for (int s = 0; s < steps - 1; ++s)
            dh_ext[static_cast<std::size_t>(s)] = Eigen::VectorXd::Zero(top_hidden);
        dh_ext[static_cast<std::size_t>(steps - 1)] = dy;

        for (std::size_t l = n_layers; l-- > 0;) {
            const auto& params = model.layers[l];
            auto& layer_grads = result.gradients.layers[l];
            const int n_h = params.hidden_size();
            const int n_x = params.input_size();
            std::vector<Eigen::VectorXd> dx(static_cast<std::size_t>(steps));

            Eigen::VectorXd dh_rec = Eigen::VectorXd::Zero(n_h);
            Eigen::VectorXd dc_carry = Eigen::VectorXd::Zero(n_h);
            for (int s = steps - 1; s >= 0; --s) {
                const auto& cache = caches[l][static_cast<std::size_t>(s)];
                const Eigen::VectorXd dh = dh_ext[static_cast<std::size_t>(s)] + dh_rec;

                const Eigen::ArrayXd dc =
                    dc_carry.array() +
                    dh.array() * cache.g_o.array() * (1.0 - cache.tanh_c.array().square());
                const Eigen::VectorXd da_o = dh.array() * cache.tanh_c.array() *
                                             cache.g_o.array() * (1.0 - cache.g_o.array());
                const Eigen::VectorXd da_f = dc * cache.c_prev.array() * cache.g_f.array() *
                                             (1.0 - cache.g_f.array());
                const Eigen::VectorXd da_i = dc * cache.c_hat.array() * cache.g_i.array() *
                                             (1.0 - cache.g_i.array());
                const Eigen::VectorXd da_c =
                    dc * cache.g_i.array() * (1.0 - cache.c_hat.array().square());

                layer_grads.w_f.noalias() += da_f * cache.z.transpose();
                layer_grads.w_i.noalias() += da_i * cache.z.transpose();
                layer_grads.w_c.noalias() += da_c * cache.z.transpose();
                layer_grads.w_o.noalias() += da_o * cache.z.transpose();
                layer_grads.b_f += da_f;
                layer_grads.b_i += da_i;
                layer_grads.b_c += da_c;
                layer_grads.b_o += da_o;

                Eigen::VectorXd dz = params.w_f.transpose() * da_f;
                dz.noalias() += params.w_i.transpose() * da_i;
                dz.noalias() += params.w_c.transpose() * da_c;
                dz.noalias() += params.w_o.transpose() * da_o;

                dh_rec = dz.head(n_h);
                dx[static_cast<std::size_t>(s)] = dz.tail(n_x);
                dc_carry = (dc * cache.g_f.array()).matrix();
            }
            dh_ext = std::move(dx);
        }
    }

    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    for (auto& layer : result.gradients.layers) {
        for (auto member : kGateWeights) (layer.*member) *= inv_batch;
        for (auto member : kGateBiases) (layer.*member) *= inv_batch;
    }
    result.gradients.output_weight *= inv_batch;
    result.gradients.output_bias *= inv_batch;
    result.loss *= inv_batch;
    return result;
}

RmspropState make_rmsprop_state(const LstmModel& model, double learning_rate, double rho,
                                double epsilon) {
    if (learning_rate <= 0.0) throw ArgumentError("rmsprop: learning rate must be positive");
    if (rho <= 0.0 || rho >= 1.0) throw ArgumentError("rmsprop: decay must lie in (0, 1)");
    if (epsilon <= 0.0) throw ArgumentError("rmsprop: epsilon must be positive");
    RmspropState state;
    state.accumulators = zero_gradients(model);
    state.rho = rho;
    state.epsilon = epsilon;
    state.learning_rate = learning_rate;
    return state;
}

namespace {

template <class Tensor>
void rmsprop_update(Tensor& param, const Tensor& grad, Tensor& acc, const RmspropState& state) {
    if (param.rows() != grad.rows() || param.cols() != grad.cols())
        throw ArgumentError("rmsprop_step: gradient shape does not match parameter");
    acc = state.rho * acc + (1.0 - state.rho) * grad.cwiseAbs2();
    param.array() -=
        state.learning_rate * grad.array() / (acc.array().sqrt() + state.epsilon);
}

} // namespace

void rmsprop_step(LstmModel& model, const Gradients& grads, RmspropState& state) {
    if (grads.layers.size() != model.layers.size() ||
        state.accumulators.layers.size() != model.layers.size())
        throw ArgumentError("rmsprop_step: layer count mismatch");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        for (auto member : kGateWeights)
            rmsprop_update(model.layers[l].*member, grads.layers[l].*member,
                           state.accumulators.layers[l].*member, state);
        for (auto member : kGateBiases)
            rmsprop_update(model.layers[l].*member, grads.layers[l].*member,
                           state.accumulators.layers[l].*member, state);
    }
    if (model.has_output_layer) {
        rmsprop_update(model.output_weight, grads.output_weight,
                       state.accumulators.output_weight, state);
        rmsprop_update(model.output_bias, grads.output_bias, state.accumulators.output_bias,
                       state);
    }
}

namespace {

double gradient_norm(const Gradients& grads) {
    double sq = 0.0;
    for (const auto& layer : grads.layers) {
        for (auto member : kGateWeights) sq += (layer.*member).squaredNorm();
        for (auto member : kGateBiases) sq += (layer.*member).squaredNorm();
    }
    sq += grads.output_weight.squaredNorm();
    sq += grads.output_bias.squaredNorm();
    return std::sqrt(sq);
}

void scale_gradients(Gradients& grads, double factor) {
    for (auto& layer : grads.layers) {
        for (auto member : kGateWeights) (layer.*member) *= factor;
        for (auto member : kGateBiases) (layer.*member) *= factor;
    }
    grads.output_weight *= factor;
    grads.output_bias *= factor;
}

} // namespace

TrainResult train(const LstmModel& initial, const dataset::WindowedDataset& train_set,
                  const dataset::WindowedDataset& validation_set, const TrainConfig& config) {
    if (config.epochs < 1) throw ArgumentError("train: epochs must be >= 1");
    if (config.batch_size < 1) throw ArgumentError("train: batch_size must be >= 1");
    if (config.learning_rate <= 0.0) throw ArgumentError("train: learning rate must be positive");
    if (!(config.input_noise >= 0.0) || !std::isfinite(config.input_noise))
        throw ArgumentError("train: input_noise must be >= 0");
    if (train_set.samples.empty() || validation_set.samples.empty())
        throw ArgumentError("train: training and validation sets must be non-empty");
    for (const auto* set : {&train_set, &validation_set}) {
        if (set->reduced_dim + set->param_dim != initial.input_size())
            throw ArgumentError("train: dataset feature count does not match model input");
        if (set->reduced_dim != initial.output_size())
            throw ArgumentError("train: dataset target size does not match model output");
        if (set->window_length != initial.window_length)
            throw ArgumentError("train: dataset window length does not match model");
    }
    initial.validate();

    LstmModel model = initial;
    RmspropState opt =
        make_rmsprop_state(model, config.learning_rate, config.rho, config.epsilon);
    std::mt19937_64 rng(config.shuffle_seed);
    // Separate stream so enabling the jitter does not disturb the epoch
    // shuffles. Drawn from only when input_noise > 0.
    std::mt19937_64 noise_rng(config.shuffle_seed ^ 0x6e6f697365ULL);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    const int state_rows = train_set.reduced_dim;

    const auto n_samples = train_set.samples.size();
    std::vector<std::size_t> order(n_samples);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    result.best_validation_loss = std::numeric_limits<double>::infinity();
    result.history.reserve(static_cast<std::size_t>(config.epochs));

    std::vector<dataset::WindowSample> batch;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = n_samples - 1; i > 0; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i);
            std::swap(order[i], order[pick(rng)]);
        }

        double loss_sum = 0.0;
        std::size_t offset = 0;
        int batch_index = 0;
        while (offset < n_samples) {
            const std::size_t count =
                std::min<std::size_t>(static_cast<std::size_t>(config.batch_size),
                                      n_samples - offset);
            batch.assign(count, {});
            for (std::size_t i = 0; i < count; ++i)
                batch[i] = train_set.samples[order[offset + i]];
            if (config.input_noise > 0.0) {
                // Jitter lives in normalized units; the samples are raw, so
                // scale it back through the per-feature input spread.
                for (auto& sample : batch)
                    for (int r_idx = 0; r_idx < state_rows; ++r_idx)
                        for (int col = 0; col < sample.inputs.cols(); ++col)
                            sample.inputs(r_idx, col) +=
                                config.input_noise *
                                model.normalization.input_scale(r_idx) *
                                unit_normal(noise_rng);
            }

            BackwardResult step;
            try {
                step = backward(model, batch);
            } catch (const NumericError& err) {
                throw NumericError("train: diverged at epoch " + std::to_string(epoch + 1) +
                                   ", batch " + std::to_string(batch_index + 1) + ": " +
                                   err.what());
            }
            if (config.clip_norm > 0.0) {
                const double norm = gradient_norm(step.gradients);
                if (norm > config.clip_norm)
                    scale_gradients(step.gradients, config.clip_norm / norm);
            }
            rmsprop_step(model, step.gradients, opt);
            loss_sum += step.loss * static_cast<double>(count);
            offset += count;
            ++batch_index;
        }

        const double val_loss = batch_loss(model, validation_set.samples);
        if (!std::isfinite(val_loss))
            throw NumericError("train: non-finite validation loss at epoch " +
                               std::to_string(epoch + 1));
        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(n_samples);
        stats.validation_loss = val_loss;
        result.history.push_back(stats);

        if (val_loss < result.best_validation_loss) {
            result.best_validation_loss = val_loss;
            result.best_epoch = epoch;
            result.model = model;
        }
    }
    return result;
}

} // namespace podlstm::lstm
