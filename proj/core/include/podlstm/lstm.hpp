#pragma once

#include <cstdint>
#include <vector>

#include "podlstm/dataset.hpp"

namespace podlstm::lstm {

/// One layer's parameters. Gates act on the concatenation [h_prev, x], so
/// every weight matrix is n_h x (n_h + n_x): forget, input, candidate and
/// output gate in that order throughout this module.
struct LstmLayerParams {
    Eigen::MatrixXd w_f, w_i, w_c, w_o;
    Eigen::VectorXd b_f, b_i, b_c, b_o;

    int hidden_size() const { return static_cast<int>(w_f.rows()); }
    int input_size() const { return static_cast<int>(w_f.cols() - w_f.rows()); }
    void validate() const;
};

struct CellState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

/// One recurrence step: gate activations from [h_prev, x], then
/// c = g_f (*) c_prev + g_i (*) c_hat and h = g_o (*) tanh(c).
CellState cell_forward(const Eigen::VectorXd& x, const CellState& prev,
                       const LstmLayerParams& params);

/// Stacked layers evaluated window-wise with zero initial states. When
/// `has_output_layer` is false the last layer's hidden size doubles as the
/// output dimension.
struct LstmModel {
    std::vector<LstmLayerParams> layers;
    bool has_output_layer = false;
    Eigen::MatrixXd output_weight; // out x n_h of last layer
    Eigen::VectorXd output_bias;
    int window_length = 0;
    dataset::Normalization normalization;

    int input_size() const { return layers.front().input_size(); }
    int output_size() const {
        return has_output_layer ? static_cast<int>(output_weight.rows())
                                : layers.back().hidden_size();
    }
    void validate() const;
};

/// Seeded construction: uniform +-sqrt(6 / (n_h + n_x + n_h)) weights, zero
/// biases except the forget gate's, which starts at 1. Normalization starts
/// as the identity map.
LstmModel make_model(const std::vector<int>& hidden_sizes, int input_size, int output_size,
                     bool output_layer, int window_length, std::uint64_t seed);

/// Prediction in normalized feature space. Consumes the last `valid_length`
/// columns of `window`; any leading padding is skipped entirely.
Eigen::VectorXd forward_normalized(const LstmModel& model, const Eigen::MatrixXd& window,
                                   int valid_length);

/// Same evaluation, but the result is mapped back through the model's target
/// normalization: a raw reduced-state increment. The window must already be
/// normalized.
Eigen::VectorXd forward(const LstmModel& model, const Eigen::MatrixXd& window,
                        int valid_length);

/// Mean squared error over components: (1/r) sum (target - pred)^2.
double loss_se(const Eigen::VectorXd& target, const Eigen::VectorXd& pred);

/// Parameter-shaped gradient storage.
struct Gradients {
    std::vector<LstmLayerParams> layers;
    Eigen::MatrixXd output_weight;
    Eigen::VectorXd output_bias;
};

Gradients zero_gradients(const LstmModel& model);

/// Mean loss over a batch of raw samples (normalization applied internally).
double batch_loss(const LstmModel& model, const std::vector<dataset::WindowSample>& batch);

/// Backpropagation through time: gradients of the mean batch loss with
/// respect to every parameter, plus that loss. Raw samples in; loss is
/// computed in normalized space.
struct BackwardResult {
    Gradients gradients;
    double loss = 0.0;
};
BackwardResult backward(const LstmModel& model,
                        const std::vector<dataset::WindowSample>& batch);

/// Running mean of squared gradients per parameter, plus the update
/// constants.
struct RmspropState {
    Gradients accumulators;
    double rho = 0.9;
    double epsilon = 1e-7;
    double learning_rate = 0.001;
};

RmspropState make_rmsprop_state(const LstmModel& model, double learning_rate,
                                double rho = 0.9, double epsilon = 1e-7);

/// a <- rho a + (1 - rho) g^2; p <- p - lr g / (sqrt(a) + eps), elementwise.
void rmsprop_step(LstmModel& model, const Gradients& grads, RmspropState& state);

struct TrainConfig {
    int epochs = 1;
    int batch_size = 1;
    double learning_rate = 0.001;
    std::uint64_t shuffle_seed = 0;
    double clip_norm = 0.0;   // global-norm gradient clip; 0 disables
    double input_noise = 0.0; // std of Gaussian jitter on the state rows of
                              // training windows, in normalized units; makes
                              // the learned map tolerant of its own rollout
                              // error. 0 disables. Validation stays clean.
    double rho = 0.9;
    double epsilon = 1e-7;
};

struct EpochStats {
    double train_loss = 0.0;
    double validation_loss = 0.0;
};

struct TrainResult {
    LstmModel model; // weights from the best-validation epoch
    std::vector<EpochStats> history;
    int best_epoch = 0; // index into history
    double best_validation_loss = 0.0;
};

/// Shuffled mini-batch RMSprop from the given initial model. The returned
/// model is the snapshot with the lowest validation loss, ties resolved to
/// the earliest epoch. Throws NumericError on divergence.
TrainResult train(const LstmModel& initial, const dataset::WindowedDataset& train_set,
                  const dataset::WindowedDataset& validation_set, const TrainConfig& config);

} // namespace podlstm::lstm
