#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace dcolor {

/// Fully connected regressor: rectifier hidden layers, affine output layer.
/// Layer l maps o^{l-1} to W_l o^{l-1} + b_l, where b_l holds the weights of
/// the constant-one bias neuron.
class Network {
public:
    Network() = default;
    /// Zero-initialised network with the given layer sizes (input first).
    explicit Network(std::vector<int> layer_sizes);

    const std::vector<int>& layer_sizes() const { return sizes_; }
    std::size_t input_size() const { return static_cast<std::size_t>(sizes_.front()); }
    std::size_t output_size() const { return static_cast<std::size_t>(sizes_.back()); }
    /// Number of weight layers (layer_sizes().size() - 1).
    std::size_t depth() const { return weights_.size(); }
    std::size_t parameter_count() const;

    Eigen::MatrixXd& weights(std::size_t layer) { return weights_[layer]; }
    const Eigen::MatrixXd& weights(std::size_t layer) const { return weights_[layer]; }
    Eigen::VectorXd& biases(std::size_t layer) { return biases_[layer]; }
    const Eigen::VectorXd& biases(std::size_t layer) const { return biases_[layer]; }

    /// Column-per-sample batch evaluation.
    Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const;
    Eigen::VectorXd forward(std::span<const double> x) const;

    /// Rounds every parameter to the nearest binary32 value, so the network
    /// equals its own serialized form.
    void round_to_binary32();

    bool all_finite() const;
    bool operator==(const Network& other) const;

private:
    std::vector<int> sizes_;
    std::vector<Eigen::MatrixXd> weights_;  // (out x in)
    std::vector<Eigen::VectorXd> biases_;
};

/// [d, d/2, d/2, d/2, 2]: three hidden layers at half the input width.
std::vector<int> default_layer_sizes(std::size_t input_size);

/// He-style init: weights ~ N(0, scale^2 * 2 / fan_in), biases zero.
Network init_network(std::span<const int> layer_sizes, std::uint64_t seed, double scale = 1.0);

/// Samples as columns.
struct TrainingSet {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;

    std::size_t size() const { return static_cast<std::size_t>(inputs.cols()); }
};

/// Mean over samples of the squared Euclidean output error.
double loss(const Network& net, const TrainingSet& batch);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    double loss = 0.0;
};

/// Exact gradient of loss() with respect to every weight and bias. The
/// rectifier derivative at zero is taken as zero.
Gradients backward(const Network& net, const TrainingSet& batch);

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 128;
    int epochs = 30;
    std::uint64_t seed = 1;
    double weight_init_scale = 1.0;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

struct TrainResult {
    Network network;
    std::vector<double> loss_history;  // mean minibatch loss per epoch
    std::size_t steps = 0;
};

/// Mini-batch SGD with momentum; samples reshuffled every epoch from a
/// generator seeded by cfg.seed. Throws TrainingDiverged on a non-finite loss.
TrainResult train(Network net, const TrainingSet& samples, const TrainConfig& cfg);

}  // namespace dcolor
