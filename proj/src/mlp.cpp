#include "dcolor/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "dcolor/error.hpp"

namespace dcolor {

namespace {

void check_sizes(std::span<const int> sizes) {
    if (sizes.size() < 2) {
        throw InvalidArgument("a network needs at least an input and an output layer");
    }
    for (int s : sizes) {
        if (s <= 0) {
            throw InvalidArgument(fmt::format("layer size {} is not positive", s));
        }
    }
}

void check_batch(const Network& net, const TrainingSet& batch) {
    if (batch.size() == 0) {
        throw InvalidArgument("loss over an empty batch");
    }
    if (static_cast<std::size_t>(batch.inputs.rows()) != net.input_size()) {
        throw InvalidArgument(fmt::format("batch has {} features, network expects {}",
                                          batch.inputs.rows(), net.input_size()));
    }
    if (static_cast<std::size_t>(batch.targets.rows()) != net.output_size() ||
        batch.targets.cols() != batch.inputs.cols()) {
        throw InvalidArgument("batch targets do not match network output or sample count");
    }
}

float to_binary32(double v) { return static_cast<float>(v); }

}  // namespace

Network::Network(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
    check_sizes(sizes_);
    for (std::size_t l = 1; l < sizes_.size(); ++l) {
        weights_.push_back(Eigen::MatrixXd::Zero(sizes_[l], sizes_[l - 1]));
        biases_.push_back(Eigen::VectorXd::Zero(sizes_[l]));
    }
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < depth(); ++l) {
        n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
    }
    return n;
}

Eigen::MatrixXd Network::forward(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const {
    if (static_cast<std::size_t>(inputs.rows()) != input_size()) {
        throw InvalidArgument(fmt::format("input has {} features, network expects {}", inputs.rows(),
                                          input_size()));
    }
    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < depth(); ++l) {
        Eigen::MatrixXd z = weights_[l] * a;
        z.colwise() += biases_[l];
        if (l + 1 < depth()) {
            a = z.cwiseMax(0.0);
        } else {
            a = std::move(z);
        }
    }
    return a;
}

Eigen::VectorXd Network::forward(std::span<const double> x) const {
    if (x.size() != input_size()) {
        throw InvalidArgument(
            fmt::format("input has {} features, network expects {}", x.size(), input_size()));
    }
    const Eigen::Map<const Eigen::MatrixXd> col(x.data(), static_cast<Eigen::Index>(x.size()), 1);
    return forward(col).col(0);
}

void Network::round_to_binary32() {
    for (std::size_t l = 0; l < depth(); ++l) {
        weights_[l] = weights_[l].unaryExpr([](double v) { return static_cast<double>(to_binary32(v)); });
        biases_[l] = biases_[l].unaryExpr([](double v) { return static_cast<double>(to_binary32(v)); });
    }
}

bool Network::all_finite() const {
    for (std::size_t l = 0; l < depth(); ++l) {
        if (!weights_[l].allFinite() || !biases_[l].allFinite()) {
            return false;
        }
    }
    return true;
}

bool Network::operator==(const Network& other) const {
    if (sizes_ != other.sizes_) {
        return false;
    }
    for (std::size_t l = 0; l < depth(); ++l) {
        if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) {
            return false;
        }
    }
    return true;
}

std::vector<int> default_layer_sizes(std::size_t input_size) {
    const int in = static_cast<int>(input_size);
    const int hidden = std::max(1, in / 2);
    return {in, hidden, hidden, hidden, 2};
}

Network init_network(std::span<const int> layer_sizes, std::uint64_t seed, double scale) {
    Network net(std::vector<int>(layer_sizes.begin(), layer_sizes.end()));
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < net.depth(); ++l) {
        auto& w = net.weights(l);
        const double stddev = scale * std::sqrt(2.0 / static_cast<double>(w.cols()));
        std::normal_distribution<double> dist(0.0, stddev);
        // Row-major fill order so the draw sequence does not depend on storage.
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                w(r, c) = dist(rng);
            }
        }
    }
    return net;
}

double loss(const Network& net, const TrainingSet& batch) {
    check_batch(net, batch);
    const Eigen::MatrixXd diff = net.forward(batch.inputs) - batch.targets;
    return diff.squaredNorm() / static_cast<double>(batch.size());
}

Gradients backward(const Network& net, const TrainingSet& batch) {
    check_batch(net, batch);
    const std::size_t depth = net.depth();

    // Forward pass keeping every layer's output.
    std::vector<Eigen::MatrixXd> activations;
    activations.reserve(depth + 1);
    activations.push_back(batch.inputs);
    for (std::size_t l = 0; l < depth; ++l) {
        Eigen::MatrixXd z = net.weights(l) * activations.back();
        z.colwise() += net.biases(l);
        if (l + 1 < depth) {
            z = z.cwiseMax(0.0);
        }
        activations.push_back(std::move(z));
    }

    const double n = static_cast<double>(batch.size());
    Eigen::MatrixXd delta = activations.back() - batch.targets;
    Gradients g;
    g.loss = delta.squaredNorm() / n;
    delta *= 2.0 / n;

    g.weights.resize(depth);
    g.biases.resize(depth);
    for (std::size_t l = depth; l-- > 0;) {
        g.weights[l] = delta * activations[l].transpose();
        g.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = net.weights(l).transpose() * delta;
            // Hidden output is zero exactly where the rectifier was inactive.
            delta = (activations[l].array() > 0.0).select(back, 0.0);
        }
    }
    return g;
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw InvalidArgument(fmt::format("learning rate must be >= 0 (got {})", learning_rate));
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw InvalidArgument(fmt::format("momentum must lie in [0,1) (got {})", momentum));
    }
    if (batch_size < 1) {
        throw InvalidArgument(fmt::format("batch size must be >= 1 (got {})", batch_size));
    }
    if (epochs < 0) {
        throw InvalidArgument(fmt::format("epochs must be >= 0 (got {})", epochs));
    }
    if (!(weight_init_scale > 0.0)) {
        throw InvalidArgument("weight_init_scale must be positive");
    }
}

TrainResult train(Network net, const TrainingSet& samples, const TrainConfig& cfg) {
    cfg.validate();
    if (samples.size() == 0) {
        throw InvalidArgument("training on an empty sample set");
    }
    check_batch(net, samples);

    const std::size_t n = samples.size();
    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
    std::mt19937_64 rng(cfg.seed);
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    std::vector<Eigen::MatrixXd> vw;
    std::vector<Eigen::VectorXd> vb;
    for (std::size_t l = 0; l < net.depth(); ++l) {
        vw.push_back(Eigen::MatrixXd::Zero(net.weights(l).rows(), net.weights(l).cols()));
        vb.push_back(Eigen::VectorXd::Zero(net.biases(l).size()));
    }

    TrainResult result;
    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
    TrainingSet mb;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t count = std::min(batch, n - start);
            mb.inputs.resize(samples.inputs.rows(), static_cast<Eigen::Index>(count));
            mb.targets.resize(samples.targets.rows(), static_cast<Eigen::Index>(count));
            for (std::size_t j = 0; j < count; ++j) {
                const Eigen::Index src = order[start + j];
                mb.inputs.col(static_cast<Eigen::Index>(j)) = samples.inputs.col(src);
                mb.targets.col(static_cast<Eigen::Index>(j)) = samples.targets.col(src);
            }
            const Gradients g = backward(net, mb);
            if (!std::isfinite(g.loss)) {
                throw TrainingDiverged(fmt::format(
                    "training diverged at epoch {} (loss is {}); try a smaller learning rate than {}",
                    epoch, g.loss, cfg.learning_rate));
            }
            epoch_loss += g.loss * static_cast<double>(count);
            for (std::size_t l = 0; l < net.depth(); ++l) {
                vw[l] = cfg.momentum * vw[l] - cfg.learning_rate * g.weights[l];
                vb[l] = cfg.momentum * vb[l] - cfg.learning_rate * g.biases[l];
                net.weights(l) += vw[l];
                net.biases(l) += vb[l];
            }
            ++result.steps;
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(n));
    }
    if (!net.all_finite()) {
        throw TrainingDiverged(fmt::format(
            "network parameters became non-finite; try a smaller learning rate than {}",
            cfg.learning_rate));
    }
    result.network = std::move(net);
    return result;
}

}  // namespace dcolor
