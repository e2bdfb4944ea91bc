#include "began/nn.hpp"

#include <cmath>

#include "began/error.hpp"

namespace began {

DenseLayer init_uniform(int n_in, int n_out, Activation activation, RngEngine& rng) {
    if (n_in < 1 || n_out < 1)
        throw ArgumentError("layer dimensions must be >= 1, got n_in=" + std::to_string(n_in) +
                            " n_out=" + std::to_string(n_out));
    const double bound = std::sqrt(9.0 / n_in);
    Tensor weight = Tensor::zeros({n_in, n_out}, /*requires_grad=*/true);
    for (int64_t i = 0; i < weight.size(); ++i) weight.data()[i] = uniform(rng, -bound, bound);
    Tensor bias = Tensor::zeros({n_out}, /*requires_grad=*/true);
    return DenseLayer{weight, bias, activation};
}

Tensor Mlp::forward(const Tensor& x) const {
    if (x.shape().size() != 2 || x.shape()[1] != input_width())
        throw DimensionError("network input " + format_shape(x.shape()) + " does not match first layer width " +
                             std::to_string(input_width()));
    Tensor h = x;
    for (const auto& layer : layers) {
        h = add(matmul(h, layer.weight), layer.bias);
        if (layer.activation == Activation::Relu) h = relu(h);
    }
    if (output_bound > 0.0) h = tanh_scaled(h, output_bound);
    return h;
}

std::vector<Tensor> Mlp::parameters() const {
    std::vector<Tensor> out;
    out.reserve(layers.size() * 2);
    for (const auto& layer : layers) {
        out.push_back(layer.weight);
        out.push_back(layer.bias);
    }
    return out;
}

std::vector<std::string> Mlp::parameter_names(const std::string& prefix) const {
    std::vector<std::string> out;
    out.reserve(layers.size() * 2);
    for (size_t i = 0; i < layers.size(); ++i) {
        out.push_back(prefix + ".layer" + std::to_string(i) + ".weight");
        out.push_back(prefix + ".layer" + std::to_string(i) + ".bias");
    }
    return out;
}

Mlp make_mlp(const std::vector<int>& widths, Activation hidden_activation, RngEngine& rng) {
    if (widths.size() < 2) throw ArgumentError("make_mlp needs at least input and output widths");
    Mlp net;
    for (size_t i = 0; i + 1 < widths.size(); ++i) {
        const bool last = i + 2 == widths.size();
        net.layers.push_back(
            init_uniform(widths[i], widths[i + 1], last ? Activation::None : hidden_activation, rng));
    }
    return net;
}

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, std::vector<std::string> names,
                             AdamConfig config)
    : params_(std::move(params)), names_(std::move(names)), config_(config) {
    if (names_.size() != params_.size())
        throw ArgumentError("parameter and name counts differ");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void AdamOptimizer::step() {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
    for (size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& p = params_[pi];
        const std::vector<double>& g = p.grad();
        if (g.empty()) continue;  // parameter untouched by this loss
        auto& m = m_[pi];
        auto& v = v_[pi];
        double* w = p.data();
        for (size_t i = 0; i < m.size(); ++i) {
            const double gi = g[i];
            if (!std::isfinite(gi))
                throw DivergenceError("non-finite gradient in parameter " + names_[pi]);
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gi;
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * gi * gi;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
    }
}

void AdamOptimizer::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

void AdamOptimizer::restore(int64_t step_count, std::vector<std::vector<double>> m,
                            std::vector<std::vector<double>> v) {
    if (m.size() != params_.size() || v.size() != params_.size())
        throw ArgumentError("moment count does not match parameter count");
    for (size_t i = 0; i < params_.size(); ++i)
        if (m[i].size() != static_cast<size_t>(params_[i].size()) ||
            v[i].size() != static_cast<size_t>(params_[i].size()))
            throw ArgumentError("moment shape does not match parameter " + names_[i]);
    step_count_ = step_count;
    m_ = std::move(m);
    v_ = std::move(v);
}

}  // namespace began
