#pragma once

#include <string>
#include <vector>

#include "began/rng.hpp"
#include "began/tensor.hpp"

namespace began {

enum class Activation { Relu, None };

struct DenseLayer {
    Tensor weight;  // [n_in x n_out]
    Tensor bias;    // [n_out]
    Activation activation = Activation::None;

    int input_width() const { return weight.shape()[0]; }
    int output_width() const { return weight.shape()[1]; }
};

/// Weights i.i.d. uniform in [-sqrt(9/n_in), +sqrt(9/n_in)], bias zero.
DenseLayer init_uniform(int n_in, int n_out, Activation activation, RngEngine& rng);

struct Mlp {
    std::vector<DenseLayer> layers;
    // 0 disables; otherwise the output passes through s * tanh(x / s)
    double output_bound = 0.0;

    Tensor forward(const Tensor& x) const;

    std::vector<Tensor> parameters() const;
    std::vector<std::string> parameter_names(const std::string& prefix) const;

    int input_width() const { return layers.front().input_width(); }
    int output_width() const { return layers.back().output_width(); }
};

/// Chain of dense layers: hidden layers use `hidden_activation`, the output
/// layer is linear. widths = {n_in, h1, ..., n_out}.
Mlp make_mlp(const std::vector<int>& widths, Activation hidden_activation, RngEngine& rng);

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction over a fixed parameter set. Gradients are read
/// off the parameters themselves (the tape accumulates them there).
class AdamOptimizer {
  public:
    AdamOptimizer(std::vector<Tensor> params, std::vector<std::string> names, AdamConfig config);

    /// One update. A non-finite gradient aborts with a DivergenceError that
    /// names the offending parameter.
    void step();

    void zero_grad();

    int64_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return config_; }
    const std::vector<Tensor>& params() const { return params_; }

    // moment access for checkpointing
    const std::vector<std::vector<double>>& first_moments() const { return m_; }
    const std::vector<std::vector<double>>& second_moments() const { return v_; }
    void restore(int64_t step_count, std::vector<std::vector<double>> m,
                 std::vector<std::vector<double>> v);

  private:
    std::vector<Tensor> params_;
    std::vector<std::string> names_;
    AdamConfig config_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    int64_t step_count_ = 0;
};

}  // namespace began
