#pragma once

#include <cstdint>
#include <string>

#include "began/data.hpp"
#include "began/nn.hpp"
#include "began/rng.hpp"
#include "began/tensor.hpp"

namespace began {

enum class Variant { Began, BeganCS };

struct Generator {
    Mlp net;  // latent_dim -> data_dim

    Tensor forward(const Tensor& z) const { return net.forward(z); }
    int latent_dim() const { return net.input_width(); }
    int data_dim() const { return net.output_width(); }
    std::vector<Tensor> parameters() const { return net.parameters(); }
    std::vector<std::string> parameter_names() const { return net.parameter_names("generator"); }
};

/// Discriminator realized as encode-decode reconstruction: D(x) = dec(enc(x)).
struct AutoencoderDiscriminator {
    Mlp enc;  // data_dim -> latent_dim
    Mlp dec;  // latent_dim -> data_dim

    Tensor encode(const Tensor& x) const { return enc.forward(x); }
    Tensor reconstruct(const Tensor& x) const { return dec.forward(enc.forward(x)); }
    int latent_dim() const { return enc.output_width(); }
    int data_dim() const { return enc.input_width(); }
    std::vector<Tensor> parameters() const;
    std::vector<std::string> parameter_names() const;
};

/// The scalar k_t balancing real-reconstruction against generated-sample
/// reconstruction in the discriminator loss, with its update gains.
struct EquilibriumState {
    double k = 0.0;       // clamped to [0, 1]
    double lambda = 1e-4; // proportional gain of the k update
    double gamma = 0.5;   // diversity ratio
};

struct TrainConfig {
    Variant variant = Variant::BeganCS;
    double alpha = 0.1;  // constraint weight; the Began variant behaves as alpha = 0
    double gamma = 25.0;
    double lambda = 1e-4;
    double lr_g = 5e-4;
    double lr_d = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int latent_dim = 32;
    int hidden_dim = 128;
    int batch_size = 256;
    int64_t steps = 30000;
    uint64_t seed = 1;
    NormKind norm = NormKind::L2;
    // soft output clip on the generator and decoder (0 disables); keeps the
    // energy game bounded the way pixel-range outputs do at image scale
    double output_bound = 6.0;

    double effective_alpha() const { return variant == Variant::Began ? 0.0 : alpha; }
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

// ---- losses ----------------------------------------------------------------

/// Batch-mean per-sample norm of x - D(x).
Tensor reconstruction_loss(const Tensor& x, const AutoencoderDiscriminator& d,
                           NormKind norm = NormKind::L2);

/// Reconstruction loss of G(z_G); drives the generator toward samples the
/// discriminator can reconstruct.
Tensor generator_loss(const Tensor& z_g, const Generator& g, const AutoencoderDiscriminator& d,
                      NormKind norm = NormKind::L2);

/// Batch-mean per-sample norm of z_D - Enc(G(z_D)). G's output enters as a
/// constant: the constraint regularizes the encoder only, never the
/// generator and never the decoder.
Tensor constraint_loss(const Tensor& z_d, const Generator& g, const AutoencoderDiscriminator& d,
                       NormKind norm = NormKind::L2);

struct DiscriminatorLossTerms {
    Tensor total;       // L(x_real) - k * L(fake) + alpha * L_c
    double loss_real;   // L(x_real)
    double loss_fake;   // L(G(z_D))
    double loss_constraint;
};

/// Assembles the discriminator objective. The generated batch is detached, so
/// no gradient reaches the generator; the alpha term is omitted from the
/// graph when alpha == 0 (its value is still measured).
DiscriminatorLossTerms discriminator_loss_terms(const Tensor& x_real, const Tensor& z_d,
                                                double k, double alpha, const Generator& g,
                                                const AutoencoderDiscriminator& d,
                                                NormKind norm = NormKind::L2);

Tensor discriminator_loss(const Tensor& x_real, const Tensor& z_d, double k, double alpha,
                          const Generator& g, const AutoencoderDiscriminator& d,
                          NormKind norm = NormKind::L2);

// ---- equilibrium -------------------------------------------------------------

/// k <- clamp(k + lambda * (gamma * loss_real - loss_gen), 0, 1).
EquilibriumState update_k(EquilibriumState state, double loss_real, double loss_gen);

/// M = loss_real + |gamma * loss_real - loss_gen|; logged for diagnostics,
/// never used for control.
double convergence_measure(double loss_real, double loss_gen, double gamma);

// ---- one training step --------------------------------------------------------

struct TrainStepResult {
    double loss_real = 0.0;
    double loss_gen = 0.0;
    double loss_constraint = 0.0;
    double k = 0.0;
    double measure = 0.0;
};

/// One adversarial step: Adam on the discriminator against its three-term
/// loss, Adam on the generator against the reconstruction of fresh samples,
/// then the k update from the two new loss values. Latents z_D and z_G are
/// independent draws from latent_rng. Throws DivergenceError on a non-finite
/// loss.
TrainStepResult train_step(Generator& g, AutoencoderDiscriminator& d, EquilibriumState& eq,
                           AdamOptimizer& opt_g, AdamOptimizer& opt_d, const TrainConfig& cfg,
                           const Tensor& real_batch, const LatentSampler& latents,
                           RngEngine& latent_rng);

}  // namespace began
