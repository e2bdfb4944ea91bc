#include "began/began.hpp"

#include <algorithm>
#include <cmath>

#include "began/error.hpp"

namespace began {

std::vector<Tensor> AutoencoderDiscriminator::parameters() const {
    std::vector<Tensor> out = enc.parameters();
    for (auto& p : dec.parameters()) out.push_back(p);
    return out;
}

std::vector<std::string> AutoencoderDiscriminator::parameter_names() const {
    std::vector<std::string> out = enc.parameter_names("discriminator.enc");
    for (auto& n : dec.parameter_names("discriminator.dec")) out.push_back(n);
    return out;
}

std::string to_string(Variant v) { return v == Variant::Began ? "began" : "began-cs"; }

Variant variant_from_string(const std::string& s) {
    if (s == "began") return Variant::Began;
    if (s == "began-cs" || s == "began_cs") return Variant::BeganCS;
    throw ConfigError("unknown variant: " + s);
}

Tensor reconstruction_loss(const Tensor& x, const AutoencoderDiscriminator& d, NormKind norm) {
    return sample_norm_mean(sub(x, d.reconstruct(x)), norm);
}

Tensor generator_loss(const Tensor& z_g, const Generator& g, const AutoencoderDiscriminator& d,
                      NormKind norm) {
    return reconstruction_loss(g.forward(z_g), d, norm);
}

Tensor constraint_loss(const Tensor& z_d, const Generator& g, const AutoencoderDiscriminator& d,
                       NormKind norm) {
    Tensor fake = g.forward(z_d).detach();
    return sample_norm_mean(sub(z_d, d.encode(fake)), norm);
}

namespace {

// Per-sample norm mean over raw values, no tape involvement.
double norm_mean_value(const std::vector<double>& diff, int rows, int cols, NormKind kind) {
    double mean = 0.0;
    for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        const double* row = diff.data() + static_cast<int64_t>(r) * cols;
        if (kind == NormKind::L2) {
            for (int c = 0; c < cols; ++c) acc = std::fma(row[c], row[c], acc);
            acc = std::sqrt(acc);
        } else {
            for (int c = 0; c < cols; ++c) acc += std::abs(row[c]);
        }
        mean += acc;
    }
    return mean / rows;
}

}  // namespace

DiscriminatorLossTerms discriminator_loss_terms(const Tensor& x_real, const Tensor& z_d, double k,
                                                double alpha, const Generator& g,
                                                const AutoencoderDiscriminator& d, NormKind norm) {
    // The generated batch enters the discriminator objective as a constant.
    Tensor fake = g.forward(z_d).detach();

    Tensor loss_real = reconstruction_loss(x_real, d, norm);

    // enc(fake) feeds both the fake reconstruction and the constraint.
    Tensor enc_fake = d.enc.forward(fake);
    Tensor loss_fake = sample_norm_mean(sub(fake, d.dec.forward(enc_fake)), norm);

    DiscriminatorLossTerms terms;
    terms.loss_real = loss_real.item();
    terms.loss_fake = loss_fake.item();

    Tensor total = add(loss_real, scale(loss_fake, -k));
    if (alpha != 0.0) {
        Tensor loss_c = sample_norm_mean(sub(z_d, enc_fake), norm);
        terms.loss_constraint = loss_c.item();
        total = add(total, scale(loss_c, alpha));
    } else {
        // measured for the metrics stream, kept out of the graph
        std::vector<double> diff(z_d.size());
        const double* pz = z_d.data();
        const double* pe = enc_fake.data();
        for (int64_t i = 0; i < z_d.size(); ++i) diff[i] = pz[i] - pe[i];
        terms.loss_constraint =
            norm_mean_value(diff, z_d.shape()[0], z_d.shape()[1], norm);
    }
    terms.total = total;
    return terms;
}

Tensor discriminator_loss(const Tensor& x_real, const Tensor& z_d, double k, double alpha,
                          const Generator& g, const AutoencoderDiscriminator& d, NormKind norm) {
    return discriminator_loss_terms(x_real, z_d, k, alpha, g, d, norm).total;
}

EquilibriumState update_k(EquilibriumState state, double loss_real, double loss_gen) {
    state.k += state.lambda * (state.gamma * loss_real - loss_gen);
    state.k = std::clamp(state.k, 0.0, 1.0);
    return state;
}

double convergence_measure(double loss_real, double loss_gen, double gamma) {
    return loss_real + std::abs(gamma * loss_real - loss_gen);
}

namespace {

// Temporarily drops requires_grad on a parameter set so backward skips their
// weight gradients (values still flow through the graph).
class FreezeParams {
  public:
    explicit FreezeParams(std::vector<Tensor> params) : params_(std::move(params)) {
        for (auto& p : params_) p.set_requires_grad(false);
    }
    ~FreezeParams() {
        for (auto& p : params_) p.set_requires_grad(true);
    }

  private:
    std::vector<Tensor> params_;
};

}  // namespace

TrainStepResult train_step(Generator& g, AutoencoderDiscriminator& d, EquilibriumState& eq,
                           AdamOptimizer& opt_g, AdamOptimizer& opt_d, const TrainConfig& cfg,
                           const Tensor& real_batch, const LatentSampler& latents,
                           RngEngine& latent_rng) {
    TrainStepResult result;
    const double alpha = cfg.effective_alpha();

    Tensor z_d = sample_latent(latents, cfg.batch_size, latent_rng);
    Tensor z_g = sample_latent(latents, cfg.batch_size, latent_rng);

    // discriminator step
    {
        opt_d.zero_grad();
        Tape tape;
        DiscriminatorLossTerms terms =
            discriminator_loss_terms(real_batch, z_d, eq.k, alpha, g, d, cfg.norm);
        result.loss_real = terms.loss_real;
        result.loss_constraint = terms.loss_constraint;
        if (!std::isfinite(terms.total.item()))
            throw DivergenceError("discriminator loss is not finite");
        tape.backward(terms.total);
        opt_d.step();
    }

    // generator step; discriminator weight gradients are not needed here
    {
        opt_g.zero_grad();
        FreezeParams freeze_d(d.parameters());
        Tape tape;
        Tensor loss_g = generator_loss(z_g, g, d, cfg.norm);
        result.loss_gen = loss_g.item();
        if (!std::isfinite(result.loss_gen))
            throw DivergenceError("generator loss is not finite");
        tape.backward(loss_g);
        opt_g.step();
    }

    eq = update_k(eq, result.loss_real, result.loss_gen);
    result.k = eq.k;
    result.measure = convergence_measure(result.loss_real, result.loss_gen, eq.gamma);
    return result;
}

}  // namespace began
