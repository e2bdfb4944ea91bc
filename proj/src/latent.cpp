#include "began/latent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "began/error.hpp"

namespace began {

namespace {

Tensor as_row(const Tensor& x) {
    if (x.shape().size() == 1)
        return Tensor::from_values({1, x.shape()[0]}, x.values());
    return x;
}

}  // namespace

ZSearchResult z_star_search(const Tensor& x_star, const Generator& g, const ZSearchConfig& cfg,
                            const Tensor& init_z) {
    if (cfg.max_iters < 1) throw ArgumentError("z_star_search requires max_iters >= 1");
    if (cfg.tol <= 0.0) throw ArgumentError("z_star_search requires tol > 0");

    const Tensor target = as_row(x_star);
    Tensor z = as_row(init_z).clone();
    z.set_requires_grad(true);

    AdamOptimizer opt({z}, {"z"}, AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});

    ZSearchResult result;
    result.z = z.clone();
    result.best_loss = std::numeric_limits<double>::infinity();

    for (int64_t iter = 0; iter < cfg.max_iters; ++iter) {
        double loss_value;
        {
            opt.zero_grad();
            Tape tape;
            Tensor loss = sample_norm_mean(sub(g.forward(z), target), NormKind::L2);
            loss_value = loss.item();
            if (!std::isfinite(loss_value))
                throw SearchFailureError("z_star_search diverged at iteration " +
                                         std::to_string(iter) + " after " +
                                         std::to_string(result.loss_history.size()) +
                                         " recorded losses");
            result.loss_history.push_back(loss_value);
            if (loss_value < result.best_loss) {
                result.best_loss = loss_value;
                result.z = z.clone();
            }
            if (loss_value < cfg.tol) {
                if (result.iterations_to_tol < 0) result.iterations_to_tol = iter;
                break;
            }
            tape.backward(loss);
        }
        opt.step();
        if (cfg.clamp_to_box) {
            double* p = z.data();
            for (int64_t i = 0; i < z.size(); ++i)
                p[i] = std::clamp(p[i], -cfg.box_half_width, cfg.box_half_width);
        }
    }
    result.z.set_requires_grad(false);
    return result;
}

Tensor initial_search_latent(const Tensor& x_star, const Generator& g,
                             const AutoencoderDiscriminator* d, const ZSearchConfig& cfg,
                             RngEngine& rng) {
    if (cfg.init == ZSearchInit::EncoderWarmStart) {
        if (!d) throw ArgumentError("encoder warm start requires a discriminator");
        return one_shot_encode(x_star, *d);
    }
    Tensor z = Tensor::zeros({1, g.latent_dim()});
    for (int64_t i = 0; i < z.size(); ++i) z.data()[i] = uniform(rng, -1.0, 1.0);
    return z;
}

Tensor one_shot_encode(const Tensor& x_star, const AutoencoderDiscriminator& d) {
    return d.encode(as_row(x_star));
}

std::vector<Tensor> interpolate(const Tensor& z_a, const Tensor& z_b, int steps) {
    if (steps < 2) throw ArgumentError("interpolate requires steps >= 2");
    if (z_a.shape() != z_b.shape())
        throw DimensionError("interpolate endpoints differ: " + format_shape(z_a.shape()) +
                             " vs " + format_shape(z_b.shape()));
    std::vector<Tensor> out;
    out.reserve(steps);
    for (int i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) / (steps - 1);
        Tensor z = Tensor::zeros(z_a.shape());
        const double* pa = z_a.data();
        const double* pb = z_b.data();
        for (int64_t j = 0; j < z.size(); ++j) z.data()[j] = (1.0 - t) * pa[j] + t * pb[j];
        out.push_back(std::move(z));
    }
    // exact endpoints regardless of rounding
    out.front() = z_a.clone();
    out.back() = z_b.clone();
    return out;
}

Tensor apply_style(const Tensor& z, const std::vector<StyleVector>& styles) {
    Tensor out = z.clone();
    for (const auto& style : styles) {
        if (static_cast<int64_t>(style.vector.size()) != z.size())
            throw DimensionError("style '" + style.label + "' has width " +
                                 std::to_string(style.vector.size()) + ", latent is " +
                                 format_shape(z.shape()));
        for (int64_t i = 0; i < out.size(); ++i) out.data()[i] += style.vector[i];
    }
    return out;
}

StyleVector basis_style(int latent_dim, int dim, double amplitude, const std::string& label) {
    if (dim < 0 || dim >= latent_dim)
        throw ArgumentError("style dimension " + std::to_string(dim) + " out of range for latent width " +
                            std::to_string(latent_dim));
    StyleVector s;
    s.vector.assign(latent_dim, 0.0);
    s.vector[dim] = amplitude;
    s.label = label.empty() ? "e" + std::to_string(dim) : label;
    return s;
}

std::vector<Tensor> dimension_sweep(const Tensor& z, int dim, double lo, double hi, double step) {
    if (lo > hi) throw ArgumentError("dimension_sweep requires lo <= hi");
    if (step <= 0.0) throw ArgumentError("dimension_sweep requires step > 0");
    if (dim < 0 || dim >= z.size())
        throw ArgumentError("sweep dimension " + std::to_string(dim) + " out of range for latent " +
                            format_shape(z.shape()));
    std::vector<Tensor> out;
    // count grid points up front so accumulated rounding cannot drop the top
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) {
        Tensor c = z.clone();
        c.data()[dim] = lo + i * step;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace began
