#pragma once

#include <string>
#include <vector>

#include "began/began.hpp"
#include "began/tensor.hpp"

namespace began {

enum class ZSearchInit { Random, EncoderWarmStart };

struct ZSearchConfig {
    int max_iters = 10000;
    double lr = 1e-2;
    double tol = 1e-3;
    ZSearchInit init = ZSearchInit::Random;
    // Optional projection of the iterate back into the latent sampling box.
    bool clamp_to_box = false;
    double box_half_width = 1.0;
};

struct ZSearchResult {
    Tensor z;                          // best-so-far latent
    std::vector<double> loss_history;  // loss at every evaluated iterate
    double best_loss = 0.0;
    // first iteration index with loss < tol, or -1 if the budget ran out
    int64_t iterations_to_tol = -1;
};

/// Adam descent on z against |G(z) - x*| with the generator frozen. Stops at
/// tol or max_iters and returns the best iterate seen. A non-finite loss
/// aborts with SearchFailureError.
ZSearchResult z_star_search(const Tensor& x_star, const Generator& g, const ZSearchConfig& cfg,
                            const Tensor& init_z);

/// Initial iterate per the configured policy: a fresh uniform draw, or a
/// single encoder pass over the target.
Tensor initial_search_latent(const Tensor& x_star, const Generator& g,
                             const AutoencoderDiscriminator* d, const ZSearchConfig& cfg,
                             RngEngine& rng);

/// Enc(x*): the single-pass approximation to z*.
Tensor one_shot_encode(const Tensor& x_star, const AutoencoderDiscriminator& d);

/// Linear interpolation inclusive of both endpoints; steps >= 2.
std::vector<Tensor> interpolate(const Tensor& z_a, const Tensor& z_b, int steps);

struct StyleVector {
    std::vector<double> vector;
    std::string label;
};

/// z plus the sum of the style vectors.
Tensor apply_style(const Tensor& z, const std::vector<StyleVector>& styles);

/// Unit basis direction scaled by amplitude; the toy-scale stand-in for a
/// learned attribute direction.
StyleVector basis_style(int latent_dim, int dim, double amplitude, const std::string& label = "");

/// Copies of z with coordinate `dim` replaced by lo, lo+step, ..., <= hi.
std::vector<Tensor> dimension_sweep(const Tensor& z, int dim, double lo, double hi, double step);

}  // namespace began
