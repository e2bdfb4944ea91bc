#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "began/rng.hpp"
#include "began/tensor.hpp"

namespace began {

/// 25 isotropic Gaussians on a 5x5 planar grid, symmetric about the origin.
struct GaussianGrid {
    std::vector<std::array<double, 2>> means;  // 25, row-major over the grid
    double sigma = 0.05;

    static GaussianGrid make(double half_width = 4.0, double sigma = 0.05);

    int mode_count() const { return static_cast<int>(means.size()); }
};

/// Each sample: mode chosen uniformly, then isotropic Gaussian noise of
/// scale sigma. Returns [n x 2].
Tensor sample_real(const GaussianGrid& grid, int n, RngEngine& rng);

enum class LatentDistribution { Uniform, Gaussian };

struct LatentSampler {
    int dim = 32;
    LatentDistribution distribution = LatentDistribution::Uniform;
};

/// [n x dim]; i.i.d. uniform on [-1, 1] (or standard normal when configured).
Tensor sample_latent(const LatentSampler& sampler, int n, RngEngine& rng);

/// Index and Euclidean distance of the closest grid mean; ties break to the
/// lowest index.
std::pair<int, double> nearest_mode(const double* point, const GaussianGrid& grid);

std::string to_string(LatentDistribution d);
LatentDistribution latent_distribution_from_string(const std::string& s);

}  // namespace began
