#include "began/data.hpp"

#include <cmath>
#include <limits>

#include "began/error.hpp"

namespace began {

GaussianGrid GaussianGrid::make(double half_width, double sigma) {
    GaussianGrid grid;
    grid.sigma = sigma;
    const double step = half_width / 2.0;
    for (int gy = -2; gy <= 2; ++gy)
        for (int gx = -2; gx <= 2; ++gx)
            grid.means.push_back({gx * step, gy * step});
    return grid;
}

Tensor sample_real(const GaussianGrid& grid, int n, RngEngine& rng) {
    if (n < 1) throw ArgumentError("sample_real requires n >= 1");
    Tensor out = Tensor::zeros({n, 2});
    double* p = out.data();
    const int modes = grid.mode_count();
    for (int i = 0; i < n; ++i) {
        const int mode = static_cast<int>(rng() % static_cast<uint64_t>(modes));
        p[2 * i + 0] = grid.means[mode][0] + grid.sigma * normal(rng);
        p[2 * i + 1] = grid.means[mode][1] + grid.sigma * normal(rng);
    }
    return out;
}

Tensor sample_latent(const LatentSampler& sampler, int n, RngEngine& rng) {
    if (n < 1) throw ArgumentError("sample_latent requires n >= 1");
    Tensor out = Tensor::zeros({n, sampler.dim});
    double* p = out.data();
    const int64_t total = out.size();
    if (sampler.distribution == LatentDistribution::Uniform) {
        for (int64_t i = 0; i < total; ++i) p[i] = uniform(rng, -1.0, 1.0);
    } else {
        for (int64_t i = 0; i < total; ++i) p[i] = normal(rng);
    }
    return out;
}

std::pair<int, double> nearest_mode(const double* point, const GaussianGrid& grid) {
    int best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.mode_count(); ++i) {
        const double dx = point[0] - grid.means[i][0];
        const double dy = point[1] - grid.means[i][1];
        const double sq = dx * dx + dy * dy;
        if (sq < best_sq) {
            best_sq = sq;
            best = i;
        }
    }
    return {best, std::sqrt(best_sq)};
}

std::string to_string(LatentDistribution d) {
    return d == LatentDistribution::Uniform ? "uniform" : "gaussian";
}

LatentDistribution latent_distribution_from_string(const std::string& s) {
    if (s == "uniform") return LatentDistribution::Uniform;
    if (s == "gaussian") return LatentDistribution::Gaussian;
    throw ConfigError("unknown latent distribution: " + s);
}

}  // namespace began
