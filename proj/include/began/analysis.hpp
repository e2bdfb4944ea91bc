#pragma once

#include <vector>

#include "began/data.hpp"
#include "began/tensor.hpp"

namespace began {

/// Top-2 principal axes of a latent cloud. Rows of `components` are unit
/// length and mutually orthogonal; explained variances are in descending
/// order. Sign convention: each component's largest-magnitude entry is
/// positive, so fits are reproducible across runs.
struct PcaProjection {
    std::vector<double> mean;                 // latent_dim
    std::vector<std::vector<double>> components;  // 2 x latent_dim
    std::vector<double> explained_variance;   // 2, descending
};

/// Fits on the real latents only (covariance with n-1 divisor, exact
/// eigendecomposition). Needs n >= 3 and non-degenerate data.
PcaProjection fit_pca(const Tensor& latents);

/// (latents - mean) * components^T -> [n x 2].
Tensor project(const PcaProjection& p, const Tensor& latents);

/// Total variance: trace of the sample covariance (divisor n-1).
double variance_stats(const Tensor& latents);

struct ModeCoverageReport {
    int modes_covered = 0;
    double hq_fraction = 0.0;
    std::vector<int> per_mode_counts;  // high-quality samples per mode

    int coverage_floor = 1;  // min high-quality count for a mode to be covered
};

/// A sample is high quality iff its nearest-mode distance <= 3 sigma; a mode
/// is covered iff it receives >= max(1, n/2500) high-quality samples.
ModeCoverageReport mode_coverage(const Tensor& samples, const GaussianGrid& grid);

struct CollapseSignal {
    int64_t step = 0;
    double k_before = 0.0;  // max of k over the trailing window
    double k_after = 0.0;   // k at the flagged step
    bool triggered = true;
};

/// Flags step t iff max(k over [t-W, t)) - k_t > delta. A single sharp drop
/// therefore yields a contiguous signal region of up to W steps.
std::vector<CollapseSignal> detect_k_drop(const std::vector<double>& k_series, double delta,
                                          int window);

// Symmetric eigendecomposition by cyclic Jacobi rotations; eigenpairs sorted
// by descending eigenvalue. Exposed for reuse, matrix is dim x dim row-major.
void symmetric_eigen(std::vector<double> matrix, int dim, std::vector<double>& eigenvalues,
                     std::vector<double>& eigenvectors /* row i = i-th vector */);

}  // namespace began
