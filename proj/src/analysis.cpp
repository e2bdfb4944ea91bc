#include "began/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "began/error.hpp"

namespace began {

void symmetric_eigen(std::vector<double> a, int dim, std::vector<double>& eigenvalues,
                     std::vector<double>& eigenvectors) {
    // Cyclic Jacobi. V starts as identity and accumulates rotations so that
    // V^T A V is diagonal; rows of the returned eigenvector matrix are the
    // eigenvectors.
    std::vector<double> v(static_cast<size_t>(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) v[static_cast<size_t>(i) * dim + i] = 1.0;

    auto at = [&](std::vector<double>& m, int r, int c) -> double& {
        return m[static_cast<size_t>(r) * dim + c];
    };

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < dim; ++p)
            for (int q = p + 1; q < dim; ++q) off += at(a, p, q) * at(a, p, q);
        if (off < 1e-28) break;

        for (int p = 0; p < dim; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                const double apq = at(a, p, q);
                if (apq == 0.0) continue;
                const double app = at(a, p, p);
                const double aqq = at(a, q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int i = 0; i < dim; ++i) {
                    const double aip = at(a, i, p);
                    const double aiq = at(a, i, q);
                    at(a, i, p) = c * aip - s * aiq;
                    at(a, i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < dim; ++i) {
                    const double api = at(a, p, i);
                    const double aqi = at(a, q, i);
                    at(a, p, i) = c * api - s * aqi;
                    at(a, q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < dim; ++i) {
                    const double vip = at(v, i, p);
                    const double viq = at(v, i, q);
                    at(v, i, p) = c * vip - s * viq;
                    at(v, i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return at(a, x, x) > at(a, y, y); });

    eigenvalues.assign(dim, 0.0);
    eigenvectors.assign(static_cast<size_t>(dim) * dim, 0.0);
    for (int r = 0; r < dim; ++r) {
        eigenvalues[r] = at(a, order[r], order[r]);
        for (int i = 0; i < dim; ++i)
            eigenvectors[static_cast<size_t>(r) * dim + i] = at(v, i, order[r]);
    }
}

PcaProjection fit_pca(const Tensor& latents) {
    const auto& s = latents.shape();
    if (s.size() != 2) throw DimensionError("fit_pca expects [n x dim], got " + format_shape(s));
    const int n = s[0], dim = s[1];
    if (n < 3) throw ArgumentError("fit_pca needs at least 3 points, got " + std::to_string(n));

    PcaProjection out;
    out.mean.assign(dim, 0.0);
    const double* p = latents.data();
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < dim; ++c) out.mean[c] += p[static_cast<int64_t>(r) * dim + c];
    for (auto& m : out.mean) m /= n;

    std::vector<double> cov(static_cast<size_t>(dim) * dim, 0.0);
    for (int r = 0; r < n; ++r) {
        const double* row = p + static_cast<int64_t>(r) * dim;
        for (int i = 0; i < dim; ++i) {
            const double di = row[i] - out.mean[i];
            for (int j = i; j < dim; ++j)
                cov[static_cast<size_t>(i) * dim + j] += di * (row[j] - out.mean[j]);
        }
    }
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            const double val = cov[static_cast<size_t>(i) * dim + j] / (n - 1);
            cov[static_cast<size_t>(i) * dim + j] = val;
            cov[static_cast<size_t>(j) * dim + i] = val;
        }

    double total = 0.0;
    for (int i = 0; i < dim; ++i) total += cov[static_cast<size_t>(i) * dim + i];
    if (total <= 0.0)
        throw DegenerateDataError("fit_pca: all points identical, covariance has no spread");

    std::vector<double> evals, evecs;
    symmetric_eigen(cov, dim, evals, evecs);

    out.components.assign(2, std::vector<double>(dim, 0.0));
    out.explained_variance = {std::max(evals[0], 0.0), dim > 1 ? std::max(evals[1], 0.0) : 0.0};
    for (int r = 0; r < 2 && r < dim; ++r) {
        std::copy(evecs.begin() + static_cast<size_t>(r) * dim,
                  evecs.begin() + static_cast<size_t>(r + 1) * dim, out.components[r].begin());
        // largest-magnitude entry made positive
        int arg = 0;
        for (int i = 1; i < dim; ++i)
            if (std::abs(out.components[r][i]) > std::abs(out.components[r][arg])) arg = i;
        if (out.components[r][arg] < 0.0)
            for (auto& x : out.components[r]) x = -x;
    }
    return out;
}

Tensor project(const PcaProjection& p, const Tensor& latents) {
    const auto& s = latents.shape();
    const int dim = static_cast<int>(p.mean.size());
    if (s.size() != 2 || s[1] != dim)
        throw DimensionError("project expects [n x " + std::to_string(dim) + "], got " + format_shape(s));
    const int n = s[0];
    Tensor out = Tensor::zeros({n, 2});
    const double* src = latents.data();
    double* dst = out.data();
    for (int r = 0; r < n; ++r) {
        const double* row = src + static_cast<int64_t>(r) * dim;
        for (int axis = 0; axis < 2; ++axis) {
            double acc = 0.0;
            const auto& comp = p.components[axis];
            for (int c = 0; c < dim; ++c) acc += (row[c] - p.mean[c]) * comp[c];
            dst[2 * r + axis] = acc;
        }
    }
    return out;
}

double variance_stats(const Tensor& latents) {
    const auto& s = latents.shape();
    if (s.size() != 2) throw DimensionError("variance_stats expects [n x dim], got " + format_shape(s));
    const int n = s[0], dim = s[1];
    if (n < 2) throw ArgumentError("variance_stats needs at least 2 points");
    const double* p = latents.data();
    double total = 0.0;
    for (int c = 0; c < dim; ++c) {
        double mean = 0.0;
        for (int r = 0; r < n; ++r) mean += p[static_cast<int64_t>(r) * dim + c];
        mean /= n;
        double acc = 0.0;
        for (int r = 0; r < n; ++r) {
            const double d = p[static_cast<int64_t>(r) * dim + c] - mean;
            acc += d * d;
        }
        total += acc / (n - 1);
    }
    return total;
}

ModeCoverageReport mode_coverage(const Tensor& samples, const GaussianGrid& grid) {
    const auto& s = samples.shape();
    if (s.size() != 2 || s[1] != 2)
        throw DimensionError("mode_coverage expects [n x 2] samples, got " + format_shape(s));
    const int n = s[0];

    ModeCoverageReport report;
    report.per_mode_counts.assign(grid.mode_count(), 0);
    const double hq_radius = 3.0 * grid.sigma;

    const double* p = samples.data();
    int hq = 0;
    for (int i = 0; i < n; ++i) {
        auto [mode, dist] = nearest_mode(p + 2 * i, grid);
        if (dist <= hq_radius) {
            ++hq;
            ++report.per_mode_counts[mode];
        }
    }
    report.hq_fraction = static_cast<double>(hq) / n;
    report.coverage_floor = std::max(1, n / 2500);
    for (int c : report.per_mode_counts)
        if (c >= report.coverage_floor) ++report.modes_covered;
    return report;
}

std::vector<CollapseSignal> detect_k_drop(const std::vector<double>& k_series, double delta,
                                          int window) {
    if (window < 1) throw ArgumentError("detect_k_drop requires window >= 1");
    if (delta <= 0.0) throw ArgumentError("detect_k_drop requires delta > 0");

    std::vector<CollapseSignal> signals;
    const int64_t n = static_cast<int64_t>(k_series.size());
    for (int64_t t = 1; t < n; ++t) {
        const int64_t lo = std::max<int64_t>(0, t - window);
        double peak = k_series[lo];
        for (int64_t i = lo + 1; i < t; ++i) peak = std::max(peak, k_series[i]);
        if (peak - k_series[t] > delta)
            signals.push_back(CollapseSignal{t, peak, k_series[t], true});
    }
    return signals;
}

}  // namespace began
