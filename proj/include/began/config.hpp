#pragma once

#include <string>

#include "began/began.hpp"
#include "began/data.hpp"

namespace began {

/// Everything one seeded run needs: model hyperparameters, dataset shape,
/// analysis cadence, and output location. Serialized as flat key = value
/// text with an embedded schema version; parsing rejects unknown keys.
struct ExperimentSpec {
    TrainConfig train;

    double grid_half_width = 4.0;
    double data_sigma = 0.05;
    LatentDistribution latent_distribution = LatentDistribution::Uniform;

    int snapshot_cadence = 500;   // metrics row + variance/coverage stats
    int plot_cadence = 5000;      // PCA snapshot CSV + SVG files
    int coverage_samples = 2500;  // generated samples for the coverage report
    double kdrop_delta = 0.1;
    int kdrop_window = 200;

    std::string out_dir = "runs/run";
    std::string label;

    GaussianGrid make_grid() const { return GaussianGrid::make(grid_half_width, data_sigma); }
    LatentSampler make_latent_sampler() const {
        return LatentSampler{train.latent_dim, latent_distribution};
    }
};

inline constexpr int kConfigSchemaVersion = 1;

/// Throws ConfigError on unknown keys, bad types, missing schema_version, or
/// out-of-range values.
ExperimentSpec parse_config_text(const std::string& text);
ExperimentSpec parse_config_file(const std::string& path);

/// Canonical rendering; parse(render(spec)) reproduces spec exactly.
std::string render_config(const ExperimentSpec& spec);

void validate_spec(const ExperimentSpec& spec);

/// Dataset-shape equality, the precondition for comparing two runs.
bool same_dataset_params(const ExperimentSpec& a, const ExperimentSpec& b);

}  // namespace began
