#pragma once

#include <memory>
#include <string>
#include <vector>

#include "began/analysis.hpp"
#include "began/checkpoint.hpp"
#include "began/config.hpp"
#include "began/report.hpp"

namespace began {

/// Owns all mutable state of one seeded run: networks, optimizers,
/// equilibrium, and the named RNG streams ("weights", "real", "latent" are
/// derived independently, so the variant flag never shifts the data).
class Trainer {
  public:
    explicit Trainer(const ExperimentSpec& spec);
    explicit Trainer(const Checkpoint& ckpt);

    /// One adversarial step; advances the step counter.
    TrainStepResult step();

    int64_t current_step() const { return step_; }

    struct Snapshot {
        Tensor real_latents;  // Enc(x), [n x latent_dim]
        Tensor gen_latents;   // Enc(G(z))
        Tensor real_samples;  // [n x 2]
        Tensor gen_samples;   // G(z), [n x 2]
        double var_real = 0.0;
        double var_gen = 0.0;
        ModeCoverageReport coverage;
    };

    /// Evaluation pass on streams seeded by (seed, "analysis", step): fully
    /// reproducible and independent of training-stream positions.
    Snapshot analysis_snapshot(int64_t step) const;

    /// Metrics row for `step`. Loss fields come from the given training-step
    /// result, or from an evaluation pass when train == nullptr (step 0).
    MetricsRecord make_record(int64_t step, const TrainStepResult* train) const;

    Checkpoint to_checkpoint(const MetricsRecord& last_record) const;

    const ExperimentSpec& spec() const { return spec_; }
    const GaussianGrid& grid() const { return grid_; }
    Generator& generator() { return gen_; }
    const Generator& generator() const { return gen_; }
    AutoencoderDiscriminator& discriminator() { return disc_; }
    const AutoencoderDiscriminator& discriminator() const { return disc_; }
    const EquilibriumState& equilibrium() const { return eq_; }

  private:
    void build_optimizers();

    ExperimentSpec spec_;
    GaussianGrid grid_;
    LatentSampler latents_;
    Generator gen_;
    AutoencoderDiscriminator disc_;
    EquilibriumState eq_;
    std::unique_ptr<AdamOptimizer> opt_g_;
    std::unique_ptr<AdamOptimizer> opt_d_;
    RngEngine rng_real_;
    RngEngine rng_latent_;
    int64_t step_ = 0;
};

enum class RunStatus { Ok, NanAbort };

struct RunResult {
    RunStatus status = RunStatus::Ok;
    std::string out_dir;
    MetricsRecord final_record;
    ModeCoverageReport coverage;
    std::string abort_message;
};

/// Executes the full run: writes config.txt, streams metrics.csv, emits PCA
/// snapshot CSV/SVG files at the plot cadence, and finishes with
/// coverage.csv plus checkpoint_final.bin. A non-finite loss aborts the run
/// (abort.txt, RunStatus::NanAbort) after flushing everything written so far.
RunResult run_experiment(const ExperimentSpec& spec);

/// Resume: re-emits the checkpointed metrics row, then trains extra_steps
/// more into a fresh run directory.
RunResult continue_experiment(const Checkpoint& ckpt, int64_t extra_steps,
                              const std::string& out_dir);

// ---- run comparison -----------------------------------------------------------

struct RunSummary {
    std::string dir;
    ExperimentSpec spec;
    std::vector<MetricsRecord> metrics;
};

RunSummary load_run(const std::string& dir);

struct ComparisonReport {
    struct Side {
        std::string dir;
        std::string label;
        std::string variant;
        MetricsRecord final_record;
        double mean_loss_constraint = 0.0;
        double final_loss_constraint = 0.0;
        double min_k = 0.0;
        double max_k = 0.0;
        std::vector<CollapseSignal> collapse_signals;
    };
    Side a, b;
    int delta_modes_covered = 0;       // a - b
    double delta_hq_fraction = 0.0;    // a - b
    double delta_final_loss_constraint = 0.0;
};

/// Side-by-side digest of two completed runs over the same dataset
/// parameters; throws on mismatched dataset params.
ComparisonReport compare_runs(const std::string& dir_a, const std::string& dir_b);

std::string render_text(const ComparisonReport& report);
std::string render_json(const ComparisonReport& report);

}  // namespace began
