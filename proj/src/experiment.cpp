#include "began/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "began/error.hpp"
#include "began/latent.hpp"

namespace fs = std::filesystem;

namespace began {

namespace {

std::vector<int> generator_widths(const TrainConfig& t) {
    return {t.latent_dim, t.hidden_dim, t.hidden_dim, 2};
}
std::vector<int> encoder_widths(const TrainConfig& t) {
    return {2, t.hidden_dim, t.hidden_dim, t.latent_dim};
}
std::vector<int> decoder_widths(const TrainConfig& t) {
    return {t.latent_dim, t.hidden_dim, t.hidden_dim, 2};
}

std::string step_tag(int64_t step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "step_%06" PRId64, step);
    return buf;
}

std::vector<std::array<double, 2>> to_points(const Tensor& t) {
    std::vector<std::array<double, 2>> out(t.shape()[0]);
    const double* p = t.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] = {p[2 * i], p[2 * i + 1]};
    return out;
}

}  // namespace

Trainer::Trainer(const ExperimentSpec& spec)
    : spec_(spec),
      grid_(spec.make_grid()),
      latents_(spec.make_latent_sampler()),
      rng_real_(make_stream(spec.train.seed, "real")),
      rng_latent_(make_stream(spec.train.seed, "latent")) {
    validate_spec(spec_);
    RngEngine weights = make_stream(spec_.train.seed, "weights");
    gen_.net = make_mlp(generator_widths(spec_.train), Activation::Relu, weights);
    disc_.enc = make_mlp(encoder_widths(spec_.train), Activation::Relu, weights);
    disc_.dec = make_mlp(decoder_widths(spec_.train), Activation::Relu, weights);
    gen_.net.output_bound = spec_.train.output_bound;
    disc_.dec.output_bound = spec_.train.output_bound;
    eq_ = EquilibriumState{0.0, spec_.train.lambda, spec_.train.gamma};
    build_optimizers();
}

Trainer::Trainer(const Checkpoint& ckpt)
    : spec_(ckpt.spec),
      grid_(ckpt.spec.make_grid()),
      latents_(ckpt.spec.make_latent_sampler()),
      gen_(ckpt.gen),
      disc_(ckpt.disc),
      eq_(ckpt.eq),
      step_(ckpt.step) {
    load_engine(rng_real_, ckpt.rng_real);
    load_engine(rng_latent_, ckpt.rng_latent);
    build_optimizers();
    opt_g_->restore(ckpt.adam_g_steps, ckpt.adam_g_m, ckpt.adam_g_v);
    opt_d_->restore(ckpt.adam_d_steps, ckpt.adam_d_m, ckpt.adam_d_v);
}

void Trainer::build_optimizers() {
    opt_g_ = std::make_unique<AdamOptimizer>(
        gen_.parameters(), gen_.parameter_names(),
        AdamConfig{spec_.train.lr_g, spec_.train.beta1, spec_.train.beta2, spec_.train.adam_eps});
    opt_d_ = std::make_unique<AdamOptimizer>(
        disc_.parameters(), disc_.parameter_names(),
        AdamConfig{spec_.train.lr_d, spec_.train.beta1, spec_.train.beta2, spec_.train.adam_eps});
}

TrainStepResult Trainer::step() {
    Tensor real = sample_real(grid_, spec_.train.batch_size, rng_real_);
    TrainStepResult result =
        train_step(gen_, disc_, eq_, *opt_g_, *opt_d_, spec_.train, real, latents_, rng_latent_);
    ++step_;
    return result;
}

Trainer::Snapshot Trainer::analysis_snapshot(int64_t step) const {
    RngEngine rng = make_stream(spec_.train.seed, "analysis", static_cast<uint64_t>(step));
    const int n = spec_.coverage_samples;

    Snapshot snap;
    snap.real_samples = sample_real(grid_, n, rng);
    Tensor z = sample_latent(latents_, n, rng);
    snap.gen_samples = gen_.forward(z);
    snap.real_latents = disc_.encode(snap.real_samples);
    snap.gen_latents = disc_.encode(snap.gen_samples);
    snap.var_real = variance_stats(snap.real_latents);
    snap.var_gen = variance_stats(snap.gen_latents);
    snap.coverage = mode_coverage(snap.gen_samples, grid_);
    return snap;
}

MetricsRecord Trainer::make_record(int64_t step, const TrainStepResult* train) const {
    MetricsRecord r;
    r.step = step;
    if (train) {
        r.loss_real = train->loss_real;
        r.loss_gen = train->loss_gen;
        r.loss_constraint = train->loss_constraint;
        r.k = train->k;
        r.convergence_measure = train->measure;
    } else {
        // evaluation pass: same stream as the snapshot, drawn after its
        // samples so both stay reproducible
        RngEngine rng = make_stream(spec_.train.seed, "analysis-loss", static_cast<uint64_t>(step));
        Tensor x = sample_real(grid_, spec_.train.batch_size, rng);
        Tensor z = sample_latent(latents_, spec_.train.batch_size, rng);
        r.loss_real = reconstruction_loss(x, disc_, spec_.train.norm).item();
        r.loss_gen = generator_loss(z, gen_, disc_, spec_.train.norm).item();
        r.loss_constraint = constraint_loss(z, gen_, disc_, spec_.train.norm).item();
        r.k = eq_.k;
        r.convergence_measure = convergence_measure(r.loss_real, r.loss_gen, eq_.gamma);
    }
    Snapshot snap = analysis_snapshot(step);
    r.var_real = snap.var_real;
    r.var_gen = snap.var_gen;
    r.modes_covered = snap.coverage.modes_covered;
    r.hq_fraction = snap.coverage.hq_fraction;
    r.validate();
    return r;
}

Checkpoint Trainer::to_checkpoint(const MetricsRecord& last_record) const {
    Checkpoint c;
    c.spec = spec_;
    c.step = step_;
    c.eq = eq_;
    c.gen = gen_;
    c.disc = disc_;
    c.adam_g_steps = opt_g_->step_count();
    c.adam_g_m = opt_g_->first_moments();
    c.adam_g_v = opt_g_->second_moments();
    c.adam_d_steps = opt_d_->step_count();
    c.adam_d_m = opt_d_->first_moments();
    c.adam_d_v = opt_d_->second_moments();
    c.rng_real = save_engine(rng_real_);
    c.rng_latent = save_engine(rng_latent_);
    c.last_record = last_record;
    return c;
}

namespace {

void write_snapshot_files(const Trainer& trainer, const Trainer::Snapshot& snap, int64_t step,
                          const fs::path& dir) {
    const std::string tag = step_tag(step);
    try {
        PcaProjection pca = fit_pca(snap.real_latents);
        Tensor proj_real = project(pca, snap.real_latents);
        Tensor proj_gen = project(pca, snap.gen_latents);
        write_points_csv((dir / (tag + "_latent_real.csv")).string(), proj_real);
        write_points_csv((dir / (tag + "_latent_gen.csv")).string(), proj_gen);
        write_svg_scatter((dir / (tag + "_latent.svg")).string(),
                          {{to_points(proj_real), "#1f77b4", 1.5, "real"},
                           {to_points(proj_gen), "#d62728", 1.5, "generated"}},
                          trainer.spec().label + " latent PCA, " + tag);
    } catch (const DegenerateDataError& e) {
        std::cerr << "snapshot " << tag << ": skipping PCA plot (" << e.what() << ")\n";
    }
    write_svg_scatter((dir / (tag + "_data.svg")).string(),
                      {{to_points(snap.real_samples), "#1f77b4", 1.5, "real"},
                       {to_points(snap.gen_samples), "#d62728", 1.5, "generated"}},
                      trainer.spec().label + " data space, " + tag);
}

void write_coverage_csv(const fs::path& path, const ModeCoverageReport& report,
                        const GaussianGrid& grid) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write coverage csv: " + path.string());
    out << "mode,mean_x,mean_y,hq_count,covered\n";
    for (size_t i = 0; i < report.per_mode_counts.size(); ++i) {
        out << i << ',' << format_double(grid.means[i][0]) << ',' << format_double(grid.means[i][1])
            << ',' << report.per_mode_counts[i] << ','
            << (report.per_mode_counts[i] >= report.coverage_floor ? 1 : 0) << '\n';
    }
}

RunResult drive_run(Trainer& trainer, int64_t target_step, const std::string& out_dir,
                    const MetricsRecord* resume_record) {
    const ExperimentSpec& spec = trainer.spec();

    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir / "snapshots", ec);
    if (ec) throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());
    {
        std::ofstream cfg(dir / "config.txt");
        if (!cfg) throw ConfigError("output directory not writable: " + out_dir);
        cfg << render_config(spec);
    }

    std::ofstream csv(dir / "metrics.csv", std::ios::binary);
    csv << metrics_csv_header();

    RunResult result;
    result.out_dir = out_dir;

    MetricsRecord last;
    if (resume_record) {
        last = *resume_record;
        csv << to_csv_row(last);
    } else {
        last = trainer.make_record(0, nullptr);
        csv << to_csv_row(last);
    }
    csv.flush();

    try {
        for (int64_t s = trainer.current_step() + 1; s <= target_step; ++s) {
            TrainStepResult stats = trainer.step();
            const bool record_now = (s % spec.snapshot_cadence == 0) || s == target_step;
            const bool plot_now = (s % spec.plot_cadence == 0) || s == target_step;
            if (record_now) {
                last = trainer.make_record(s, &stats);
                csv << to_csv_row(last);
                csv.flush();
            }
            if (plot_now)
                write_snapshot_files(trainer, trainer.analysis_snapshot(s), s, dir / "snapshots");
        }
    } catch (const DivergenceError& e) {
        csv.flush();
        std::ofstream abort_file(dir / "abort.txt");
        abort_file << "step " << trainer.current_step() << ": " << e.what() << '\n';
        result.status = RunStatus::NanAbort;
        result.abort_message = e.what();
        result.final_record = last;
        return result;
    }

    Trainer::Snapshot final_snap = trainer.analysis_snapshot(trainer.current_step());
    write_coverage_csv(dir / "coverage.csv", final_snap.coverage, trainer.grid());
    save_checkpoint((dir / "checkpoint_final.bin").string(), trainer.to_checkpoint(last));

    result.final_record = last;
    result.coverage = final_snap.coverage;
    return result;
}

}  // namespace

RunResult run_experiment(const ExperimentSpec& spec) {
    validate_spec(spec);
    Trainer trainer(spec);
    return drive_run(trainer, spec.train.steps, spec.out_dir, nullptr);
}

RunResult continue_experiment(const Checkpoint& ckpt, int64_t extra_steps,
                              const std::string& out_dir) {
    if (extra_steps < 0) throw ArgumentError("extra_steps must be >= 0");
    Trainer trainer(ckpt);
    return drive_run(trainer, ckpt.step + extra_steps, out_dir, &ckpt.last_record);
}

RunSummary load_run(const std::string& dir) {
    RunSummary run;
    run.dir = dir;
    run.spec = parse_config_file((fs::path(dir) / "config.txt").string());
    run.metrics = read_metrics_csv((fs::path(dir) / "metrics.csv").string());
    if (run.metrics.empty()) throw Error("run has no metrics rows: " + dir);
    return run;
}

namespace {

ComparisonReport::Side summarize(const RunSummary& run) {
    ComparisonReport::Side side;
    side.dir = run.dir;
    side.label = run.spec.label;
    side.variant = to_string(run.spec.train.variant);
    side.final_record = run.metrics.back();
    side.min_k = side.max_k = run.metrics.front().k;
    double acc = 0.0;
    std::vector<double> k_series;
    k_series.reserve(run.metrics.size());
    for (const auto& r : run.metrics) {
        acc += r.loss_constraint;
        side.min_k = std::min(side.min_k, r.k);
        side.max_k = std::max(side.max_k, r.k);
        k_series.push_back(r.k);
    }
    side.mean_loss_constraint = acc / run.metrics.size();
    side.final_loss_constraint = run.metrics.back().loss_constraint;
    const int window_rows =
        std::max(1, run.spec.kdrop_window / std::max(1, run.spec.snapshot_cadence));
    side.collapse_signals = detect_k_drop(k_series, run.spec.kdrop_delta, window_rows);
    // translate row indices back to training steps
    for (auto& sig : side.collapse_signals)
        sig.step = run.metrics[static_cast<size_t>(sig.step)].step;
    return side;
}

}  // namespace

ComparisonReport compare_runs(const std::string& dir_a, const std::string& dir_b) {
    RunSummary a = load_run(dir_a);
    RunSummary b = load_run(dir_b);
    if (!same_dataset_params(a.spec, b.spec))
        throw Error("runs use different dataset parameters; comparison is meaningless");

    ComparisonReport report;
    report.a = summarize(a);
    report.b = summarize(b);
    report.delta_modes_covered =
        report.a.final_record.modes_covered - report.b.final_record.modes_covered;
    report.delta_hq_fraction = report.a.final_record.hq_fraction - report.b.final_record.hq_fraction;
    report.delta_final_loss_constraint =
        report.a.final_loss_constraint - report.b.final_loss_constraint;
    return report;
}

namespace {

void render_side_text(std::ostream& os, const ComparisonReport::Side& side) {
    const MetricsRecord& fr = side.final_record;
    os << side.dir << " (" << side.variant;
    if (!side.label.empty()) os << ", " << side.label;
    os << ")\n";
    os << "  final step           " << fr.step << '\n';
    os << "  modes covered        " << fr.modes_covered << "/25\n";
    os << "  hq fraction          " << format_double(fr.hq_fraction) << '\n';
    os << "  final loss_real      " << format_double(fr.loss_real) << '\n';
    os << "  final loss_gen       " << format_double(fr.loss_gen) << '\n';
    os << "  final constraint     " << format_double(side.final_loss_constraint) << '\n';
    os << "  mean constraint      " << format_double(side.mean_loss_constraint) << '\n';
    os << "  k range              [" << format_double(side.min_k) << ", "
       << format_double(side.max_k) << "]\n";
    os << "  collapse signals     " << side.collapse_signals.size();
    if (!side.collapse_signals.empty())
        os << " (first at step " << side.collapse_signals.front().step << ")";
    os << '\n';
}

nlohmann::json side_json(const ComparisonReport::Side& side) {
    nlohmann::json signals = nlohmann::json::array();
    for (const auto& sig : side.collapse_signals)
        signals.push_back({{"step", sig.step},
                           {"k_before", sig.k_before},
                           {"k_after", sig.k_after},
                           {"triggered", sig.triggered}});
    const MetricsRecord& fr = side.final_record;
    return {
        {"dir", side.dir},
        {"label", side.label},
        {"variant", side.variant},
        {"final_step", fr.step},
        {"modes_covered", fr.modes_covered},
        {"hq_fraction", fr.hq_fraction},
        {"final_loss_real", fr.loss_real},
        {"final_loss_gen", fr.loss_gen},
        {"final_loss_constraint", side.final_loss_constraint},
        {"mean_loss_constraint", side.mean_loss_constraint},
        {"min_k", side.min_k},
        {"max_k", side.max_k},
        {"collapse_signals", signals},
    };
}

}  // namespace

std::string render_text(const ComparisonReport& report) {
    std::ostringstream os;
    render_side_text(os, report.a);
    render_side_text(os, report.b);
    os << "deltas (a - b)\n";
    os << "  modes covered        " << report.delta_modes_covered << '\n';
    os << "  hq fraction          " << format_double(report.delta_hq_fraction) << '\n';
    os << "  final constraint     " << format_double(report.delta_final_loss_constraint) << '\n';
    return os.str();
}

std::string render_json(const ComparisonReport& report) {
    nlohmann::json j = {
        {"a", side_json(report.a)},
        {"b", side_json(report.b)},
        {"delta_modes_covered", report.delta_modes_covered},
        {"delta_hq_fraction", report.delta_hq_fraction},
        {"delta_final_loss_constraint", report.delta_final_loss_constraint},
    };
    return j.dump(2) + "\n";
}

}  // namespace began
