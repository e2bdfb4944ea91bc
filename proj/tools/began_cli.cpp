#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "began/checkpoint.hpp"
#include "began/error.hpp"
#include "began/experiment.hpp"
#include "began/latent.hpp"

namespace fs = std::filesystem;
using namespace began;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNanAbort = 3;

struct TrainFlags {
    std::string config_file;
    std::string resume;
    int64_t extra_steps = 0;
    ExperimentSpec spec;
};

void add_spec_options(CLI::App* cmd, ExperimentSpec& spec) {
    cmd->add_option("--out", spec.out_dir, "run output directory");
    cmd->add_option("--label", spec.label, "free-text run label");
    cmd->add_option("--seed", spec.train.seed, "master seed");
    cmd->add_option("--variant", [&spec](const std::vector<std::string>& v) {
        spec.train.variant = variant_from_string(v.front());
        return true;
    }, "began | began-cs")->expected(1);
    cmd->add_option("--alpha", spec.train.alpha, "constraint loss weight");
    cmd->add_option("--gamma", spec.train.gamma, "diversity ratio");
    cmd->add_option("--lambda", spec.train.lambda, "k update gain");
    cmd->add_option("--lr-g", spec.train.lr_g, "generator learning rate");
    cmd->add_option("--lr-d", spec.train.lr_d, "discriminator learning rate");
    cmd->add_option("--beta1", spec.train.beta1, "adam beta1");
    cmd->add_option("--beta2", spec.train.beta2, "adam beta2");
    cmd->add_option("--latent-dim", spec.train.latent_dim, "latent dimension");
    cmd->add_option("--hidden-dim", spec.train.hidden_dim, "hidden layer width");
    cmd->add_option("--batch-size", spec.train.batch_size, "batch size");
    cmd->add_option("--steps", spec.train.steps, "training steps");
    cmd->add_option("--output-bound", spec.train.output_bound,
                    "soft clip on generator/decoder outputs (0 = none)");
    cmd->add_option("--loss-norm", [&spec](const std::vector<std::string>& v) {
        if (v.front() == "l2") spec.train.norm = NormKind::L2;
        else if (v.front() == "l1") spec.train.norm = NormKind::L1;
        else throw CLI::ValidationError("--loss-norm", "must be l1 or l2");
        return true;
    }, "l2 | l1")->expected(1);
    cmd->add_option("--latent-distribution", [&spec](const std::vector<std::string>& v) {
        spec.latent_distribution = latent_distribution_from_string(v.front());
        return true;
    }, "uniform | gaussian")->expected(1);
    cmd->add_option("--grid-half-width", spec.grid_half_width, "data grid half width");
    cmd->add_option("--data-sigma", spec.data_sigma, "per-mode noise scale");
    cmd->add_option("--snapshot-cadence", spec.snapshot_cadence, "steps between metric rows");
    cmd->add_option("--plot-cadence", spec.plot_cadence, "steps between snapshot plots");
    cmd->add_option("--coverage-samples", spec.coverage_samples, "samples for coverage report");
    cmd->add_option("--kdrop-delta", spec.kdrop_delta, "collapse signal drop threshold");
    cmd->add_option("--kdrop-window", spec.kdrop_window, "collapse signal window (steps)");
}

int cmd_train(const TrainFlags& flags) {
    RunResult result;
    if (!flags.resume.empty()) {
        Checkpoint ckpt = load_checkpoint(flags.resume);
        result = continue_experiment(ckpt, flags.extra_steps, flags.spec.out_dir);
    } else {
        result = run_experiment(flags.spec);
    }
    if (result.status == RunStatus::NanAbort) {
        std::cerr << "training aborted on non-finite loss: " << result.abort_message << '\n';
        return kExitNanAbort;
    }
    std::cout << "run complete: " << result.out_dir << '\n'
              << "  final step " << result.final_record.step << ", modes "
              << result.final_record.modes_covered << "/25, hq_fraction "
              << format_double(result.final_record.hq_fraction) << ", k "
              << format_double(result.final_record.k) << '\n';
    return kExitOk;
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b, const std::string& json_out) {
    ComparisonReport report = compare_runs(dir_a, dir_b);
    std::cout << render_text(report);
    if (!json_out.empty()) {
        std::ofstream out(json_out);
        if (!out) throw Error("cannot write " + json_out);
        out << render_json(report);
    }
    return kExitOk;
}

int cmd_analyze(const std::string& ckpt_path, const std::string& out_dir, int samples) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    if (samples > 0) ckpt.spec.coverage_samples = samples;
    Trainer trainer(ckpt);
    fs::create_directories(out_dir);

    Trainer::Snapshot snap = trainer.analysis_snapshot(trainer.current_step());
    PcaProjection pca = fit_pca(snap.real_latents);
    Tensor proj_real = project(pca, snap.real_latents);
    Tensor proj_gen = project(pca, snap.gen_latents);
    write_points_csv((fs::path(out_dir) / "latent_real.csv").string(), proj_real);
    write_points_csv((fs::path(out_dir) / "latent_gen.csv").string(), proj_gen);

    std::vector<ScatterSeries> latent_series{
        {{}, "#1f77b4", 1.5, "real"}, {{}, "#d62728", 1.5, "generated"}};
    const double* pr = proj_real.data();
    for (int i = 0; i < proj_real.shape()[0]; ++i)
        latent_series[0].points.push_back({pr[2 * i], pr[2 * i + 1]});
    const double* pg = proj_gen.data();
    for (int i = 0; i < proj_gen.shape()[0]; ++i)
        latent_series[1].points.push_back({pg[2 * i], pg[2 * i + 1]});
    write_svg_scatter((fs::path(out_dir) / "latent.svg").string(), latent_series, "latent PCA");

    std::vector<ScatterSeries> data_series{
        {{}, "#1f77b4", 1.5, "real"}, {{}, "#d62728", 1.5, "generated"}};
    const double* dr = snap.real_samples.data();
    for (int i = 0; i < snap.real_samples.shape()[0]; ++i)
        data_series[0].points.push_back({dr[2 * i], dr[2 * i + 1]});
    const double* dg = snap.gen_samples.data();
    for (int i = 0; i < snap.gen_samples.shape()[0]; ++i)
        data_series[1].points.push_back({dg[2 * i], dg[2 * i + 1]});
    write_svg_scatter((fs::path(out_dir) / "data.svg").string(), data_series, "data space");

    std::ofstream cov(fs::path(out_dir) / "coverage.csv");
    cov << "mode,mean_x,mean_y,hq_count,covered\n";
    for (size_t i = 0; i < snap.coverage.per_mode_counts.size(); ++i)
        cov << i << ',' << format_double(trainer.grid().means[i][0]) << ','
            << format_double(trainer.grid().means[i][1]) << ',' << snap.coverage.per_mode_counts[i]
            << ',' << (snap.coverage.per_mode_counts[i] >= snap.coverage.coverage_floor ? 1 : 0)
            << '\n';

    std::cout << "step " << trainer.current_step() << ": modes " << snap.coverage.modes_covered
              << "/25, hq_fraction " << format_double(snap.coverage.hq_fraction) << ", var_real "
              << format_double(snap.var_real) << ", var_gen " << format_double(snap.var_gen)
              << ", explained variance [" << format_double(pca.explained_variance[0]) << ", "
              << format_double(pca.explained_variance[1]) << "]\n";
    return kExitOk;
}

struct ZSearchFlags {
    std::string ckpt_path;
    std::string out_dir = "zsearch_out";
    std::string init = "random";
    std::string target_source = "gen";
    int targets = 16;
    int iters = 10000;
    double lr = 1e-2;
    double tol = 1e-3;
    uint64_t seed = 1;
};

int cmd_zsearch(const ZSearchFlags& flags) {
    Checkpoint ckpt = load_checkpoint(flags.ckpt_path);
    Trainer trainer(ckpt);
    fs::create_directories(flags.out_dir);

    ZSearchConfig cfg;
    cfg.max_iters = flags.iters;
    cfg.lr = flags.lr;
    cfg.tol = flags.tol;
    cfg.init = flags.init == "encoder" ? ZSearchInit::EncoderWarmStart : ZSearchInit::Random;

    RngEngine rng = make_stream(flags.seed, "zsearch-cli");
    const GaussianGrid& grid = trainer.grid();
    LatentSampler latents = trainer.spec().make_latent_sampler();

    std::ofstream csv(fs::path(flags.out_dir) / "zsearch.csv");
    csv << "target,target_x,target_y,found_x,found_y,final_loss,iterations_to_tol\n";

    ScatterSeries target_series{{}, "#1f77b4", 2.5, "target"};
    ScatterSeries found_series{{}, "#d62728", 2.5, "G(z*)"};

    int solved = 0;
    for (int t = 0; t < flags.targets; ++t) {
        Tensor x_star;
        if (flags.target_source == "real") {
            x_star = sample_real(grid, 1, rng);
        } else {
            Tensor z0 = sample_latent(latents, 1, rng);
            x_star = trainer.generator().forward(z0);
        }
        Tensor init = initial_search_latent(x_star, trainer.generator(), &trainer.discriminator(),
                                            cfg, rng);
        ZSearchResult result = z_star_search(x_star, trainer.generator(), cfg, init);
        Tensor found = trainer.generator().forward(result.z);
        if (result.iterations_to_tol >= 0) ++solved;

        csv << t << ',' << format_double(x_star.data()[0]) << ',' << format_double(x_star.data()[1])
            << ',' << format_double(found.data()[0]) << ',' << format_double(found.data()[1]) << ','
            << format_double(result.best_loss) << ',' << result.iterations_to_tol << '\n';
        target_series.points.push_back({x_star.data()[0], x_star.data()[1]});
        found_series.points.push_back({found.data()[0], found.data()[1]});
    }
    write_svg_scatter((fs::path(flags.out_dir) / "zsearch.svg").string(),
                      {target_series, found_series}, "latent inversion");
    std::cout << solved << "/" << flags.targets << " targets reached tol " << flags.tol << '\n';
    return kExitOk;
}

ScatterSeries grid_series(const GaussianGrid& grid) {
    ScatterSeries s{{}, "#999999", 3.0, "modes"};
    for (const auto& m : grid.means) s.points.push_back({m[0], m[1]});
    return s;
}

int cmd_sweep_dim(const std::string& ckpt_path, const std::string& out_dir, int dim, double lo,
                  double hi, double step, uint64_t seed) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    Trainer trainer(ckpt);
    fs::create_directories(out_dir);

    // base latent: one-shot encoding of a fresh real sample
    RngEngine rng = make_stream(seed, "sweep-cli");
    Tensor x_star = sample_real(trainer.grid(), 1, rng);
    Tensor base = one_shot_encode(x_star, trainer.discriminator());

    std::vector<Tensor> swept = dimension_sweep(base, dim, lo, hi, step);
    std::ofstream latents_csv(fs::path(out_dir) / "sweep_latents.csv");
    ScatterSeries gen_points{{}, "#d62728", 2.5, "G(z)"};
    std::ofstream points_csv(fs::path(out_dir) / "sweep_points.csv");
    points_csv << "value,gen_x,gen_y\n";
    for (size_t i = 0; i < swept.size(); ++i) {
        const double* z = swept[i].data();
        for (int64_t j = 0; j < swept[i].size(); ++j) {
            if (j) latents_csv << ',';
            latents_csv << format_double(z[j]);
        }
        latents_csv << '\n';
        Tensor gen = trainer.generator().forward(swept[i]);
        points_csv << format_double(z[dim]) << ',' << format_double(gen.data()[0]) << ','
                   << format_double(gen.data()[1]) << '\n';
        gen_points.points.push_back({gen.data()[0], gen.data()[1]});
    }
    write_svg_scatter((fs::path(out_dir) / "sweep.svg").string(),
                      {grid_series(trainer.grid()), gen_points},
                      "dimension " + std::to_string(dim) + " sweep");
    std::cout << "swept dimension " << dim << " over " << swept.size() << " values\n";
    return kExitOk;
}

int cmd_interpolate(const std::string& ckpt_path, const std::string& out_dir, int steps,
                    uint64_t seed) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    Trainer trainer(ckpt);
    fs::create_directories(out_dir);

    RngEngine rng = make_stream(seed, "interp-cli");
    Tensor x_a = sample_real(trainer.grid(), 1, rng);
    Tensor x_b = sample_real(trainer.grid(), 1, rng);
    Tensor z_a = one_shot_encode(x_a, trainer.discriminator());
    Tensor z_b = one_shot_encode(x_b, trainer.discriminator());

    std::vector<Tensor> path = interpolate(z_a, z_b, steps);
    std::ofstream latents_csv(fs::path(out_dir) / "interp_latents.csv");
    ScatterSeries gen_points{{}, "#d62728", 2.5, "G(z)"};
    for (const auto& z : path) {
        const double* p = z.data();
        for (int64_t j = 0; j < z.size(); ++j) {
            if (j) latents_csv << ',';
            latents_csv << format_double(p[j]);
        }
        latents_csv << '\n';
        Tensor gen = trainer.generator().forward(z);
        gen_points.points.push_back({gen.data()[0], gen.data()[1]});
    }
    ScatterSeries endpoints{{{x_a.data()[0], x_a.data()[1]}, {x_b.data()[0], x_b.data()[1]}},
                            "#1f77b4", 3.5, "endpoints"};
    write_svg_scatter((fs::path(out_dir) / "interp.svg").string(),
                      {grid_series(trainer.grid()), endpoints, gen_points}, "latent interpolation");
    std::cout << "interpolated " << path.size() << " points\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BEGAN / BEGAN-CS training laboratory on the 25-mode Gaussian grid"};
    app.require_subcommand(1);

    // train
    TrainFlags train_flags;
    CLI::App* train = app.add_subcommand("train", "run a seeded training experiment");
    train->add_option("--config", train_flags.config_file, "flat key = value config file");
    train->add_option("--resume", train_flags.resume, "checkpoint to continue from");
    train->add_option("--extra-steps", train_flags.extra_steps, "steps to train after resume");
    add_spec_options(train, train_flags.spec);

    // compare
    std::string cmp_a, cmp_b, cmp_json;
    CLI::App* compare = app.add_subcommand("compare", "side-by-side digest of two runs");
    compare->add_option("dir_a", cmp_a)->required();
    compare->add_option("dir_b", cmp_b)->required();
    compare->add_option("--json", cmp_json, "also write a JSON report");

    // analyze
    std::string an_ckpt, an_out = "analysis_out";
    int an_samples = 0;
    CLI::App* analyze = app.add_subcommand("analyze", "re-run PCA and coverage from a checkpoint");
    analyze->add_option("--checkpoint", an_ckpt)->required();
    analyze->add_option("--out", an_out);
    analyze->add_option("--samples", an_samples, "override coverage sample count");

    // zsearch
    ZSearchFlags zs;
    CLI::App* zsearch = app.add_subcommand("zsearch", "gradient-descent generator inversion");
    zsearch->add_option("--checkpoint", zs.ckpt_path)->required();
    zsearch->add_option("--out", zs.out_dir);
    zsearch->add_option("--targets", zs.targets);
    zsearch->add_option("--iters", zs.iters);
    zsearch->add_option("--lr", zs.lr);
    zsearch->add_option("--tol", zs.tol);
    zsearch->add_option("--init", zs.init, "random | encoder");
    zsearch->add_option("--target-source", zs.target_source, "gen | real");
    zsearch->add_option("--seed", zs.seed);

    // sweep-dim
    std::string sw_ckpt, sw_out = "sweep_out";
    int sw_dim = 0;
    double sw_lo = -5.0, sw_hi = 5.0, sw_step = 1.0;
    uint64_t sw_seed = 1;
    CLI::App* sweep = app.add_subcommand("sweep-dim", "per-dimension latent replacement sweep");
    sweep->add_option("--checkpoint", sw_ckpt)->required();
    sweep->add_option("--out", sw_out);
    sweep->add_option("--dim", sw_dim)->required();
    sweep->add_option("--lo", sw_lo);
    sweep->add_option("--hi", sw_hi);
    sweep->add_option("--step", sw_step);
    sweep->add_option("--seed", sw_seed);

    // interpolate
    std::string in_ckpt, in_out = "interp_out";
    int in_steps = 11;
    uint64_t in_seed = 1;
    CLI::App* interp = app.add_subcommand("interpolate", "latent-space interpolation of two samples");
    interp->add_option("--checkpoint", in_ckpt)->required();
    interp->add_option("--out", in_out);
    interp->add_option("--steps", in_steps);
    interp->add_option("--seed", in_seed);

    try {
        // A config file supplies the base spec; explicit flags override it,
        // so parse flags onto the spec after loading the file.
        app.parse(argc, argv);
        if (train->parsed() && !train_flags.config_file.empty()) {
            ExperimentSpec base = parse_config_file(train_flags.config_file);
            // re-parse so command-line flags win over file values
            TrainFlags merged;
            merged.spec = base;
            CLI::App reparse{""};
            reparse.allow_extras();
            CLI::App* sub = reparse.add_subcommand("train", "");
            sub->allow_extras();
            sub->add_option("--config", merged.config_file);
            sub->add_option("--resume", merged.resume);
            sub->add_option("--extra-steps", merged.extra_steps);
            add_spec_options(sub, merged.spec);
            reparse.parse(argc, argv);
            train_flags = merged;
        }

        if (train->parsed()) return cmd_train(train_flags);
        if (compare->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_json);
        if (analyze->parsed()) return cmd_analyze(an_ckpt, an_out, an_samples);
        if (zsearch->parsed()) return cmd_zsearch(zs);
        if (sweep->parsed()) return cmd_sweep_dim(sw_ckpt, sw_out, sw_dim, sw_lo, sw_hi, sw_step, sw_seed);
        if (interp->parsed()) return cmd_interpolate(in_ckpt, in_out, in_steps, in_seed);
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DivergenceError& e) {
        std::cerr << "training diverged: " << e.what() << '\n';
        return kExitNanAbort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
