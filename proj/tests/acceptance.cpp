// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. The heavy section trains both model variants over five seeds at
// the full default budget; expect a couple of hours of wall time on one core.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "began/error.hpp"
#include "began/experiment.hpp"
#include "began/gradcheck.hpp"
#include "began/latent.hpp"
#include "oracles.hpp"

using namespace began;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail = "") {
    std::printf("%s  criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Tensor random_tensor(std::vector<int> shape, RngEngine& rng, double lo = -2.0, double hi = 2.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) t.data()[i] = uniform(rng, lo, hi);
    return t;
}

// ---- criterion 1: gradient correctness --------------------------------------

void criterion_gradients() {
    RngEngine rng = make_stream(2024, "acceptance-grad");
    int checked = 0;
    double worst = 0.0;

    // 60 random small networks with reconstruction-style losses
    for (int trial = 0; trial < 60; ++trial) {
        const int latent = 2 + static_cast<int>(rng() % 4);
        const int hidden = 4 + static_cast<int>(rng() % 8);
        const int batch = 2 + static_cast<int>(rng() % 4);
        Mlp net = make_mlp({latent, hidden, 2}, Activation::Relu, rng);
        Tensor target = random_tensor({batch, 2}, rng);
        Tensor z0 = random_tensor({batch, latent}, rng, -1, 1);
        auto f = [&](const Tensor& z) { return l2_norm(sub(net.forward(z), target)); };
        worst = std::max(worst, finite_diff_check(f, z0, 1e-4));
        ++checked;
    }

    // 40 instances of the full three-term discriminator objective,
    // differentiated with respect to encoder and decoder weights
    for (int trial = 0; trial < 40; ++trial) {
        const int latent = 2 + static_cast<int>(rng() % 3);
        const int hidden = 4 + static_cast<int>(rng() % 6);
        const int batch = 3;
        Generator g{make_mlp({latent, hidden, 2}, Activation::Relu, rng)};
        AutoencoderDiscriminator d{make_mlp({2, hidden, latent}, Activation::Relu, rng),
                                   make_mlp({latent, hidden, 2}, Activation::Relu, rng)};
        Tensor x = random_tensor({batch, 2}, rng);
        Tensor z = random_tensor({batch, latent}, rng, -1, 1);
        const double k = uniform(rng, 0.1, 0.9);
        const double alpha = uniform(rng, 0.05, 0.3);

        const bool probe_enc = trial % 2 == 0;
        Mlp& target_net = probe_enc ? d.enc : d.dec;
        const size_t layer = static_cast<size_t>(rng() % target_net.layers.size());
        Tensor original = target_net.layers[layer].weight;
        auto f = [&, layer](const Tensor& w) {
            AutoencoderDiscriminator probe = d;
            Mlp& pn = probe_enc ? probe.enc : probe.dec;
            pn.layers[layer].weight = w;
            return discriminator_loss(x, z, k, alpha, g, probe);
        };
        worst = std::max(worst, finite_diff_check(f, original, 1e-4));
        ++checked;
    }

    report(1, "gradient correctness", checked == 100 && worst < 1e-4,
           "max relative error " + format_double(worst) + " over " + std::to_string(checked) +
               " instances");
}

// ---- criteria 2-5: the full toy experiment ----------------------------------

struct RunRecord {
    uint64_t seed;
    Variant variant;
    std::string dir;
    RunResult result;
};

ExperimentSpec toy_spec(Variant variant, uint64_t seed, const fs::path& root) {
    ExperimentSpec spec;  // defaults carry the published toy hyperparameters
    spec.train.variant = variant;
    spec.train.seed = seed;
    spec.label = to_string(variant) + "-seed" + std::to_string(seed);
    spec.out_dir = (root / spec.label).string();
    return spec;
}

std::vector<RunRecord> run_toy_experiments(const fs::path& root, bool reuse_existing) {
    std::vector<RunRecord> runs;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        for (Variant variant : {Variant::Began, Variant::BeganCS}) {
            ExperimentSpec spec = toy_spec(variant, seed, root);
            RunRecord rec{seed, variant, spec.out_dir, {}};
            const fs::path done = fs::path(spec.out_dir) / "checkpoint_final.bin";
            if (reuse_existing && fs::exists(done)) {
                auto rows = read_metrics_csv((fs::path(spec.out_dir) / "metrics.csv").string());
                rec.result.status = RunStatus::Ok;
                rec.result.out_dir = spec.out_dir;
                rec.result.final_record = rows.back();
                Trainer trainer(load_checkpoint(done.string()));
                rec.result.coverage = trainer.analysis_snapshot(trainer.current_step()).coverage;
            } else {
                std::printf("  training %s (%lld steps)...\n", spec.label.c_str(),
                            static_cast<long long>(spec.train.steps));
                std::fflush(stdout);
                rec.result = run_experiment(spec);
            }
            runs.push_back(std::move(rec));
        }
    }
    return runs;
}

void criterion_equilibrium(const std::vector<RunRecord>& runs) {
    bool k_ok = true;
    int64_t rows_checked = 0;
    for (const auto& run : runs) {
        auto rows = read_metrics_csv((fs::path(run.dir) / "metrics.csv").string());
        for (const auto& r : rows) {
            if (!(r.k >= 0.0 && r.k <= 1.0)) k_ok = false;
            ++rows_checked;
        }
    }

    // direct-evaluation oracle over random tuples, exact to floating point
    RngEngine rng = make_stream(2024, "acceptance-k");
    bool update_ok = true;
    for (int i = 0; i < 1000; ++i) {
        const double k = uniform(rng, 0, 1);
        const double gamma = uniform(rng, 0, 30);
        const double lambda = uniform(rng, 0, 1e-2);
        const double lr = uniform(rng, 0, 5);
        const double lg = uniform(rng, 0, 5);
        const double expected = std::clamp(k + lambda * (gamma * lr - lg), 0.0, 1.0);
        if (update_k(EquilibriumState{k, lambda, gamma}, lr, lg).k != expected) update_ok = false;
    }

    report(2, "equilibrium invariant", k_ok && update_ok,
           std::to_string(rows_checked) + " logged k values in [0,1]; 1000-tuple oracle " +
               (update_ok ? "exact" : "mismatch"));
}

std::vector<const RunRecord*> passing_cs_runs(const std::vector<RunRecord>& runs) {
    std::vector<const RunRecord*> out;
    for (const auto& run : runs)
        if (run.variant == Variant::BeganCS && run.result.status == RunStatus::Ok &&
            run.result.coverage.modes_covered >= 20 && run.result.coverage.hq_fraction >= 0.7)
            out.push_back(&run);
    return out;
}

void criterion_mode_coverage(const std::vector<RunRecord>& runs,
                             const std::vector<const RunRecord*>& passing) {
    std::ostringstream detail;
    for (const auto& run : runs) {
        if (run.variant != Variant::BeganCS) continue;
        detail << "seed " << run.seed << ": " << run.result.coverage.modes_covered << "/25 hq "
               << format_double(run.result.coverage.hq_fraction) << "; ";
    }
    report(3, "toy mode coverage (began-cs, 5 seeds)", passing.size() >= 3,
           std::to_string(passing.size()) + "/5 seeds passed -- " + detail.str());
}

void criterion_constraint_effect(const std::vector<const RunRecord*>& passing) {
    if (passing.empty()) {
        report(4, "constraint-loss effect", false, "no passing began-cs runs to evaluate");
        return;
    }
    bool all_ok = true;
    std::ostringstream detail;
    for (const RunRecord* run : passing) {
        Checkpoint ckpt = load_checkpoint((fs::path(run->dir) / "checkpoint_final.bin").string());
        Trainer trained(ckpt);
        Trainer initial(ckpt.spec);  // same seed, step 0

        // fixed probe set: |z - Enc(G(z))| at the final checkpoint vs init
        RngEngine probe_rng = make_stream(ckpt.spec.train.seed, "acceptance-probe");
        Tensor probe = sample_latent(ckpt.spec.make_latent_sampler(), 1024, probe_rng);
        auto probe_value = [&](Trainer& t) {
            return sample_norm_mean(
                       sub(probe, t.discriminator().encode(t.generator().forward(probe))),
                       NormKind::L2)
                .item();
        };
        const double v_init = probe_value(initial);
        const double v_final = probe_value(trained);
        const bool probe_ok = v_final <= 0.5 * v_init;

        // one-shot inversion vs a random-latent baseline over 256 real samples
        RngEngine eval_rng = make_stream(ckpt.spec.train.seed, "acceptance-oneshot");
        GaussianGrid grid = ckpt.spec.make_grid();
        Tensor x_star = sample_real(grid, 256, eval_rng);
        Tensor z_rand = sample_latent(ckpt.spec.make_latent_sampler(), 256, eval_rng);
        Tensor g_enc = trained.generator().forward(trained.discriminator().encode(x_star));
        Tensor g_rand = trained.generator().forward(z_rand);
        std::vector<double> err_enc, err_rand;
        for (int i = 0; i < 256; ++i) {
            auto dist = [&](const Tensor& gen) {
                const double dx = x_star.data()[2 * i] - gen.data()[2 * i];
                const double dy = x_star.data()[2 * i + 1] - gen.data()[2 * i + 1];
                return std::sqrt(dx * dx + dy * dy);
            };
            err_enc.push_back(dist(g_enc));
            err_rand.push_back(dist(g_rand));
        }
        const double med_enc = median(err_enc);
        const double med_rand = median(err_rand);
        const bool oneshot_ok = med_rand >= 5.0 * med_enc;

        if (!(probe_ok && oneshot_ok)) all_ok = false;
        detail << "seed " << run->seed << ": probe " << format_double(v_final) << "/"
               << format_double(v_init) << (probe_ok ? " ok" : " FAIL") << ", one-shot median "
               << format_double(med_enc) << " vs random " << format_double(med_rand)
               << (oneshot_ok ? " ok" : " FAIL") << "; ";
    }
    report(4, "constraint-loss effect", all_ok, detail.str());
}

void criterion_zsearch(const std::vector<const RunRecord*>& passing) {
    if (passing.empty()) {
        report(5, "z*-search", false, "no trained began-cs checkpoint available");
        return;
    }
    const RunRecord* run = passing.front();
    Checkpoint ckpt = load_checkpoint((fs::path(run->dir) / "checkpoint_final.bin").string());
    Trainer trainer(ckpt);
    LatentSampler latents = ckpt.spec.make_latent_sampler();

    ZSearchConfig cfg;  // 10000 iterations, tol 1e-3
    RngEngine rng = make_stream(2024, "acceptance-zsearch");

    int solved = 0;
    std::vector<double> iters_random, iters_warm;
    const int targets = 32;
    for (int t = 0; t < targets; ++t) {
        Tensor z0 = sample_latent(latents, 1, rng);
        Tensor x_star = trainer.generator().forward(z0);

        cfg.init = ZSearchInit::Random;
        Tensor init_r = initial_search_latent(x_star, trainer.generator(), nullptr, cfg, rng);
        ZSearchResult random_result = z_star_search(x_star, trainer.generator(), cfg, init_r);
        if (random_result.iterations_to_tol >= 0) {
            ++solved;
            iters_random.push_back(static_cast<double>(random_result.iterations_to_tol));
        } else {
            iters_random.push_back(static_cast<double>(cfg.max_iters));
        }

        cfg.init = ZSearchInit::EncoderWarmStart;
        Tensor init_w = initial_search_latent(x_star, trainer.generator(),
                                              &trainer.discriminator(), cfg, rng);
        ZSearchResult warm_result = z_star_search(x_star, trainer.generator(), cfg, init_w);
        iters_warm.push_back(warm_result.iterations_to_tol >= 0
                                 ? static_cast<double>(warm_result.iterations_to_tol)
                                 : static_cast<double>(cfg.max_iters));
    }
    const double solve_rate = static_cast<double>(solved) / targets;
    const double med_random = median(iters_random);
    const double med_warm = median(iters_warm);
    const bool ok = solve_rate >= 0.9 && med_warm < med_random;
    report(5, "z*-search", ok,
           format_double(solve_rate * 100) + "% solved < 1e-3 within 10000 iters; median iters " +
               format_double(med_random) + " random vs " + format_double(med_warm) +
               " encoder warm start");
}

// ---- criterion 6: PCA oracle -------------------------------------------------

void criterion_pca() {
    RngEngine rng = make_stream(2024, "acceptance-pca");
    bool all_ok = true;
    double worst = 0.0;
    int compared = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 20 + static_cast<int>(rng() % 40);
        const int dim = 3 + static_cast<int>(rng() % 10);
        Tensor latents = Tensor::zeros({n, dim});
        for (int64_t i = 0; i < latents.size(); ++i) latents.data()[i] = uniform(rng, -3, 3);

        std::vector<double> mean(dim, 0.0);
        for (int i = 0; i < n; ++i)
            for (int d = 0; d < dim; ++d) mean[d] += latents.data()[i * dim + d];
        for (auto& m : mean) m /= n;
        std::vector<double> cov(static_cast<size_t>(dim) * dim, 0.0);
        for (int i = 0; i < n; ++i)
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b)
                    cov[static_cast<size_t>(a) * dim + b] +=
                        (latents.data()[i * dim + a] - mean[a]) *
                        (latents.data()[i * dim + b] - mean[b]) / (n - 1);
        std::vector<double> evals, evecs;
        if (!oracles::lapack_symmetric_eigen(cov, dim, evals, evecs)) {
            report(6, "pca oracle equivalence", false, "LAPACKE oracle unavailable in this build");
            return;
        }

        PcaProjection p = fit_pca(latents);
        for (int comp = 0; comp < 2; ++comp) {
            worst = std::max(worst, std::abs(p.explained_variance[comp] - evals[comp]));
            if (std::abs(p.explained_variance[comp] - evals[comp]) > 1e-8) all_ok = false;
            double dot = 0.0;
            for (int d = 0; d < dim; ++d)
                dot += p.components[comp][d] * evecs[static_cast<size_t>(comp) * dim + d];
            const double sign = dot >= 0 ? 1.0 : -1.0;
            for (int d = 0; d < dim; ++d) {
                const double diff = std::abs(p.components[comp][d] -
                                             sign * evecs[static_cast<size_t>(comp) * dim + d]);
                worst = std::max(worst, diff);
                if (diff > 1e-8) all_ok = false;
            }
        }
        ++compared;
    }
    report(6, "pca oracle equivalence", all_ok && compared == 50,
           "50 matrices, worst deviation " + format_double(worst));
}

// ---- criteria 7-8: variant reduction and determinism --------------------------

void criterion_variant_reduction(const fs::path& root) {
    ExperimentSpec plain;
    plain.train.variant = Variant::Began;
    plain.train.alpha = 0.1;  // inert for this variant
    plain.train.steps = 600;
    plain.train.seed = 77;
    plain.snapshot_cadence = 100;
    plain.plot_cadence = 600;
    plain.out_dir = (root / "variant-began").string();

    ExperimentSpec cs = plain;
    cs.train.variant = Variant::BeganCS;
    cs.train.alpha = 0.0;
    cs.out_dir = (root / "variant-cs-alpha0").string();

    run_experiment(plain);
    run_experiment(cs);
    const bool identical = slurp(fs::path(plain.out_dir) / "metrics.csv") ==
                           slurp(fs::path(cs.out_dir) / "metrics.csv");
    report(7, "variant reduction at alpha = 0", identical,
           identical ? "byte-identical metrics" : "metrics diverged");
}

void criterion_determinism(const fs::path& root) {
    ExperimentSpec spec;
    spec.train.steps = 600;
    spec.train.seed = 99;
    spec.snapshot_cadence = 100;
    spec.plot_cadence = 600;
    spec.out_dir = (root / "det-a").string();
    run_experiment(spec);
    spec.out_dir = (root / "det-b").string();
    run_experiment(spec);
    const bool identical =
        slurp(root / "det-a" / "metrics.csv") == slurp(root / "det-b" / "metrics.csv");
    report(8, "determinism", identical,
           identical ? "byte-identical metrics" : "metrics diverged");
}

// ---- criterion 9: collapse signal ----------------------------------------------

void criterion_collapse_signal() {
    struct Trace {
        std::vector<double> k;
        int64_t drop_at;  // -1 when no drop should fire
    };
    std::vector<Trace> traces;

    // monotone and flat traces: no signals allowed
    traces.push_back({std::vector<double>(400, 0.5), -1});
    {
        std::vector<double> rising(400);
        for (size_t i = 0; i < rising.size(); ++i) rising[i] = 0.001 * static_cast<double>(i);
        traces.push_back({rising, -1});
    }
    {
        std::vector<double> steps(400);
        for (size_t i = 0; i < steps.size(); ++i)
            steps[i] = std::min(1.0, 0.1 * static_cast<double>(i / 40));
        traces.push_back({steps, -1});
    }
    // gentle decline below the threshold
    {
        std::vector<double> slow(400);
        for (size_t i = 0; i < slow.size(); ++i) slow[i] = 0.8 - 0.00005 * static_cast<double>(i);
        traces.push_back({slow, -1});
    }
    // sharp drops at known positions, various depths and baselines
    for (int variant = 0; variant < 6; ++variant) {
        const int64_t at = 100 + 30 * variant;
        const double before = 0.5 + 0.05 * variant;
        const double after = before - (0.15 + 0.05 * variant);
        std::vector<double> k(400, before);
        for (size_t i = static_cast<size_t>(at); i < k.size(); ++i) k[i] = after;
        traces.push_back({k, at});
    }

    bool all_ok = true;
    std::ostringstream detail;
    const double delta = 0.1;
    const int window = 200;
    for (size_t ti = 0; ti < traces.size(); ++ti) {
        auto signals = detect_k_drop(traces[ti].k, delta, window);
        if (traces[ti].drop_at < 0) {
            if (!signals.empty()) {
                all_ok = false;
                detail << "trace " << ti << ": false positive at " << signals.front().step << "; ";
            }
        } else {
            if (signals.empty() || signals.front().step != traces[ti].drop_at) {
                all_ok = false;
                detail << "trace " << ti << ": expected first signal at " << traces[ti].drop_at
                       << "; ";
            }
        }
    }
    report(9, "collapse signal", all_ok,
           all_ok ? "10 traces matched ground truth" : detail.str());
}

}  // namespace

int main(int argc, char** argv) {
    fs::path root = "acceptance_runs";
    bool reuse = true;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--out-dir" && i + 1 < argc)
            root = argv[++i];
        else if (arg == "--fresh")
            reuse = false;
    }
    fs::create_directories(root);

    std::printf("acceptance suite -> %s\n", root.string().c_str());
    criterion_gradients();
    criterion_pca();
    criterion_collapse_signal();
    criterion_variant_reduction(root);
    criterion_determinism(root);

    std::printf("running the full toy comparison (10 runs x 30000 steps)...\n");
    std::fflush(stdout);
    std::vector<RunRecord> runs = run_toy_experiments(root / "toy", reuse);
    for (const auto& run : runs)
        if (run.result.status != RunStatus::Ok)
            std::printf("  note: %s aborted (%s)\n", run.dir.c_str(),
                        run.result.abort_message.c_str());

    criterion_equilibrium(runs);
    const auto passing = passing_cs_runs(runs);
    criterion_mode_coverage(runs, passing);
    criterion_constraint_effect(passing);
    criterion_zsearch(passing);

    std::printf("%s\n", g_failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED");
    return g_failures == 0 ? 0 : 1;
}
