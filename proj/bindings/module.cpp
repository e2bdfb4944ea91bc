#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "began/analysis.hpp"
#include "began/checkpoint.hpp"
#include "began/error.hpp"
#include "began/experiment.hpp"
#include "began/gradcheck.hpp"
#include "began/latent.hpp"

namespace py = pybind11;
using namespace began;

namespace {

Tensor tensor_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    std::vector<int> shape;
    for (py::ssize_t i = 0; i < a.ndim(); ++i) shape.push_back(static_cast<int>(a.shape(i)));
    std::vector<double> values(a.data(), a.data() + a.size());
    return Tensor::from_values(std::move(shape), std::move(values));
}

py::array_t<double> array_from_tensor(const Tensor& t) {
    std::vector<py::ssize_t> shape;
    for (int d : t.shape()) shape.push_back(d);
    py::array_t<double> out(shape);
    std::copy(t.data(), t.data() + t.size(), out.mutable_data());
    return out;
}

py::array_t<double> array_1d(const std::vector<double>& v) {
    py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

ExperimentSpec spec_from_kwargs(const py::kwargs& kwargs) {
    // Route everything through the config parser so python and file configs
    // share one schema (including unknown-key rejection).
    std::string text = "schema_version = 1\n";
    for (auto item : kwargs) {
        const std::string key = py::str(item.first);
        text += key + " = " + std::string(py::str(item.second)) + "\n";
    }
    return parse_config_text(text);
}

py::dict record_to_dict(const MetricsRecord& r) {
    py::dict d;
    d["step"] = r.step;
    d["loss_real"] = r.loss_real;
    d["loss_gen"] = r.loss_gen;
    d["loss_constraint"] = r.loss_constraint;
    d["k"] = r.k;
    d["convergence_measure"] = r.convergence_measure;
    d["var_real"] = r.var_real;
    d["var_gen"] = r.var_gen;
    d["modes_covered"] = r.modes_covered;
    d["hq_fraction"] = r.hq_fraction;
    return d;
}

/// Thin model wrapper over a trainer checkpoint for inference-side work.
class Model {
  public:
    explicit Model(const std::string& checkpoint_path)
        : trainer_(load_checkpoint(checkpoint_path)) {}
    explicit Model(const Checkpoint& ckpt) : trainer_(ckpt) {}
    explicit Model(const ExperimentSpec& spec) : trainer_(spec) {}

    py::array_t<double> generate(const py::array_t<double>& z) {
        return array_from_tensor(trainer_.generator().forward(as_batch(z, latent_dim())));
    }
    py::array_t<double> encode(const py::array_t<double>& x) {
        return array_from_tensor(trainer_.discriminator().encode(as_batch(x, 2)));
    }
    py::array_t<double> reconstruct(const py::array_t<double>& x) {
        return array_from_tensor(trainer_.discriminator().reconstruct(as_batch(x, 2)));
    }
    int latent_dim() const { return trainer_.generator().latent_dim(); }
    int64_t step() const { return trainer_.current_step(); }
    double k() const { return trainer_.equilibrium().k; }

    Trainer& trainer() { return trainer_; }

  private:
    static Tensor as_batch(const py::array_t<double>& a, int width) {
        Tensor t = tensor_from_array(a);
        if (t.shape().size() == 1) t = Tensor::from_values({1, t.shape()[0]}, t.values());
        if (t.shape()[1] != width)
            throw DimensionError("expected width " + std::to_string(width) + ", got " +
                                 format_shape(t.shape()));
        return t;
    }

    Trainer trainer_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "BEGAN / BEGAN-CS training laboratory core";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DivergenceError>(m, "DivergenceError");

    py::class_<RunResult>(m, "RunResult")
        .def_property_readonly("ok", [](const RunResult& r) { return r.status == RunStatus::Ok; })
        .def_readonly("out_dir", &RunResult::out_dir)
        .def_property_readonly("final_record",
                               [](const RunResult& r) { return record_to_dict(r.final_record); })
        .def_property_readonly("modes_covered",
                               [](const RunResult& r) { return r.coverage.modes_covered; })
        .def_property_readonly("hq_fraction",
                               [](const RunResult& r) { return r.coverage.hq_fraction; });

    m.def("run_experiment", [](const py::kwargs& kwargs) {
        return run_experiment(spec_from_kwargs(kwargs));
    });

    py::class_<Model>(m, "Model")
        .def(py::init<const std::string&>(), py::arg("checkpoint_path"))
        .def_static("fresh",
                    [](const py::kwargs& kwargs) { return Model(spec_from_kwargs(kwargs)); })
        .def("generate", &Model::generate)
        .def("encode", &Model::encode)
        .def("reconstruct", &Model::reconstruct)
        .def_property_readonly("latent_dim", &Model::latent_dim)
        .def_property_readonly("step", &Model::step)
        .def_property_readonly("k", &Model::k);

    m.def(
        "z_star_search",
        [](Model& model, const py::array_t<double>& x_star, int max_iters, double lr, double tol,
           const std::string& init, uint64_t seed) {
            ZSearchConfig cfg;
            cfg.max_iters = max_iters;
            cfg.lr = lr;
            cfg.tol = tol;
            cfg.init = init == "encoder" ? ZSearchInit::EncoderWarmStart : ZSearchInit::Random;
            RngEngine rng = make_stream(seed, "zsearch-py");
            Tensor target = tensor_from_array(x_star);
            Tensor init_z = initial_search_latent(target, model.trainer().generator(),
                                                  &model.trainer().discriminator(), cfg, rng);
            ZSearchResult result =
                z_star_search(target, model.trainer().generator(), cfg, init_z);
            py::dict d;
            d["z"] = array_from_tensor(result.z);
            d["best_loss"] = result.best_loss;
            d["iterations_to_tol"] = result.iterations_to_tol;
            d["loss_history"] = result.loss_history;
            return d;
        },
        py::arg("model"), py::arg("x_star"), py::arg("max_iters") = 10000, py::arg("lr") = 1e-2,
        py::arg("tol") = 1e-3, py::arg("init") = "random", py::arg("seed") = 1);

    m.def("fit_pca", [](const py::array_t<double>& latents) {
        PcaProjection p = fit_pca(tensor_from_array(latents));
        py::dict d;
        d["mean"] = array_1d(p.mean);
        py::array_t<double> comps({py::ssize_t(2), py::ssize_t(p.mean.size())});
        for (int r = 0; r < 2; ++r)
            std::copy(p.components[r].begin(), p.components[r].end(),
                      comps.mutable_data() + r * p.mean.size());
        d["components"] = comps;
        d["explained_variance"] = array_1d(p.explained_variance);
        return d;
    });

    m.def("project", [](const py::dict& pca, const py::array_t<double>& latents) {
        PcaProjection p;
        auto mean = pca["mean"].cast<py::array_t<double>>();
        p.mean.assign(mean.data(), mean.data() + mean.size());
        auto comps = pca["components"].cast<py::array_t<double>>();
        p.components.assign(2, std::vector<double>(p.mean.size()));
        for (size_t r = 0; r < 2; ++r)
            std::copy(comps.data() + r * p.mean.size(), comps.data() + (r + 1) * p.mean.size(),
                      p.components[r].begin());
        auto ev = pca["explained_variance"].cast<py::array_t<double>>();
        p.explained_variance.assign(ev.data(), ev.data() + ev.size());
        return array_from_tensor(project(p, tensor_from_array(latents)));
    });

    m.def("variance_stats",
          [](const py::array_t<double>& latents) { return variance_stats(tensor_from_array(latents)); });

    m.def(
        "mode_coverage",
        [](const py::array_t<double>& samples, double grid_half_width, double sigma) {
            GaussianGrid grid = GaussianGrid::make(grid_half_width, sigma);
            ModeCoverageReport report = mode_coverage(tensor_from_array(samples), grid);
            py::dict d;
            d["modes_covered"] = report.modes_covered;
            d["hq_fraction"] = report.hq_fraction;
            d["per_mode_counts"] = report.per_mode_counts;
            return d;
        },
        py::arg("samples"), py::arg("grid_half_width") = 4.0, py::arg("sigma") = 0.05);

    m.def(
        "detect_k_drop",
        [](const std::vector<double>& k_series, double delta, int window) {
            py::list out;
            for (const auto& sig : detect_k_drop(k_series, delta, window)) {
                py::dict d;
                d["step"] = sig.step;
                d["k_before"] = sig.k_before;
                d["k_after"] = sig.k_after;
                out.append(d);
            }
            return out;
        },
        py::arg("k_series"), py::arg("delta") = 0.1, py::arg("window") = 200);

    m.def(
        "sample_real",
        [](int n, uint64_t seed, double grid_half_width, double sigma) {
            GaussianGrid grid = GaussianGrid::make(grid_half_width, sigma);
            RngEngine rng = make_stream(seed, "real");
            return array_from_tensor(sample_real(grid, n, rng));
        },
        py::arg("n"), py::arg("seed") = 1, py::arg("grid_half_width") = 4.0,
        py::arg("sigma") = 0.05);

    m.def(
        "sample_latent",
        [](int n, int dim, uint64_t seed, const std::string& distribution) {
            LatentSampler sampler{dim, latent_distribution_from_string(distribution)};
            RngEngine rng = make_stream(seed, "latent");
            return array_from_tensor(sample_latent(sampler, n, rng));
        },
        py::arg("n"), py::arg("dim") = 32, py::arg("seed") = 1,
        py::arg("distribution") = "uniform");

    m.def(
        "interpolate",
        [](const py::array_t<double>& z_a, const py::array_t<double>& z_b, int steps) {
            std::vector<py::array_t<double>> out;
            for (const auto& z : interpolate(tensor_from_array(z_a), tensor_from_array(z_b), steps))
                out.push_back(array_from_tensor(z));
            return out;
        },
        py::arg("z_a"), py::arg("z_b"), py::arg("steps"));

    m.def(
        "dimension_sweep",
        [](const py::array_t<double>& z, int dim, double lo, double hi, double step) {
            std::vector<py::array_t<double>> out;
            for (const auto& s : dimension_sweep(tensor_from_array(z), dim, lo, hi, step))
                out.push_back(array_from_tensor(s));
            return out;
        },
        py::arg("z"), py::arg("dim"), py::arg("lo") = -5.0, py::arg("hi") = 5.0,
        py::arg("step") = 1.0);

    m.def("update_k", [](double k, double lambda_gain, double gamma, double loss_real,
                         double loss_gen) {
        return update_k(EquilibriumState{k, lambda_gain, gamma}, loss_real, loss_gen).k;
    });

    m.def("convergence_measure", &convergence_measure);

    m.def("compare_runs", [](const std::string& dir_a, const std::string& dir_b) {
        return render_json(compare_runs(dir_a, dir_b));
    });

    m.attr("__version__") = "0.1.0";
}
