#include "began/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "began/error.hpp"

namespace began {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const double out = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
}

int64_t parse_int(const std::string& key, const std::string& value) {
    int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
    return out;
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

ExperimentSpec parse_config_text(const std::string& text) {
    ExperimentSpec spec;
    bool saw_version = false;

    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> schema = {
        {"schema_version",
         [&](const std::string& k, const std::string& v) {
             if (parse_int(k, v) != kConfigSchemaVersion)
                 throw ConfigError("unsupported schema_version " + v);
             saw_version = true;
         }},
        {"label", [&](const std::string&, const std::string& v) { spec.label = v; }},
        {"out_dir", [&](const std::string&, const std::string& v) { spec.out_dir = v; }},
        {"variant",
         [&](const std::string&, const std::string& v) { spec.train.variant = variant_from_string(v); }},
        {"alpha", [&](const std::string& k, const std::string& v) { spec.train.alpha = parse_double(k, v); }},
        {"gamma", [&](const std::string& k, const std::string& v) { spec.train.gamma = parse_double(k, v); }},
        {"lambda", [&](const std::string& k, const std::string& v) { spec.train.lambda = parse_double(k, v); }},
        {"lr_g", [&](const std::string& k, const std::string& v) { spec.train.lr_g = parse_double(k, v); }},
        {"lr_d", [&](const std::string& k, const std::string& v) { spec.train.lr_d = parse_double(k, v); }},
        {"beta1", [&](const std::string& k, const std::string& v) { spec.train.beta1 = parse_double(k, v); }},
        {"beta2", [&](const std::string& k, const std::string& v) { spec.train.beta2 = parse_double(k, v); }},
        {"adam_eps",
         [&](const std::string& k, const std::string& v) { spec.train.adam_eps = parse_double(k, v); }},
        {"latent_dim",
         [&](const std::string& k, const std::string& v) {
             spec.train.latent_dim = static_cast<int>(parse_int(k, v));
         }},
        {"hidden_dim",
         [&](const std::string& k, const std::string& v) {
             spec.train.hidden_dim = static_cast<int>(parse_int(k, v));
         }},
        {"batch_size",
         [&](const std::string& k, const std::string& v) {
             spec.train.batch_size = static_cast<int>(parse_int(k, v));
         }},
        {"steps", [&](const std::string& k, const std::string& v) { spec.train.steps = parse_int(k, v); }},
        {"seed",
         [&](const std::string& k, const std::string& v) {
             spec.train.seed = static_cast<uint64_t>(parse_int(k, v));
         }},
        {"output_bound",
         [&](const std::string& k, const std::string& v) {
             spec.train.output_bound = parse_double(k, v);
         }},
        {"loss_norm",
         [&](const std::string&, const std::string& v) {
             if (v == "l2")
                 spec.train.norm = NormKind::L2;
             else if (v == "l1")
                 spec.train.norm = NormKind::L1;
             else
                 throw ConfigError("loss_norm must be l1 or l2, got '" + v + "'");
         }},
        {"latent_distribution",
         [&](const std::string&, const std::string& v) {
             spec.latent_distribution = latent_distribution_from_string(v);
         }},
        {"grid_half_width",
         [&](const std::string& k, const std::string& v) { spec.grid_half_width = parse_double(k, v); }},
        {"data_sigma",
         [&](const std::string& k, const std::string& v) { spec.data_sigma = parse_double(k, v); }},
        {"snapshot_cadence",
         [&](const std::string& k, const std::string& v) {
             spec.snapshot_cadence = static_cast<int>(parse_int(k, v));
         }},
        {"plot_cadence",
         [&](const std::string& k, const std::string& v) {
             spec.plot_cadence = static_cast<int>(parse_int(k, v));
         }},
        {"coverage_samples",
         [&](const std::string& k, const std::string& v) {
             spec.coverage_samples = static_cast<int>(parse_int(k, v));
         }},
        {"kdrop_delta",
         [&](const std::string& k, const std::string& v) { spec.kdrop_delta = parse_double(k, v); }},
        {"kdrop_window",
         [&](const std::string& k, const std::string& v) {
             spec.kdrop_window = static_cast<int>(parse_int(k, v));
         }},
    };

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = schema.find(key);
        if (it == schema.end())
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        it->second(key, value);
    }
    if (!saw_version) throw ConfigError("config is missing schema_version");
    validate_spec(spec);
    return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string render_config(const ExperimentSpec& spec) {
    std::ostringstream os;
    os << "schema_version = " << kConfigSchemaVersion << "\n";
    os << "label = " << spec.label << "\n";
    os << "out_dir = " << spec.out_dir << "\n";
    os << "variant = " << to_string(spec.train.variant) << "\n";
    os << "alpha = " << format_double(spec.train.alpha) << "\n";
    os << "gamma = " << format_double(spec.train.gamma) << "\n";
    os << "lambda = " << format_double(spec.train.lambda) << "\n";
    os << "lr_g = " << format_double(spec.train.lr_g) << "\n";
    os << "lr_d = " << format_double(spec.train.lr_d) << "\n";
    os << "beta1 = " << format_double(spec.train.beta1) << "\n";
    os << "beta2 = " << format_double(spec.train.beta2) << "\n";
    os << "adam_eps = " << format_double(spec.train.adam_eps) << "\n";
    os << "latent_dim = " << spec.train.latent_dim << "\n";
    os << "hidden_dim = " << spec.train.hidden_dim << "\n";
    os << "batch_size = " << spec.train.batch_size << "\n";
    os << "steps = " << spec.train.steps << "\n";
    os << "seed = " << spec.train.seed << "\n";
    os << "output_bound = " << format_double(spec.train.output_bound) << "\n";
    os << "loss_norm = " << (spec.train.norm == NormKind::L2 ? "l2" : "l1") << "\n";
    os << "latent_distribution = " << to_string(spec.latent_distribution) << "\n";
    os << "grid_half_width = " << format_double(spec.grid_half_width) << "\n";
    os << "data_sigma = " << format_double(spec.data_sigma) << "\n";
    os << "snapshot_cadence = " << spec.snapshot_cadence << "\n";
    os << "plot_cadence = " << spec.plot_cadence << "\n";
    os << "coverage_samples = " << spec.coverage_samples << "\n";
    os << "kdrop_delta = " << format_double(spec.kdrop_delta) << "\n";
    os << "kdrop_window = " << spec.kdrop_window << "\n";
    return os.str();
}

void validate_spec(const ExperimentSpec& spec) {
    const TrainConfig& t = spec.train;
    if (t.alpha < 0.0) throw ConfigError("alpha must be >= 0");
    if (t.lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (t.lr_g < 0.0 || t.lr_d < 0.0) throw ConfigError("learning rates must be >= 0");
    if (t.beta1 <= 0.0 || t.beta1 >= 1.0 || t.beta2 <= 0.0 || t.beta2 >= 1.0)
        throw ConfigError("adam betas must lie in (0, 1)");
    if (t.latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
    if (t.hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
    if (t.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (t.output_bound < 0.0) throw ConfigError("output_bound must be >= 0");
    if (t.steps < 0) throw ConfigError("steps must be >= 0");
    if (spec.data_sigma < 0.0) throw ConfigError("data_sigma must be >= 0");
    if (spec.grid_half_width <= 0.0) throw ConfigError("grid_half_width must be > 0");
    if (spec.snapshot_cadence < 1) throw ConfigError("snapshot_cadence must be >= 1");
    if (spec.plot_cadence < 1) throw ConfigError("plot_cadence must be >= 1");
    if (spec.coverage_samples < 1) throw ConfigError("coverage_samples must be >= 1");
    if (spec.kdrop_delta <= 0.0) throw ConfigError("kdrop_delta must be > 0");
    if (spec.kdrop_window < 1) throw ConfigError("kdrop_window must be >= 1");
}

bool same_dataset_params(const ExperimentSpec& a, const ExperimentSpec& b) {
    return a.grid_half_width == b.grid_half_width && a.data_sigma == b.data_sigma &&
           a.latent_distribution == b.latent_distribution &&
           a.train.latent_dim == b.train.latent_dim;
}

}  // namespace began
