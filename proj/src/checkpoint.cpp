#include "began/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "began/error.hpp"

namespace began {

namespace {

constexpr char kMagic[4] = {'B', 'G', 'L', 'B'};
constexpr uint32_t kVersion = 1;

// little-endian fixed-width IO; doubles copied bit-for-bit
struct Writer {
    std::ofstream out;

    explicit Writer(const std::string& path) : out(path, std::ios::binary) {
        if (!out) throw Error("cannot write checkpoint: " + path);
    }
    void bytes(const void* p, size_t n) { out.write(static_cast<const char*>(p), n); }
    void u32(uint32_t v) { bytes(&v, 4); }
    void i64(int64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void f64s(const std::vector<double>& v) {
        i64(static_cast<int64_t>(v.size()));
        bytes(v.data(), v.size() * 8);
    }
    void str(const std::string& s) {
        i64(static_cast<int64_t>(s.size()));
        bytes(s.data(), s.size());
    }
};

struct Reader {
    std::ifstream in;

    explicit Reader(const std::string& path) : in(path, std::ios::binary) {
        if (!in) throw Error("cannot open checkpoint: " + path);
    }
    void bytes(void* p, size_t n) {
        in.read(static_cast<char*>(p), n);
        if (!in) throw Error("checkpoint truncated");
    }
    uint32_t u32() {
        uint32_t v;
        bytes(&v, 4);
        return v;
    }
    int64_t i64() {
        int64_t v;
        bytes(&v, 8);
        return v;
    }
    double f64() {
        double v;
        bytes(&v, 8);
        return v;
    }
    std::vector<double> f64s() {
        const int64_t n = i64();
        if (n < 0) throw Error("checkpoint corrupt: negative array length");
        std::vector<double> v(static_cast<size_t>(n));
        bytes(v.data(), v.size() * 8);
        return v;
    }
    std::string str() {
        const int64_t n = i64();
        if (n < 0) throw Error("checkpoint corrupt: negative string length");
        std::string s(static_cast<size_t>(n), '\0');
        bytes(s.data(), s.size());
        return s;
    }
};

void write_mlp(Writer& w, const Mlp& net) {
    w.u32(static_cast<uint32_t>(net.layers.size()));
    w.f64(net.output_bound);
    for (const auto& layer : net.layers) {
        w.u32(static_cast<uint32_t>(layer.input_width()));
        w.u32(static_cast<uint32_t>(layer.output_width()));
        w.u32(layer.activation == Activation::Relu ? 1u : 0u);
        w.f64s(layer.weight.values());
        w.f64s(layer.bias.values());
    }
}

Mlp read_mlp(Reader& r) {
    Mlp net;
    const uint32_t n_layers = r.u32();
    for (uint32_t i = 0; i < n_layers; ++i) {
        const int n_in = static_cast<int>(r.u32());
        const int n_out = static_cast<int>(r.u32());
        const Activation act = r.u32() == 1u ? Activation::Relu : Activation::None;
        std::vector<double> w = r.f64s();
        std::vector<double> b = r.f64s();
        DenseLayer layer;
        layer.weight = Tensor::from_values({n_in, n_out}, std::move(w), /*requires_grad=*/true);
        layer.bias = Tensor::from_values({n_out}, std::move(b), /*requires_grad=*/true);
        layer.activation = act;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

void write_moments(Writer& w, const std::vector<std::vector<double>>& m) {
    w.u32(static_cast<uint32_t>(m.size()));
    for (const auto& arr : m) w.f64s(arr);
}

std::vector<std::vector<double>> read_moments(Reader& r) {
    std::vector<std::vector<double>> out(r.u32());
    for (auto& arr : out) arr = r.f64s();
    return out;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& c) {
    Writer w(path);
    w.bytes(kMagic, 4);
    w.u32(kVersion);
    w.str(render_config(c.spec));
    w.i64(c.step);
    w.f64(c.eq.k);
    w.f64(c.eq.lambda);
    w.f64(c.eq.gamma);
    write_mlp(w, c.gen.net);
    write_mlp(w, c.disc.enc);
    write_mlp(w, c.disc.dec);
    w.i64(c.adam_g_steps);
    write_moments(w, c.adam_g_m);
    write_moments(w, c.adam_g_v);
    w.i64(c.adam_d_steps);
    write_moments(w, c.adam_d_m);
    write_moments(w, c.adam_d_v);
    w.str(c.rng_real);
    w.str(c.rng_latent);
    w.str(to_csv_row(c.last_record));
    if (!w.out) throw Error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw Error("not a checkpoint file: " + path);
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw Error("unsupported checkpoint version " + std::to_string(version));

    Checkpoint c;
    c.spec = parse_config_text(r.str());
    c.step = r.i64();
    c.eq.k = r.f64();
    c.eq.lambda = r.f64();
    c.eq.gamma = r.f64();
    c.gen.net = read_mlp(r);
    c.disc.enc = read_mlp(r);
    c.disc.dec = read_mlp(r);
    c.adam_g_steps = r.i64();
    c.adam_g_m = read_moments(r);
    c.adam_g_v = read_moments(r);
    c.adam_d_steps = r.i64();
    c.adam_d_m = read_moments(r);
    c.adam_d_v = read_moments(r);
    c.rng_real = r.str();
    c.rng_latent = r.str();
    std::string row = r.str();
    if (!row.empty() && row.back() == '\n') row.pop_back();
    c.last_record = metrics_from_csv_row(row);
    return c;
}

}  // namespace began
