#include "began/tensor.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "began/error.hpp"

namespace began {

struct Tensor::Impl {
    std::vector<int> shape;
    std::shared_ptr<std::vector<double>> values;  // shared so detach() can alias
    std::vector<double> grad;                     // empty until touched
    bool requires_grad = false;
    // index of the producing node on the active tape, -1 for leaves
    int node = -1;
};

namespace {

int64_t shape_size(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ArgumentError("tensor extents must be positive, got " + format_shape(shape));
        n *= d;
    }
    return n;
}

thread_local Tape* g_active_tape = nullptr;

}  // namespace

std::string format_shape(const std::vector<int>& shape) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << " x ";
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    auto impl = std::make_shared<Impl>();
    const int64_t n = shape_size(shape);
    impl->shape = std::move(shape);
    impl->values = std::make_shared<std::vector<double>>(n, 0.0);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::full(std::vector<int> shape, double value) {
    Tensor t = zeros(std::move(shape));
    for (auto& x : *t.impl_->values) x = value;
    return t;
}

Tensor Tensor::from_values(std::vector<int> shape, std::vector<double> values, bool requires_grad) {
    if (shape_size(shape) != static_cast<int64_t>(values.size()))
        throw DimensionError("value count " + std::to_string(values.size()) +
                             " does not fill shape " + format_shape(shape));
    auto impl = std::make_shared<Impl>();
    impl->shape = std::move(shape);
    impl->values = std::make_shared<std::vector<double>>(std::move(values));
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return from_values({1}, {value}); }

const std::vector<int>& Tensor::shape() const { return impl_->shape; }

int64_t Tensor::size() const { return static_cast<int64_t>(impl_->values->size()); }

double* Tensor::data() { return impl_->values->data(); }
const double* Tensor::data() const { return impl_->values->data(); }
const std::vector<double>& Tensor::values() const { return *impl_->values; }

double Tensor::item() const {
    if (size() != 1) throw DimensionError("item() requires a one-element tensor, got " + format_shape(shape()));
    return (*impl_->values)[0];
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }
void Tensor::set_requires_grad(bool flag) { impl_->requires_grad = flag; }

const std::vector<double>& Tensor::grad() const { return impl_->grad; }
bool Tensor::has_grad() const { return !impl_->grad.empty(); }

void Tensor::zero_grad() { impl_->grad.clear(); }

Tensor Tensor::detach() const {
    auto impl = std::make_shared<Impl>();
    impl->shape = impl_->shape;
    impl->values = impl_->values;  // alias, values are immutable post-op
    return Tensor(std::move(impl));
}

Tensor Tensor::clone() const {
    auto impl = std::make_shared<Impl>();
    impl->shape = impl_->shape;
    impl->values = std::make_shared<std::vector<double>>(*impl_->values);
    impl->requires_grad = impl_->requires_grad;
    return Tensor(std::move(impl));
}

// ---- tape ------------------------------------------------------------------

struct OpSupport {
    static Tensor::Impl& impl(const Tensor& t) { return *t.impl_; }

    // True when backward must propagate into t: either a requires_grad leaf
    // or an intermediate produced on the current tape.
    static bool needs_grad(const Tensor& t) {
        return t.impl_->requires_grad || t.impl_->node >= 0;
    }

    static std::vector<double>& grad_buffer(const Tensor& t) {
        auto& g = t.impl_->grad;
        if (g.empty()) g.assign(t.impl_->values->size(), 0.0);
        return g;
    }

    static void record(std::vector<Tensor> inputs, const Tensor& output,
                       std::function<void(const Tape::Node&)> backprop) {
        Tape* tape = g_active_tape;
        if (!tape) return;
        bool any = false;
        for (const auto& in : inputs) any = any || needs_grad(in);
        if (!any) return;
        output.impl_->node = static_cast<int>(tape->nodes_.size());
        tape->nodes_.push_back(Tape::Node{std::move(inputs), output, std::move(backprop)});
    }
};

Tape::Tape() {
    if (g_active_tape)
        throw Error("a tape is already active on this thread; tapes do not nest");
    g_active_tape = this;
}

Tape::~Tape() {
    // Outputs outliving the tape become ordinary leaves.
    for (auto& node : nodes_) OpSupport::impl(node.output).node = -1;
    g_active_tape = nullptr;
}

Tape* Tape::active() noexcept { return g_active_tape; }

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1)
        throw ArgumentError("backward requires a scalar loss, got " +
                            (loss.defined() ? format_shape(loss.shape()) : std::string("undefined")));
    // Reset transient (node-output) gradients; leaf gradients persist so that
    // repeated backward calls accumulate.
    for (auto& node : nodes_) OpSupport::impl(node.output).grad.clear();

    OpSupport::grad_buffer(loss)[0] += 1.0;

    const int loss_node = OpSupport::impl(loss).node;
    if (loss_node < 0) return;  // loss is itself a leaf

    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
        const Node& node = nodes_[i];
        if (!node.output.has_grad()) continue;  // nothing flowed into this node
        node.backprop(node);
    }
}

// ---- kernels ----------------------------------------------------------------

namespace kernels {

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
    constexpr int IB = 4;
    int i = 0;
    for (; i + IB <= m; i += IB) {
        double* c0 = c + (i + 0) * n;
        double* c1 = c + (i + 1) * n;
        double* c2 = c + (i + 2) * n;
        double* c3 = c + (i + 3) * n;
        for (int p = 0; p < k; ++p) {
            const double a0 = a[(i + 0) * k + p];
            const double a1 = a[(i + 1) * k + p];
            const double a2 = a[(i + 2) * k + p];
            const double a3 = a[(i + 3) * k + p];
            const double* bp = b + p * n;
            for (int j = 0; j < n; ++j) {
                c0[j] = std::fma(a0, bp[j], c0[j]);
                c1[j] = std::fma(a1, bp[j], c1[j]);
                c2[j] = std::fma(a2, bp[j], c2[j]);
                c3[j] = std::fma(a3, bp[j], c3[j]);
            }
        }
    }
    for (; i < m; ++i) {
        double* ci = c + i * n;
        for (int p = 0; p < k; ++p) {
            const double ai = a[i * k + p];
            const double* bp = b + p * n;
            for (int j = 0; j < n; ++j) ci[j] = std::fma(ai, bp[j], ci[j]);
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n) {
    // materialize B^T so the accumulation runs through the streaming kernel;
    // the dot-product form is latency-bound and several times slower
    std::vector<double> bt(static_cast<size_t>(k) * n);
    for (int j = 0; j < n; ++j)
        for (int p = 0; p < k; ++p) bt[static_cast<size_t>(p) * n + j] = b[static_cast<size_t>(j) * k + p];
    matmul_nn(a, bt.data(), c, m, k, n);
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n) {
    // streams rows of A [k x m] and B [k x n]
    for (int p = 0; p < k; ++p) {
        const double* ap = a + p * m;
        const double* bp = b + p * n;
        for (int i = 0; i < m; ++i) {
            const double ai = ap[i];
            double* ci = c + i * n;
            for (int j = 0; j < n; ++j) ci[j] = std::fma(ai, bp[j], ci[j]);
        }
    }
}

}  // namespace kernels

// ---- ops --------------------------------------------------------------------

namespace {

void accumulate(std::vector<double>& dst, const std::vector<double>& src) {
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0])
        throw DimensionError("matmul shapes do not chain: " + format_shape(sa) + " x " + format_shape(sb));
    const int m = sa[0], k = sa[1], n = sb[1];
    Tensor out = Tensor::zeros({m, n});
    kernels::matmul_nn(a.data(), b.data(), out.data(), m, k, n);

    OpSupport::record({a, b}, out, [m, k, n](const auto& node) {
        const Tensor& a = node.inputs[0];
        const Tensor& b = node.inputs[1];
        const std::vector<double>& go = node.output.grad();
        if (OpSupport::needs_grad(a)) {
            auto& ga = OpSupport::grad_buffer(a);
            kernels::matmul_nt(go.data(), b.data(), ga.data(), m, n, k);
        }
        if (OpSupport::needs_grad(b)) {
            auto& gb = OpSupport::grad_buffer(b);
            kernels::matmul_tn(a.data(), go.data(), gb.data(), k, m, n);
        }
    });
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    const bool same = sa == sb;
    const bool bias_broadcast = sa.size() == 2 && sb.size() == 1 && sa[1] == sb[0];
    if (!same && !bias_broadcast)
        throw DimensionError("add shapes incompatible: " + format_shape(sa) + " vs " + format_shape(sb));

    Tensor out = Tensor::zeros(sa);
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    if (same) {
        const int64_t n = a.size();
        for (int64_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
    } else {
        const int rows = sa[0], cols = sa[1];
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) po[r * cols + c] = pa[r * cols + c] + pb[c];
    }

    OpSupport::record({a, b}, out, [same](const auto& node) {
        const Tensor& a = node.inputs[0];
        const Tensor& b = node.inputs[1];
        const std::vector<double>& go = node.output.grad();
        if (OpSupport::needs_grad(a)) accumulate(OpSupport::grad_buffer(a), go);
        if (OpSupport::needs_grad(b)) {
            auto& gb = OpSupport::grad_buffer(b);
            if (same) {
                accumulate(gb, go);
            } else {
                const int rows = a.shape()[0], cols = a.shape()[1];
                for (int r = 0; r < rows; ++r)
                    for (int c = 0; c < cols; ++c) gb[c] += go[r * cols + c];
            }
        }
    });
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw DimensionError("sub shapes differ: " + format_shape(a.shape()) + " vs " + format_shape(b.shape()));
    Tensor out = Tensor::zeros(a.shape());
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const int64_t n = a.size();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];

    OpSupport::record({a, b}, out, [](const auto& node) {
        const std::vector<double>& go = node.output.grad();
        if (OpSupport::needs_grad(node.inputs[0])) accumulate(OpSupport::grad_buffer(node.inputs[0]), go);
        if (OpSupport::needs_grad(node.inputs[1])) {
            auto& gb = OpSupport::grad_buffer(node.inputs[1]);
            for (size_t i = 0; i < gb.size(); ++i) gb[i] -= go[i];
        }
    });
    return out;
}

Tensor relu(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape());
    const double* pa = a.data();
    double* po = out.data();
    const int64_t n = a.size();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] > 0.0 ? pa[i] : 0.0;

    OpSupport::record({a}, out, [](const auto& node) {
        const Tensor& a = node.inputs[0];
        if (!OpSupport::needs_grad(a)) return;
        const std::vector<double>& go = node.output.grad();
        auto& ga = OpSupport::grad_buffer(a);
        const double* pa = a.data();
        for (size_t i = 0; i < ga.size(); ++i)
            if (pa[i] > 0.0) ga[i] += go[i];
    });
    return out;
}

Tensor tanh_scaled(const Tensor& a, double s) {
    if (s <= 0.0) throw ArgumentError("tanh_scaled requires a positive bound");
    Tensor out = Tensor::zeros(a.shape());
    const double* pa = a.data();
    double* po = out.data();
    const int64_t n = a.size();
    for (int64_t i = 0; i < n; ++i) po[i] = s * std::tanh(pa[i] / s);

    OpSupport::record({a}, out, [s](const auto& node) {
        const Tensor& a = node.inputs[0];
        if (!OpSupport::needs_grad(a)) return;
        const std::vector<double>& go = node.output.grad();
        auto& ga = OpSupport::grad_buffer(a);
        const double* po = node.output.data();
        for (size_t i = 0; i < ga.size(); ++i) {
            const double y = po[i] / s;  // tanh(x/s)
            ga[i] += go[i] * (1.0 - y * y);
        }
    });
    return out;
}

Tensor scale(const Tensor& a, double c) {
    Tensor out = Tensor::zeros(a.shape());
    const double* pa = a.data();
    double* po = out.data();
    const int64_t n = a.size();
    for (int64_t i = 0; i < n; ++i) po[i] = c * pa[i];

    OpSupport::record({a}, out, [c](const auto& node) {
        if (!OpSupport::needs_grad(node.inputs[0])) return;
        const std::vector<double>& go = node.output.grad();
        auto& ga = OpSupport::grad_buffer(node.inputs[0]);
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += c * go[i];
    });
    return out;
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    const double* pa = a.data();
    const int64_t n = a.size();
    for (int64_t i = 0; i < n; ++i) acc += pa[i];
    Tensor out = Tensor::scalar(acc);

    OpSupport::record({a}, out, [](const auto& node) {
        if (!OpSupport::needs_grad(node.inputs[0])) return;
        const double g = node.output.grad()[0];
        auto& ga = OpSupport::grad_buffer(node.inputs[0]);
        for (auto& x : ga) x += g;
    });
    return out;
}

Tensor sample_norm_mean(const Tensor& a, NormKind kind) {
    const auto& s = a.shape();
    if (s.size() > 2)
        throw DimensionError("sample_norm_mean expects 1-D or 2-D input, got " + format_shape(s));
    const int rows = s.size() == 2 ? s[0] : 1;
    const int cols = s.size() == 2 ? s[1] : s[0];

    const double* pa = a.data();
    std::vector<double> per_sample(rows, 0.0);
    double mean = 0.0;
    for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        const double* row = pa + static_cast<int64_t>(r) * cols;
        if (kind == NormKind::L2) {
            for (int cidx = 0; cidx < cols; ++cidx) acc = std::fma(row[cidx], row[cidx], acc);
            acc = std::sqrt(acc);
        } else {
            for (int cidx = 0; cidx < cols; ++cidx) acc += std::abs(row[cidx]);
        }
        per_sample[r] = acc;
        mean += acc;
    }
    mean /= rows;
    Tensor out = Tensor::scalar(mean);

    OpSupport::record({a}, out, [rows, cols, kind, per_sample = std::move(per_sample)](const auto& node) {
        const Tensor& a = node.inputs[0];
        if (!OpSupport::needs_grad(a)) return;
        const double g = node.output.grad()[0] / rows;
        auto& ga = OpSupport::grad_buffer(a);
        const double* pa = a.data();
        for (int r = 0; r < rows; ++r) {
            const int64_t base = static_cast<int64_t>(r) * cols;
            if (kind == NormKind::L2) {
                const double nrm = per_sample[r];
                if (nrm == 0.0) continue;  // subgradient 0 at the kink
                for (int cidx = 0; cidx < cols; ++cidx)
                    ga[base + cidx] += g * pa[base + cidx] / nrm;
            } else {
                for (int cidx = 0; cidx < cols; ++cidx) {
                    const double x = pa[base + cidx];
                    if (x > 0.0)
                        ga[base + cidx] += g;
                    else if (x < 0.0)
                        ga[base + cidx] -= g;
                }
            }
        }
    });
    return out;
}

}  // namespace began
