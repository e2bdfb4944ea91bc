#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace began {

enum class NormKind { L2, L1 };

/// Dense row-major tensor of doubles with optional gradient accumulation.
///
/// Tensor is a shared handle: copies alias the same storage, which is what
/// the tape needs to route gradients back to leaves. Use clone() for a deep
/// copy. Forward values are treated as immutable once an op has produced
/// them; only leaf parameters are updated in place (between tapes).
class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor full(std::vector<int> shape, double value);
    static Tensor from_values(std::vector<int> shape, std::vector<double> values,
                              bool requires_grad = false);
    static Tensor scalar(double value);

    bool defined() const { return impl_ != nullptr; }
    const std::vector<int>& shape() const;
    int64_t size() const;

    double* data();
    const double* data() const;
    const std::vector<double>& values() const;

    /// Value of a one-element tensor.
    double item() const;

    bool requires_grad() const;
    void set_requires_grad(bool flag);

    /// Gradient buffer; empty until backward touches this tensor.
    const std::vector<double>& grad() const;
    bool has_grad() const;
    void zero_grad();

    /// Leaf view sharing this tensor's storage, cut off from the tape.
    Tensor detach() const;
    Tensor clone() const;

    bool same_impl(const Tensor& other) const { return impl_ == other.impl_; }

  private:
    struct Impl;
    std::shared_ptr<Impl> impl_;

    explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

    friend class Tape;
    friend struct OpSupport;
};

/// Per-step record of executed operations. Exactly one tape may be active on
/// a thread; ops record onto it while it lives. Build, call backward, drop.
class Tape {
  public:
    struct Node {
        std::vector<Tensor> inputs;
        Tensor output;
        std::function<void(const Node&)> backprop;
    };

    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active() noexcept;

    /// Reverse pass from a scalar loss. Every recorded node is visited
    /// exactly once, in reverse execution order. Gradients of requires_grad
    /// leaves accumulate additively across calls until zeroed.
    void backward(const Tensor& loss);

    size_t node_count() const { return nodes_.size(); }

  private:
    std::vector<Node> nodes_;

    friend struct OpSupport;
};

std::string format_shape(const std::vector<int>& shape);

// ---- differentiable operations -------------------------------------------

/// [m x k] * [k x n] -> [m x n].
Tensor matmul(const Tensor& a, const Tensor& b);

/// Elementwise sum of equal shapes, or row-broadcast of a width-n vector
/// over an [m x n] batch (the bias case).
Tensor add(const Tensor& a, const Tensor& b);

Tensor sub(const Tensor& a, const Tensor& b);

Tensor relu(const Tensor& a);

/// Soft clip: s * tanh(a / s). Near-identity for |a| << s, bounded by +-s.
Tensor tanh_scaled(const Tensor& a, double s);

/// constant * a, elementwise.
Tensor scale(const Tensor& a, double c);

/// Sum of all entries -> scalar.
Tensor sum(const Tensor& a);

/// Batch-mean per-sample norm -> scalar. A 2-D input is one sample per row;
/// a 1-D input is a single sample. The L2 gradient at an exactly-zero sample
/// is defined as zero.
Tensor sample_norm_mean(const Tensor& a, NormKind kind);

inline Tensor l2_norm(const Tensor& a) { return sample_norm_mean(a, NormKind::L2); }

// ---- raw kernels (forward-only, no tape) ----------------------------------
namespace kernels {

// C += A * B with per-element ascending-k fma accumulation; bit-identical to
// the scalar triple loop for any blocking of i and j.
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);
// C += A * B^T   (A [m x k], B [n x k])
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n);
// C += A^T * B   (A [k x m], B [k x n])
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n);

}  // namespace kernels

}  // namespace began
