#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "common/errors.hpp"

namespace lvc {

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& s);

// Allocator that default-initializes trivial elements (no memset on
// resize); op outputs are always fully overwritten.
template <typename T>
struct NoInitAllocator : std::allocator<T> {
    using value_type = T;
    NoInitAllocator() = default;
    template <class U>
    NoInitAllocator(const NoInitAllocator<U>&) noexcept {}
    template <class U>
    struct rebind {
        using other = NoInitAllocator<U>;
    };
    template <class U>
    void construct(U* p) noexcept(std::is_nothrow_default_constructible_v<U>) {
        ::new (static_cast<void*>(p)) U;
    }
    template <class U, class A0, class... Args>
    void construct(U* p, A0&& a0, Args&&... args) {
        ::new (static_cast<void*>(p)) U(std::forward<A0>(a0), std::forward<Args>(args)...);
    }
};

template <typename T>
using Buffer = std::vector<T, NoInitAllocator<T>>;

// Thread-local switch: when disabled (sampling/inference), ops do not record
// backward closures.
bool grad_enabled();
struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    bool prev;
};

template <typename T>
struct TensorNode {
    Shape shape;
    Buffer<T> val;
    Buffer<T> grad;  // allocated lazily; same length as val when present
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode<T>>> parents;
    std::function<void(TensorNode<T>&)> backprop;

    void ensure_grad() {
        if (grad.size() != val.size()) grad.assign(val.size(), T(0));
    }
};

// Dense row-major tensor handle. Copies share the underlying node
// (cheap handle semantics); clone() makes an independent leaf.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, T value);
    static Tensor from_data(Shape shape, std::vector<T> data, bool requires_grad = false);
    static Tensor from_buffer(Shape shape, Buffer<T> data, bool requires_grad = false);
    static Tensor randn(Shape shape, std::mt19937_64& rng, double stddev = 1.0);

    bool defined() const { return static_cast<bool>(n_); }
    const Shape& shape() const { return n_->shape; }
    int rank() const { return static_cast<int>(n_->shape.size()); }
    int64_t dim(int i) const { return n_->shape[static_cast<size_t>(i)]; }
    int64_t numel() const { return static_cast<int64_t>(n_->val.size()); }

    std::span<const T> data() const { return {n_->val.data(), n_->val.size()}; }
    std::span<T> mutable_data() { return {n_->val.data(), n_->val.size()}; }
    T item() const;

    bool requires_grad() const { return n_->requires_grad; }
    Tensor& set_requires_grad(bool rg) {
        n_->requires_grad = rg;
        return *this;
    }
    std::span<const T> grad() const { return {n_->grad.data(), n_->grad.size()}; }
    void zero_grad() {
        if (!n_->grad.empty()) std::fill(n_->grad.begin(), n_->grad.end(), T(0));
    }

    // Runs reverse-mode accumulation from a scalar output.
    void backward();

    Tensor detach() const;  // shares nothing; copies values into a fresh leaf
    Tensor clone() const { return detach().set_requires_grad(n_->requires_grad); }

    TensorNode<T>* node() const { return n_.get(); }
    const std::shared_ptr<TensorNode<T>>& node_ptr() const { return n_; }

    static Tensor wrap(std::shared_ptr<TensorNode<T>> n) {
        Tensor t;
        t.n_ = std::move(n);
        return t;
    }

private:
    std::shared_ptr<TensorNode<T>> n_;
};

namespace detail {
template <typename T>
Tensor<T> make_result(Shape shape, Buffer<T> val, std::vector<Tensor<T>> parents,
                      std::function<void(TensorNode<T>&)> backprop);
}

// ---- elementwise ----
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T s);
template <typename T> Tensor<T> silu(const Tensor<T>& x);

// ---- matmul family (packed row-major) ----
// matmul:    [M,K]x[K,N] -> [M,N]      matmul_nt: [M,K]x[N,K] -> [M,N]
// bmm:       [B,M,K]x[B,K,N] -> [B,M,N]  bmm_nt: [B,M,K]x[B,N,K] -> [B,M,N]
template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> bmm(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> bmm_nt(const Tensor<T>& a, const Tensor<T>& b);

// linear: x[...,K] * W[O,K]^T + b[O] -> [...,O]
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

// ---- broadcast adds ----
// bias[D] added along the last axis of x[...,D]
template <typename T> Tensor<T> add_lastdim_bias(const Tensor<T>& x, const Tensor<T>& bias);
// bias[B,D] added to x[B,M,D], broadcast over M
template <typename T> Tensor<T> add_bias_bm(const Tensor<T>& x, const Tensor<T>& bias);
// bias[C] added to x[F,C,H,W], broadcast over F,H,W
template <typename T> Tensor<T> add_channel_bias(const Tensor<T>& x, const Tensor<T>& bias);

// ---- convolutions ----
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride,
                 int padding);
// x[B,C,N,H,W], w[O,C,kt] (temporal kernel only), zero padding keeps N
template <typename T>
Tensor<T> temporal_conv3d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

// ---- normalization / activation ----
template <typename T>
Tensor<T> group_norm(const Tensor<T>& x, int groups, const Tensor<T>& gamma,
                     const Tensor<T>& beta, T eps = T(1e-5));
template <typename T> Tensor<T> softmax_lastdim(const Tensor<T>& x);

// ---- shape ops ----
template <typename T> Tensor<T> concat(const std::vector<Tensor<T>>& xs, int axis);
template <typename T> Tensor<T> slice(const Tensor<T>& x, int axis, int64_t start, int64_t len);
template <typename T> Tensor<T> reshape(const Tensor<T>& x, Shape shape);
template <typename T> Tensor<T> permute(const Tensor<T>& x, const std::vector<int>& dims);
template <typename T> Tensor<T> upsample_nearest2x(const Tensor<T>& x);

// ---- reductions ----
template <typename T> Tensor<T> sum_all(const Tensor<T>& x);
template <typename T> Tensor<T> mean_all(const Tensor<T>& x);
template <typename T> Tensor<T> mse(const Tensor<T>& a, const Tensor<T>& b);

// ---- attention ----
// softmax(Q K^T / sqrt(d) + bias) V with max-subtracted softmax.
// Throws NumericError when any logit is non-finite.
template <typename T>
Tensor<T> sdp_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v);
template <typename T>
Tensor<T> sdp_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                        const Tensor<T>& logit_bias);

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace lvc
