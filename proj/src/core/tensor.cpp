#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_set>

#include "common/parallel.hpp"
#include "common/rng.hpp"
#include "kernels/kernels.hpp"
#include "kernels/ref_kernels.hpp"

namespace lvc {

int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev; }

// Kernel shims: float routes through the dispatch table, double through the
// scalar reference templates.
namespace {

inline void k_add(const float* a, const float* b, float* y, int64_t n) { kernels::active().add(a, b, y, n); }
inline void k_add(const double* a, const double* b, double* y, int64_t n) { kernels::ref::add(a, b, y, n); }
inline void k_sub(const float* a, const float* b, float* y, int64_t n) { kernels::active().sub(a, b, y, n); }
inline void k_sub(const double* a, const double* b, double* y, int64_t n) { kernels::ref::sub(a, b, y, n); }
inline void k_mul(const float* a, const float* b, float* y, int64_t n) { kernels::active().mul(a, b, y, n); }
inline void k_mul(const double* a, const double* b, double* y, int64_t n) { kernels::ref::mul(a, b, y, n); }
inline void k_scale(const float* a, float s, float* y, int64_t n) { kernels::active().scale(a, s, y, n); }
inline void k_scale(const double* a, double s, double* y, int64_t n) { kernels::ref::scale(a, s, y, n); }
inline void k_axpy(float a, const float* x, float* y, int64_t n) { kernels::active().axpy(a, x, y, n); }
inline void k_axpy(double a, const double* x, double* y, int64_t n) { kernels::ref::axpy(a, x, y, n); }
inline float k_dot(const float* a, const float* b, int64_t n) { return kernels::active().dot(a, b, n); }
inline double k_dot(const double* a, const double* b, int64_t n) { return kernels::ref::dot(a, b, n); }
inline float k_sum(const float* a, int64_t n) { return kernels::active().sum(a, n); }
inline double k_sum(const double* a, int64_t n) { return kernels::ref::sum(a, n); }
inline float k_max(const float* a, int64_t n) { return kernels::active().max(a, n); }
inline double k_max(const double* a, int64_t n) { return kernels::ref::max(a, n); }
inline void k_silu(const float* x, float* y, int64_t n) { kernels::active().silu(x, y, n); }
inline void k_silu(const double* x, double* y, int64_t n) { kernels::ref::silu(x, y, n); }
inline void k_silu_bwd(const float* x, const float* dy, float* dx, int64_t n) { kernels::active().silu_bwd(x, dy, dx, n); }
inline void k_silu_bwd(const double* x, const double* dy, double* dx, int64_t n) { kernels::ref::silu_bwd(x, dy, dx, n); }
inline void k_vexp(const float* x, float* y, int64_t n) { kernels::active().vexp(x, y, n); }
inline void k_vexp(const double* x, double* y, int64_t n) { kernels::ref::vexp(x, y, n); }

inline void k_gemm_nn(int64_t M, int64_t N, int64_t K, const float* A, const float* B, float* C, bool acc) { kernels::active().gemm_nn(M, N, K, A, B, C, acc); }
inline void k_gemm_nn(int64_t M, int64_t N, int64_t K, const double* A, const double* B, double* C, bool acc) { kernels::ref::gemm_nn(M, N, K, A, B, C, acc); }
inline void k_gemm_nt(int64_t M, int64_t N, int64_t K, const float* A, const float* B, float* C, bool acc) { kernels::active().gemm_nt(M, N, K, A, B, C, acc); }
inline void k_gemm_nt(int64_t M, int64_t N, int64_t K, const double* A, const double* B, double* C, bool acc) { kernels::ref::gemm_nt(M, N, K, A, B, C, acc); }
inline void k_gemm_tn(int64_t M, int64_t N, int64_t K, const float* A, int64_t lda, const float* B, float* C, bool acc) { kernels::active().gemm_tn(M, N, K, A, lda, B, C, acc); }
inline void k_gemm_tn(int64_t M, int64_t N, int64_t K, const double* A, int64_t lda, const double* B, double* C, bool acc) { kernels::ref::gemm_tn(M, N, K, A, lda, B, C, acc); }

template <typename T>
T* grad_dst(TensorNode<T>* p) {
    if (!p->requires_grad) return nullptr;
    p->ensure_grad();
    return p->grad.data();
}

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

}  // namespace

namespace detail {
template <typename T>
Tensor<T> make_result(Shape shape, Buffer<T> val, std::vector<Tensor<T>> parents,
                      std::function<void(TensorNode<T>&)> backprop) {
    auto n = std::make_shared<TensorNode<T>>();
    n->shape = std::move(shape);
    n->val = std::move(val);
    bool rg = false;
    if (grad_enabled())
        for (auto& p : parents) rg = rg || p.requires_grad();
    if (rg) {
        n->requires_grad = true;
        n->parents.reserve(parents.size());
        for (auto& p : parents) n->parents.push_back(p.node_ptr());
        n->backprop = std::move(backprop);
    }
    return Tensor<T>::wrap(std::move(n));
}
}  // namespace detail

using detail::make_result;

// ---------------------------------------------------------------- Tensor

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
    auto n = std::make_shared<TensorNode<T>>();
    int64_t count = shape_numel(shape);
    n->shape = std::move(shape);
    n->val.assign(static_cast<size_t>(count), T(0));
    n->requires_grad = requires_grad;
    return wrap(std::move(n));
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value) {
    Tensor t = zeros(std::move(shape));
    std::fill(t.n_->val.begin(), t.n_->val.end(), value);
    return t;
}

template <typename T>
Tensor<T> Tensor<T>::from_data(Shape shape, std::vector<T> data, bool requires_grad) {
    Buffer<T> buf(data.begin(), data.end());
    return from_buffer(std::move(shape), std::move(buf), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from_buffer(Shape shape, Buffer<T> data, bool requires_grad) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size()))
        throw ShapeError("from_data: " + shape_str(shape) + " does not hold " +
                         std::to_string(data.size()) + " values");
    auto n = std::make_shared<TensorNode<T>>();
    n->shape = std::move(shape);
    n->val = std::move(data);
    n->requires_grad = requires_grad;
    return wrap(std::move(n));
}

template <typename T>
Tensor<T> Tensor<T>::randn(Shape shape, std::mt19937_64& rng, double stddev) {
    Tensor t = zeros(std::move(shape));
    fill_randn<T>(t.mutable_data(), rng, stddev);
    return t;
}

template <typename T>
T Tensor<T>::item() const {
    if (numel() != 1) throw ShapeError("item(): tensor has " + std::to_string(numel()) + " values");
    return n_->val[0];
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
    auto n = std::make_shared<TensorNode<T>>();
    n->shape = n_->shape;
    n->val = n_->val;
    return wrap(std::move(n));
}

template <typename T>
void Tensor<T>::backward() {
    if (numel() != 1) throw ShapeError("backward() requires a scalar output");
    if (!n_->requires_grad) return;

    // Post-order DFS; reversed order visits consumers before producers.
    std::vector<TensorNode<T>*> order;
    std::unordered_set<TensorNode<T>*> seen;
    struct Frame {
        TensorNode<T>* n;
        size_t next;
    };
    std::vector<Frame> stack{{n_.get(), 0}};
    seen.insert(n_.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.n->parents.size()) {
            TensorNode<T>* p = f.n->parents[f.next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.n);
            stack.pop_back();
        }
    }

    n_->ensure_grad();
    n_->grad[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorNode<T>* n = *it;
        if (n->backprop && !n->grad.empty()) n->backprop(*n);
    }
}

// ---------------------------------------------------------------- elementwise

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape(a, b, "add");
    Buffer<T> out(a.numel());
    k_add(a.data().data(), b.data().data(), out.data(), a.numel());
    return make_result<T>(
        a.shape(), std::move(out), {a, b}, [a, b](TensorNode<T>& o) {
            if (T* g = grad_dst(a.node())) k_add(g, o.grad.data(), g, o.grad.size());
            if (T* g = grad_dst(b.node())) k_add(g, o.grad.data(), g, o.grad.size());
        });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape(a, b, "sub");
    Buffer<T> out(a.numel());
    k_sub(a.data().data(), b.data().data(), out.data(), a.numel());
    return make_result<T>(
        a.shape(), std::move(out), {a, b}, [a, b](TensorNode<T>& o) {
            if (T* g = grad_dst(a.node())) k_add(g, o.grad.data(), g, o.grad.size());
            if (T* g = grad_dst(b.node())) k_axpy(T(-1), o.grad.data(), g, o.grad.size());
        });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape(a, b, "mul");
    Buffer<T> out(a.numel());
    k_mul(a.data().data(), b.data().data(), out.data(), a.numel());
    return make_result<T>(
        a.shape(), std::move(out), {a, b}, [a, b](TensorNode<T>& o) {
            int64_t n = static_cast<int64_t>(o.grad.size());
            if (T* g = grad_dst(a.node())) {
                const T* bv = b.data().data();
                const T* og = o.grad.data();
                for (int64_t i = 0; i < n; ++i) g[i] += og[i] * bv[i];
            }
            if (T* g = grad_dst(b.node())) {
                const T* av = a.data().data();
                const T* og = o.grad.data();
                for (int64_t i = 0; i < n; ++i) g[i] += og[i] * av[i];
            }
        });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
    Buffer<T> out(a.numel());
    k_scale(a.data().data(), s, out.data(), a.numel());
    return make_result<T>(a.shape(), std::move(out), {a}, [a, s](TensorNode<T>& o) {
        if (T* g = grad_dst(a.node())) k_axpy(s, o.grad.data(), g, o.grad.size());
    });
}

template <typename T>
Tensor<T> silu(const Tensor<T>& x) {
    Buffer<T> out(x.numel());
    k_silu(x.data().data(), out.data(), x.numel());
    return make_result<T>(x.shape(), std::move(out), {x}, [x](TensorNode<T>& o) {
        if (T* g = grad_dst(x.node()))
            k_silu_bwd(x.data().data(), o.grad.data(), g, o.grad.size());
    });
}

// ---------------------------------------------------------------- matmul

namespace {
template <typename T>
void check_mm(const Tensor<T>& a, const Tensor<T>& b, int rank, const char* op) {
    if (a.rank() != rank || b.rank() != rank)
        throw ShapeError(std::string(op) + ": expected rank-" + std::to_string(rank) +
                         " operands, got " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
}
}  // namespace

namespace {
// Distributes independent per-batch GEMMs across the pool; each batch writes
// a disjoint output slice, so partitioning cannot change results.
template <typename F>
void batch_parallel(int64_t B, int64_t work_per_batch, F f) {
    if (B > 1 && B * work_per_batch > 16384) {
        parallel_for(B, [&](int64_t b0, int64_t b1) {
            for (int64_t i = b0; i < b1; ++i) f(i);
        });
    } else {
        for (int64_t i = 0; i < B; ++i) f(i);
    }
}
}  // namespace

template <typename T>
Tensor<T> bmm(const Tensor<T>& a, const Tensor<T>& b) {
    check_mm(a, b, 3, "bmm");
    int64_t B = a.dim(0), M = a.dim(1), K = a.dim(2);
    if (b.dim(0) != B || b.dim(1) != K)
        throw ShapeError("bmm: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    int64_t N = b.dim(2);
    Buffer<T> out(static_cast<size_t>(B * M * N));
    if (B == 1) {
        kernels::pgemm_nn(M, N, K, a.data().data(), b.data().data(), out.data(), false);
    } else {
        batch_parallel(B, M * N * K, [&](int64_t i) {
            k_gemm_nn(M, N, K, a.data().data() + i * M * K, b.data().data() + i * K * N,
                      out.data() + i * M * N, false);
        });
    }
    return make_result<T>(
        {B, M, N}, std::move(out), {a, b}, [a, b, B, M, N, K](TensorNode<T>& o) {
            const T* dc = o.grad.data();
            if (T* ga = grad_dst(a.node()))
                batch_parallel(B, M * N * K, [&](int64_t i) {
                    k_gemm_nt(M, K, N, dc + i * M * N, b.data().data() + i * K * N,
                              ga + i * M * K, true);
                });
            if (T* gb = grad_dst(b.node()))
                batch_parallel(B, M * N * K, [&](int64_t i) {
                    k_gemm_tn(K, N, M, a.data().data() + i * M * K, K, dc + i * M * N,
                              gb + i * K * N, true);
                });
        });
}

template <typename T>
Tensor<T> bmm_nt(const Tensor<T>& a, const Tensor<T>& b) {
    check_mm(a, b, 3, "bmm_nt");
    int64_t B = a.dim(0), M = a.dim(1), K = a.dim(2);
    if (b.dim(0) != B || b.dim(2) != K)
        throw ShapeError("bmm_nt: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    int64_t N = b.dim(1);
    Buffer<T> out(static_cast<size_t>(B * M * N));
    // Short inner dims (attention head width) run much faster in broadcast
    // form on a transposed copy than as per-element dots.
    const bool transpose_route = K < 32 && N >= 16;
    batch_parallel(B, M * N * K, [&](int64_t i) {
        const T* ai = a.data().data() + i * M * K;
        const T* bi = b.data().data() + i * N * K;
        T* oi = out.data() + i * M * N;
        if (transpose_route) {
            std::vector<T> bt(static_cast<size_t>(K * N));
            for (int64_t n = 0; n < N; ++n)
                for (int64_t k = 0; k < K; ++k) bt[k * N + n] = bi[n * K + k];
            k_gemm_nn(M, N, K, ai, bt.data(), oi, false);
        } else {
            k_gemm_nt(M, N, K, ai, bi, oi, false);
        }
    });
    return make_result<T>(
        {B, M, N}, std::move(out), {a, b}, [a, b, B, M, N, K](TensorNode<T>& o) {
            const T* dc = o.grad.data();
            if (T* ga = grad_dst(a.node()))
                batch_parallel(B, M * N * K, [&](int64_t i) {
                    k_gemm_nn(M, K, N, dc + i * M * N, b.data().data() + i * N * K,
                              ga + i * M * K, true);
                });
            if (T* gb = grad_dst(b.node()))
                batch_parallel(B, M * N * K, [&](int64_t i) {
                    k_gemm_tn(N, K, M, dc + i * M * N, N, a.data().data() + i * M * K,
                              gb + i * N * K, true);
                });
        });
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    check_mm(a, b, 2, "matmul");
    Tensor<T> a3 = reshape(a, {1, a.dim(0), a.dim(1)});
    Tensor<T> b3 = reshape(b, {1, b.dim(0), b.dim(1)});
    Tensor<T> c = bmm(a3, b3);
    return reshape(c, {c.dim(1), c.dim(2)});
}

template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
    check_mm(a, b, 2, "matmul_nt");
    Tensor<T> a3 = reshape(a, {1, a.dim(0), a.dim(1)});
    Tensor<T> b3 = reshape(b, {1, b.dim(0), b.dim(1)});
    Tensor<T> c = bmm_nt(a3, b3);
    return reshape(c, {c.dim(1), c.dim(2)});
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
    if (x.rank() < 1 || w.rank() != 2 || b.rank() != 1)
        throw ShapeError("linear: x" + shape_str(x.shape()) + " w" + shape_str(w.shape()) +
                         " b" + shape_str(b.shape()));
    int64_t K = x.dim(x.rank() - 1);
    if (w.dim(1) != K || b.dim(0) != w.dim(0))
        throw ShapeError("linear: inner dim " + std::to_string(K) + " vs w" +
                         shape_str(w.shape()));
    Shape out_shape = x.shape();
    out_shape.back() = w.dim(0);
    int64_t M = x.numel() / K;
    Tensor<T> y = matmul_nt(reshape(x, {M, K}), w);
    y = add_lastdim_bias(y, b);
    return reshape(y, out_shape);
}

// ---------------------------------------------------------------- broadcast adds

template <typename T>
Tensor<T> add_lastdim_bias(const Tensor<T>& x, const Tensor<T>& bias) {
    int64_t D = x.dim(x.rank() - 1);
    if (bias.rank() != 1 || bias.dim(0) != D)
        throw ShapeError("add_lastdim_bias: bias " + shape_str(bias.shape()) + " vs last dim " +
                         std::to_string(D));
    int64_t rows = x.numel() / D;
    Buffer<T> out(x.numel());
    const T* xv = x.data().data();
    const T* bv = bias.data().data();
    for (int64_t r = 0; r < rows; ++r) k_add(xv + r * D, bv, out.data() + r * D, D);
    return make_result<T>(
        x.shape(), std::move(out), {x, bias}, [x, bias, rows, D](TensorNode<T>& o) {
            if (T* g = grad_dst(x.node())) k_add(g, o.grad.data(), g, o.grad.size());
            if (T* g = grad_dst(bias.node())) {
                const T* og = o.grad.data();
                for (int64_t r = 0; r < rows; ++r) k_add(g, og + r * D, g, D);
            }
        });
}

template <typename T>
Tensor<T> add_bias_bm(const Tensor<T>& x, const Tensor<T>& bias) {
    if (x.rank() != 3 || bias.rank() != 2 || bias.dim(0) != x.dim(0) || bias.dim(1) != x.dim(2))
        throw ShapeError("add_bias_bm: x" + shape_str(x.shape()) + " bias" +
                         shape_str(bias.shape()));
    int64_t B = x.dim(0), M = x.dim(1), D = x.dim(2);
    Buffer<T> out(x.numel());
    const T* xv = x.data().data();
    const T* bv = bias.data().data();
    for (int64_t i = 0; i < B; ++i)
        for (int64_t m = 0; m < M; ++m)
            k_add(xv + (i * M + m) * D, bv + i * D, out.data() + (i * M + m) * D, D);
    return make_result<T>(
        x.shape(), std::move(out), {x, bias}, [x, bias, B, M, D](TensorNode<T>& o) {
            if (T* g = grad_dst(x.node())) k_add(g, o.grad.data(), g, o.grad.size());
            if (T* g = grad_dst(bias.node())) {
                const T* og = o.grad.data();
                for (int64_t i = 0; i < B; ++i)
                    for (int64_t m = 0; m < M; ++m) k_add(g + i * D, og + (i * M + m) * D, g + i * D, D);
            }
        });
}

template <typename T>
Tensor<T> add_channel_bias(const Tensor<T>& x, const Tensor<T>& bias) {
    if (x.rank() != 4 || bias.rank() != 1 || bias.dim(0) != x.dim(1))
        throw ShapeError("add_channel_bias: x" + shape_str(x.shape()) + " bias" +
                         shape_str(bias.shape()));
    int64_t F = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
    Buffer<T> out(x.numel());
    const T* xv = x.data().data();
    const T* bv = bias.data().data();
    for (int64_t f = 0; f < F; ++f)
        for (int64_t c = 0; c < C; ++c) {
            const T* src = xv + (f * C + c) * HW;
            T* dst = out.data() + (f * C + c) * HW;
            T b = bv[c];
            for (int64_t i = 0; i < HW; ++i) dst[i] = src[i] + b;
        }
    return make_result<T>(
        x.shape(), std::move(out), {x, bias}, [x, bias, F, C, HW](TensorNode<T>& o) {
            if (T* g = grad_dst(x.node())) k_add(g, o.grad.data(), g, o.grad.size());
            if (T* g = grad_dst(bias.node())) {
                const T* og = o.grad.data();
                for (int64_t f = 0; f < F; ++f)
                    for (int64_t c = 0; c < C; ++c) g[c] += k_sum(og + (f * C + c) * HW, HW);
            }
        });
}

// ---------------------------------------------------------------- conv2d

namespace {

template <typename T>
void im2col(const T* x, int64_t C, int64_t H, int64_t W, int64_t kh, int64_t kw, int64_t stride,
            int64_t pad, int64_t Ho, int64_t Wo, T* cols) {
    // cols[(c*kh+ki)*kw+kj][oy*Wo+ox]
    if (stride == 1 && kh == 3 && kw == 3 && pad == 1) {
        // rows become shifted copies of the source rows
        for (int64_t c = 0; c < C; ++c) {
            const T* xc = x + c * H * W;
            for (int64_t ki = 0; ki < 3; ++ki) {
                for (int64_t kj = 0; kj < 3; ++kj) {
                    T* row = cols + ((c * 3 + ki) * 3 + kj) * H * W;
                    for (int64_t oy = 0; oy < H; ++oy) {
                        int64_t iy = oy + ki - 1;
                        T* dst = row + oy * W;
                        if (iy < 0 || iy >= H) {
                            std::fill(dst, dst + W, T(0));
                            continue;
                        }
                        const T* src = xc + iy * W;
                        if (kj == 0) {
                            dst[0] = T(0);
                            std::memcpy(dst + 1, src, sizeof(T) * (W - 1));
                        } else if (kj == 1) {
                            std::memcpy(dst, src, sizeof(T) * W);
                        } else {
                            std::memcpy(dst, src + 1, sizeof(T) * (W - 1));
                            dst[W - 1] = T(0);
                        }
                    }
                }
            }
        }
        return;
    }
    for (int64_t c = 0; c < C; ++c) {
        const T* xc = x + c * H * W;
        for (int64_t ki = 0; ki < kh; ++ki) {
            for (int64_t kj = 0; kj < kw; ++kj) {
                T* row = cols + ((c * kh + ki) * kw + kj) * Ho * Wo;
                for (int64_t oy = 0; oy < Ho; ++oy) {
                    int64_t iy = oy * stride + ki - pad;
                    T* dst = row + oy * Wo;
                    if (iy < 0 || iy >= H) {
                        std::fill(dst, dst + Wo, T(0));
                        continue;
                    }
                    for (int64_t ox = 0; ox < Wo; ++ox) {
                        int64_t ix = ox * stride + kj - pad;
                        dst[ox] = (ix >= 0 && ix < W) ? xc[iy * W + ix] : T(0);
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_acc(const T* cols, int64_t C, int64_t H, int64_t W, int64_t kh, int64_t kw,
                int64_t stride, int64_t pad, int64_t Ho, int64_t Wo, T* dx) {
    for (int64_t c = 0; c < C; ++c) {
        T* xc = dx + c * H * W;
        for (int64_t ki = 0; ki < kh; ++ki) {
            for (int64_t kj = 0; kj < kw; ++kj) {
                const T* row = cols + ((c * kh + ki) * kw + kj) * Ho * Wo;
                for (int64_t oy = 0; oy < Ho; ++oy) {
                    int64_t iy = oy * stride + ki - pad;
                    if (iy < 0 || iy >= H) continue;
                    const T* src = row + oy * Wo;
                    for (int64_t ox = 0; ox < Wo; ++ox) {
                        int64_t ix = ox * stride + kj - pad;
                        if (ix >= 0 && ix < W) xc[iy * W + ix] += src[ox];
                    }
                }
            }
        }
    }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride,
                 int padding) {
    if (x.rank() != 4 || w.rank() != 4)
        throw ShapeError("conv2d: x" + shape_str(x.shape()) + " w" + shape_str(w.shape()));
    int64_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    int64_t O = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    if (w.dim(1) != C)
        throw ShapeError("conv2d: input channels " + std::to_string(C) + " vs kernel " +
                         shape_str(w.shape()));
    if (b.rank() != 1 || b.dim(0) != O)
        throw ShapeError("conv2d: bias " + shape_str(b.shape()) + " vs out channels " +
                         std::to_string(O));
    if (stride < 1) throw ShapeError("conv2d: stride must be >= 1");
    int64_t Ho = (H + 2 * padding - kh) / stride + 1;
    int64_t Wo = (W + 2 * padding - kw) / stride + 1;
    if (H + 2 * padding < kh || W + 2 * padding < kw || Ho < 1 || Wo < 1)
        throw ShapeError("conv2d: kernel " + shape_str(w.shape()) + " does not fit input " +
                         shape_str(x.shape()) + " with padding " + std::to_string(padding));

    int64_t K = C * kh * kw, P = Ho * Wo;
    Buffer<T> out(static_cast<size_t>(B * O * P));
    auto conv_one = [&](std::vector<T>& cols, int64_t i) {
        im2col(x.data().data() + i * C * H * W, C, H, W, kh, kw, stride, padding, Ho, Wo,
               cols.data());
        T* o = out.data() + i * O * P;
        k_gemm_nn(O, P, K, w.data().data(), cols.data(), o, false);
        const T* bv = b.data().data();
        for (int64_t oc = 0; oc < O; ++oc) {
            T bias = bv[oc];
            T* dst = o + oc * P;
            for (int64_t p = 0; p < P; ++p) dst[p] += bias;
        }
    };
    if (B == 1) {
        std::vector<T> cols(static_cast<size_t>(K * P));
        im2col(x.data().data(), C, H, W, kh, kw, stride, padding, Ho, Wo, cols.data());
        kernels::pgemm_nn(O, P, K, w.data().data(), cols.data(), out.data(), false);
        const T* bv = b.data().data();
        for (int64_t oc = 0; oc < O; ++oc)
            for (int64_t p = 0; p < P; ++p) out[oc * P + p] += bv[oc];
    } else {
        parallel_for(B, [&](int64_t b0, int64_t b1) {
            std::vector<T> cols(static_cast<size_t>(K * P));
            for (int64_t i = b0; i < b1; ++i) conv_one(cols, i);
        });
    }

    int s = stride, pd = padding;
    return make_result<T>(
        {B, O, Ho, Wo}, std::move(out), {x, w, b},
        [x, w, b, B, C, H, W, O, kh, kw, s, pd, Ho, Wo, K, P](TensorNode<T>& o) {
            std::vector<T> cols(static_cast<size_t>(K * P));
            std::vector<T> dcols;
            T* gx = grad_dst(x.node());
            T* gw = grad_dst(w.node());
            T* gb = grad_dst(b.node());
            if (gx) dcols.resize(static_cast<size_t>(K * P));
            const T* dy = o.grad.data();
            for (int64_t i = 0; i < B; ++i) {
                const T* dyi = dy + i * O * P;
                if (gw || gx)
                    im2col(x.data().data() + i * C * H * W, C, H, W, kh, kw, s, pd, Ho, Wo,
                           cols.data());
                if (gw) kernels::pgemm_nt(O, K, P, dyi, cols.data(), gw, true);
                if (gx) {
                    kernels::pgemm_tn(K, P, O, w.data().data(), dyi, dcols.data(), false);
                    col2im_acc(dcols.data(), C, H, W, kh, kw, s, pd, Ho, Wo, gx + i * C * H * W);
                }
                if (gb)
                    for (int64_t oc = 0; oc < O; ++oc) gb[oc] += k_sum(dyi + oc * P, P);
            }
        });
}

// ---------------------------------------------------------------- temporal conv

template <typename T>
Tensor<T> temporal_conv3d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
    if (x.rank() != 5 || w.rank() != 3)
        throw ShapeError("temporal_conv3d: x" + shape_str(x.shape()) + " w" +
                         shape_str(w.shape()));
    int64_t B = x.dim(0), C = x.dim(1), N = x.dim(2), H = x.dim(3), W = x.dim(4);
    int64_t O = w.dim(0), kt = w.dim(2);
    if (N < 1) throw ShapeError("temporal_conv3d: temporal length must be >= 1");
    if (w.dim(1) != C || b.rank() != 1 || b.dim(0) != O)
        throw ShapeError("temporal_conv3d: w" + shape_str(w.shape()) + " b" +
                         shape_str(b.shape()) + " vs C=" + std::to_string(C));
    if (kt % 2 == 0) throw ShapeError("temporal_conv3d: kernel size must be odd");
    int64_t pad = kt / 2, HW = H * W;

    // Per-tap packed weight slices [O,C] for the GEMM form.
    std::vector<std::vector<T>> wdt(static_cast<size_t>(kt));
    const T* wv = w.data().data();
    for (int64_t dt = 0; dt < kt; ++dt) {
        wdt[dt].resize(static_cast<size_t>(O * C));
        for (int64_t oc = 0; oc < O; ++oc)
            for (int64_t c = 0; c < C; ++c) wdt[dt][oc * C + c] = wv[(oc * C + c) * kt + dt];
    }

    Buffer<T> out(static_cast<size_t>(B * O * N * HW));
    const T* xv = x.data().data();
    const T* bv = b.data().data();
    for (int64_t i = 0; i < B; ++i) {
        for (int64_t n = 0; n < N; ++n) {
            T* dst = out.data() + (i * O + 0) * N * HW + n * HW;
            // out slice rows are strided by N*HW per output channel; run GEMM into
            // a packed scratch then scatter.
            std::vector<T> acc(static_cast<size_t>(O * HW), T(0));
            for (int64_t dt = 0; dt < kt; ++dt) {
                int64_t ns = n + dt - pad;
                if (ns < 0 || ns >= N) continue;
                // gather x slice [C, HW] (strided rows)
                std::vector<T> xs(static_cast<size_t>(C * HW));
                for (int64_t c = 0; c < C; ++c)
                    std::memcpy(xs.data() + c * HW, xv + ((i * C + c) * N + ns) * HW,
                                sizeof(T) * HW);
                kernels::pgemm_nn(O, HW, C, wdt[dt].data(), xs.data(), acc.data(), true);
            }
            for (int64_t oc = 0; oc < O; ++oc) {
                T* d = dst + oc * N * HW;
                const T* a = acc.data() + oc * HW;
                T bias = bv[oc];
                for (int64_t p = 0; p < HW; ++p) d[p] = a[p] + bias;
            }
        }
    }

    return make_result<T>(
        {B, O, N, H, W}, std::move(out), {x, w, b},
        [x, w, b, B, C, N, HW, O, kt, pad](TensorNode<T>& o) {
            T* gx = grad_dst(x.node());
            T* gw = grad_dst(w.node());
            T* gb = grad_dst(b.node());
            const T* dy = o.grad.data();
            const T* xv = x.data().data();
            const T* wv = w.data().data();
            std::vector<T> wdt(static_cast<size_t>(O * C));
            for (int64_t i = 0; i < B; ++i) {
                for (int64_t n = 0; n < N; ++n) {
                    // packed dy slice [O, HW]
                    std::vector<T> dys(static_cast<size_t>(O * HW));
                    for (int64_t oc = 0; oc < O; ++oc)
                        std::memcpy(dys.data() + oc * HW, dy + ((i * O + oc) * N + n) * HW,
                                    sizeof(T) * HW);
                    if (gb)
                        for (int64_t oc = 0; oc < O; ++oc)
                            gb[oc] += k_sum(dys.data() + oc * HW, HW);
                    for (int64_t dt = 0; dt < kt; ++dt) {
                        int64_t ns = n + dt - pad;
                        if (ns < 0 || ns >= N) continue;
                        std::vector<T> xs(static_cast<size_t>(C * HW));
                        for (int64_t c = 0; c < C; ++c)
                            std::memcpy(xs.data() + c * HW, xv + ((i * C + c) * N + ns) * HW,
                                        sizeof(T) * HW);
                        if (gw) {
                            std::vector<T> gwdt(static_cast<size_t>(O * C), T(0));
                            kernels::pgemm_nt(O, C, HW, dys.data(), xs.data(), gwdt.data(), false);
                            for (int64_t oc = 0; oc < O; ++oc)
                                for (int64_t c = 0; c < C; ++c)
                                    gw[(oc * C + c) * kt + dt] += gwdt[oc * C + c];
                        }
                        if (gx) {
                            for (int64_t oc = 0; oc < O; ++oc)
                                for (int64_t c = 0; c < C; ++c)
                                    wdt[oc * C + c] = wv[(oc * C + c) * kt + dt];
                            std::vector<T> gxs(static_cast<size_t>(C * HW), T(0));
                            kernels::pgemm_tn(C, HW, O, wdt.data(), dys.data(), gxs.data(), false);
                            for (int64_t c = 0; c < C; ++c) {
                                T* dst = gx + ((i * C + c) * N + ns) * HW;
                                k_add(dst, gxs.data() + c * HW, dst, HW);
                            }
                        }
                    }
                }
            }
        });
}

// ---------------------------------------------------------------- group norm

template <typename T>
Tensor<T> group_norm(const Tensor<T>& x, int groups, const Tensor<T>& gamma,
                     const Tensor<T>& beta, T eps) {
    if (x.rank() != 4) throw ShapeError("group_norm: expected [F,C,H,W], got " + shape_str(x.shape()));
    int64_t F = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
    if (groups < 1 || C % groups != 0)
        throw ShapeError("group_norm: groups " + std::to_string(groups) +
                         " does not divide channels " + std::to_string(C));
    if (gamma.rank() != 1 || gamma.dim(0) != C || beta.rank() != 1 || beta.dim(0) != C)
        throw ShapeError("group_norm: affine params must be [C]");
    int64_t cg = C / groups, gsize = cg * HW;

    Buffer<T> out(x.numel());
    std::vector<T> inv_std(static_cast<size_t>(F * groups));
    std::vector<T> mean(static_cast<size_t>(F * groups));
    const T* xv = x.data().data();
    const T* gv = gamma.data().data();
    const T* bv = beta.data().data();
    for (int64_t f = 0; f < F; ++f) {
        for (int64_t g = 0; g < groups; ++g) {
            const T* xs = xv + (f * C + g * cg) * HW;
            T mu = k_sum(xs, gsize) / T(gsize);
            T var = 0;
            for (int64_t i = 0; i < gsize; ++i) {
                T d = xs[i] - mu;
                var += d * d;
            }
            var /= T(gsize);
            T is = T(1) / std::sqrt(var + eps);
            mean[f * groups + g] = mu;
            inv_std[f * groups + g] = is;
            for (int64_t c = 0; c < cg; ++c) {
                T ga = gv[g * cg + c], be = bv[g * cg + c];
                const T* src = xs + c * HW;
                T* dst = out.data() + (f * C + g * cg + c) * HW;
                for (int64_t i = 0; i < HW; ++i) dst[i] = ga * (src[i] - mu) * is + be;
            }
        }
    }

    return make_result<T>(
        x.shape(), std::move(out), {x, gamma, beta},
        [x, gamma, beta, F, C, HW, groups, cg, gsize, mean = std::move(mean),
         inv_std = std::move(inv_std)](TensorNode<T>& o) {
            T* gx = grad_dst(x.node());
            T* gg = grad_dst(gamma.node());
            T* gb = grad_dst(beta.node());
            const T* dy = o.grad.data();
            const T* xv = x.data().data();
            const T* gv = gamma.data().data();
            for (int64_t f = 0; f < F; ++f) {
                for (int64_t g = 0; g < groups; ++g) {
                    T mu = mean[f * groups + g], is = inv_std[f * groups + g];
                    const T* xs = xv + (f * C + g * cg) * HW;
                    const T* dys = dy + (f * C + g * cg) * HW;
                    if (gg || gb) {
                        for (int64_t c = 0; c < cg; ++c) {
                            T sg = 0, sb = 0;
                            const T* d = dys + c * HW;
                            const T* xc = xs + c * HW;
                            for (int64_t i = 0; i < HW; ++i) {
                                sb += d[i];
                                sg += d[i] * (xc[i] - mu) * is;
                            }
                            if (gg) gg[g * cg + c] += sg;
                            if (gb) gb[g * cg + c] += sb;
                        }
                    }
                    if (gx) {
                        T sum1 = 0, sum2 = 0;
                        for (int64_t c = 0; c < cg; ++c) {
                            T ga = gv[g * cg + c];
                            const T* d = dys + c * HW;
                            const T* xc = xs + c * HW;
                            for (int64_t i = 0; i < HW; ++i) {
                                T gi = d[i] * ga;
                                sum1 += gi;
                                sum2 += gi * (xc[i] - mu) * is;
                            }
                        }
                        T inv_n = T(1) / T(gsize);
                        for (int64_t c = 0; c < cg; ++c) {
                            T ga = gv[g * cg + c];
                            const T* d = dys + c * HW;
                            const T* xc = xs + c * HW;
                            T* dst = gx + (f * C + g * cg + c) * HW;
                            for (int64_t i = 0; i < HW; ++i) {
                                T xh = (xc[i] - mu) * is;
                                dst[i] += is * (d[i] * ga - inv_n * sum1 - xh * inv_n * sum2);
                            }
                        }
                    }
                }
            }
        });
}

// ---------------------------------------------------------------- softmax

template <typename T>
Tensor<T> softmax_lastdim(const Tensor<T>& x) {
    int64_t D = x.dim(x.rank() - 1);
    int64_t rows = x.numel() / D;
    Buffer<T> out(x.numel());
    const T* xv = x.data().data();
    for (int64_t r = 0; r < rows; ++r) {
        const T* src = xv + r * D;
        T* dst = out.data() + r * D;
        T m = k_max(src, D);
        for (int64_t i = 0; i < D; ++i) dst[i] = src[i] - m;
        k_vexp(dst, dst, D);
        T s = k_sum(dst, D);
        k_scale(dst, T(1) / s, dst, D);
    }
    return make_result<T>(x.shape(), std::move(out), {x}, [x, rows, D](TensorNode<T>& o) {
        if (T* gx = grad_dst(x.node())) {
            const T* y = o.val.data();
            const T* dy = o.grad.data();
            for (int64_t r = 0; r < rows; ++r) {
                const T* yr = y + r * D;
                const T* dr = dy + r * D;
                T dotv = k_dot(yr, dr, D);
                T* gxr = gx + r * D;
                for (int64_t i = 0; i < D; ++i) gxr[i] += yr[i] * (dr[i] - dotv);
            }
        }
    });
}

// ---------------------------------------------------------------- shape ops

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& xs, int axis) {
    if (xs.empty()) throw ShapeError("concat: no inputs");
    int r = xs[0].rank();
    if (axis < 0 || axis >= r) throw ShapeError("concat: bad axis");
    Shape out_shape = xs[0].shape();
    int64_t axis_total = 0;
    for (const auto& t : xs) {
        if (t.rank() != r) throw ShapeError("concat: rank mismatch");
        for (int i = 0; i < r; ++i)
            if (i != axis && t.dim(i) != out_shape[i])
                throw ShapeError("concat: shape mismatch " + shape_str(t.shape()) + " vs " +
                                 shape_str(out_shape) + " (axis " + std::to_string(axis) + ")");
        axis_total += t.dim(axis);
    }
    out_shape[axis] = axis_total;

    int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= out_shape[i];
    for (int i = axis + 1; i < r; ++i) inner *= out_shape[i];

    Buffer<T> out(static_cast<size_t>(shape_numel(out_shape)));
    int64_t out_row = axis_total * inner;
    int64_t off = 0;
    for (const auto& t : xs) {
        int64_t block = t.dim(axis) * inner;
        const T* src = t.data().data();
        for (int64_t o = 0; o < outer; ++o)
            std::memcpy(out.data() + o * out_row + off, src + o * block, sizeof(T) * block);
        off += block;
    }

    return make_result<T>(
        out_shape, std::move(out), xs, [xs, outer, out_row](TensorNode<T>& o) {
            int64_t offset = 0;
            for (const auto& t : xs) {
                int64_t block = t.numel() / outer;
                if (T* g = grad_dst(t.node())) {
                    const T* og = o.grad.data();
                    for (int64_t ob = 0; ob < outer; ++ob)
                        k_add(g + ob * block, og + ob * out_row + offset, g + ob * block, block);
                }
                offset += block;
            }
        });
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, int axis, int64_t start, int64_t len) {
    int r = x.rank();
    if (axis < 0 || axis >= r) throw ShapeError("slice: bad axis");
    if (start < 0 || len < 1 || start + len > x.dim(axis))
        throw ShapeError("slice: range [" + std::to_string(start) + "," +
                         std::to_string(start + len) + ") outside dim " +
                         std::to_string(x.dim(axis)));
    Shape out_shape = x.shape();
    out_shape[axis] = len;
    int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= x.dim(i);
    for (int i = axis + 1; i < r; ++i) inner *= x.dim(i);
    int64_t in_row = x.dim(axis) * inner, out_row = len * inner, off = start * inner;

    Buffer<T> out(static_cast<size_t>(outer * out_row));
    const T* xv = x.data().data();
    for (int64_t o = 0; o < outer; ++o)
        std::memcpy(out.data() + o * out_row, xv + o * in_row + off, sizeof(T) * out_row);

    return make_result<T>(
        out_shape, std::move(out), {x}, [x, outer, in_row, out_row, off](TensorNode<T>& o) {
            if (T* g = grad_dst(x.node())) {
                const T* og = o.grad.data();
                for (int64_t ob = 0; ob < outer; ++ob)
                    k_add(g + ob * in_row + off, og + ob * out_row, g + ob * in_row + off, out_row);
            }
        });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
    if (shape_numel(shape) != x.numel())
        throw ShapeError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape));
    Buffer<T> out(x.data().begin(), x.data().end());
    return make_result<T>(std::move(shape), std::move(out), {x}, [x](TensorNode<T>& o) {
        if (T* g = grad_dst(x.node())) k_add(g, o.grad.data(), g, o.grad.size());
    });
}

namespace {

template <typename T>
void transpose2d(const T* src, T* dst, int64_t rows, int64_t cols) {
    // dst[c*rows + r] = src[r*cols + c], 32x32 tiles
    constexpr int64_t kTile = 32;
    for (int64_t r0 = 0; r0 < rows; r0 += kTile)
        for (int64_t c0 = 0; c0 < cols; c0 += kTile) {
            int64_t r1 = std::min(r0 + kTile, rows), c1 = std::min(c0 + kTile, cols);
            for (int64_t r = r0; r < r1; ++r)
                for (int64_t c = c0; c < c1; ++c) dst[c * rows + r] = src[r * cols + c];
        }
}

// Copies x permuted by dims into a fresh buffer; the hot attention layout
// moves are plain 2-D transposes or fixed-size row interleaves.
template <typename T>
Buffer<T> permute_values(const T* xv, const Shape& in_shape, const std::vector<int>& dims) {
    int r = static_cast<int>(in_shape.size());
    Shape out_shape(static_cast<size_t>(r));
    for (int i = 0; i < r; ++i) out_shape[i] = in_shape[dims[i]];
    int64_t n = shape_numel(in_shape);
    Buffer<T> out(static_cast<size_t>(n));
    const T* src = xv;

    int grouped = [&] {
        int k = dims[0];
        for (int i = 0; i < r; ++i)
            if (dims[i] != (k + i) % r) return -1;
        return k;
    }();
    if (grouped > 0) {
        int64_t rows = 1, cols = 1;
        for (int i = 0; i < grouped; ++i) rows *= in_shape[i];
        for (int i = grouped; i < r; ++i) cols *= in_shape[i];
        transpose2d(src, out.data(), rows, cols);
        return out;
    }
    if (r == 4 && dims == std::vector<int>{0, 2, 3, 1}) {
        int64_t f_count = in_shape[0], a = in_shape[1], p = in_shape[2] * in_shape[3];
        for (int64_t f = 0; f < f_count; ++f)
            transpose2d(src + f * a * p, out.data() + f * a * p, a, p);
        return out;
    }
    if (r == 4 && dims == std::vector<int>{0, 3, 1, 2}) {
        int64_t f_count = in_shape[0], p = in_shape[1] * in_shape[2], a = in_shape[3];
        for (int64_t f = 0; f < f_count; ++f)
            transpose2d(src + f * a * p, out.data() + f * a * p, p, a);
        return out;
    }
    if (r == 4 && dims == std::vector<int>{0, 2, 1, 3}) {
        int64_t f_count = in_shape[0], a = in_shape[1], b = in_shape[2], d = in_shape[3];
        for (int64_t f = 0; f < f_count; ++f) {
            const T* fs = src + f * a * b * d;
            T* fd = out.data() + f * a * b * d;
            for (int64_t bb = 0; bb < b; ++bb)
                for (int64_t aa = 0; aa < a; ++aa)
                    std::memcpy(fd + (bb * a + aa) * d, fs + (aa * b + bb) * d, sizeof(T) * d);
        }
        return out;
    }

    std::vector<int64_t> in_strides(static_cast<size_t>(r), 1);
    for (int i = r - 2; i >= 0; --i) in_strides[i] = in_strides[i + 1] * in_shape[i + 1];
    std::vector<int64_t> strides(static_cast<size_t>(r));
    for (int i = 0; i < r; ++i) strides[i] = in_strides[dims[i]];
    std::vector<int64_t> idx(static_cast<size_t>(r), 0);
    int64_t at = 0;
    for (int64_t i = 0; i < n; ++i) {
        out[i] = src[at];
        for (int d = r - 1; d >= 0; --d) {
            at += strides[d];
            if (++idx[d] < out_shape[d]) break;
            at -= strides[d] * out_shape[d];
            idx[d] = 0;
        }
    }
    return out;
}

}  // namespace

template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<int>& dims) {
    int r = x.rank();
    if (static_cast<int>(dims.size()) != r) throw ShapeError("permute: dims size mismatch");
    std::vector<bool> used(static_cast<size_t>(r), false);
    Shape out_shape(static_cast<size_t>(r));
    for (int i = 0; i < r; ++i) {
        int d = dims[i];
        if (d < 0 || d >= r || used[d]) throw ShapeError("permute: invalid dims");
        used[d] = true;
        out_shape[i] = x.dim(d);
    }
    Buffer<T> out = permute_values(x.data().data(), x.shape(), dims);
    std::vector<int> inverse(static_cast<size_t>(r));
    for (int i = 0; i < r; ++i) inverse[dims[i]] = i;

    return make_result<T>(
        out_shape, std::move(out), {x}, [x, out_shape, inverse](TensorNode<T>& o) {
            if (T* g = grad_dst(x.node())) {
                Buffer<T> back = permute_values(o.grad.data(), out_shape, inverse);
                k_add(g, back.data(), g, static_cast<int64_t>(back.size()));
            }
        });
}

template <typename T>
Tensor<T> upsample_nearest2x(const Tensor<T>& x) {
    if (x.rank() != 4) throw ShapeError("upsample_nearest2x: expected [F,C,H,W]");
    int64_t F = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    Buffer<T> out(static_cast<size_t>(F * C * 4 * H * W));
    const T* xv = x.data().data();
    for (int64_t fc = 0; fc < F * C; ++fc) {
        const T* src = xv + fc * H * W;
        T* dst = out.data() + fc * 4 * H * W;
        for (int64_t y = 0; y < H; ++y)
            for (int64_t xj = 0; xj < W; ++xj) {
                T v = src[y * W + xj];
                int64_t o0 = (2 * y) * (2 * W) + 2 * xj;
                dst[o0] = v;
                dst[o0 + 1] = v;
                dst[o0 + 2 * W] = v;
                dst[o0 + 2 * W + 1] = v;
            }
    }
    return make_result<T>(
        {F, C, 2 * H, 2 * W}, std::move(out), {x}, [x, F, C, H, W](TensorNode<T>& o) {
            if (T* g = grad_dst(x.node())) {
                const T* og = o.grad.data();
                for (int64_t fc = 0; fc < F * C; ++fc) {
                    T* dst = g + fc * H * W;
                    const T* src = og + fc * 4 * H * W;
                    for (int64_t y = 0; y < H; ++y)
                        for (int64_t xj = 0; xj < W; ++xj) {
                            int64_t o0 = (2 * y) * (2 * W) + 2 * xj;
                            dst[y * W + xj] +=
                                src[o0] + src[o0 + 1] + src[o0 + 2 * W] + src[o0 + 2 * W + 1];
                        }
                }
            }
        });
}

// ---------------------------------------------------------------- reductions

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x) {
    T s = k_sum(x.data().data(), x.numel());
    return make_result<T>({1}, Buffer<T>{s}, {x}, [x](TensorNode<T>& o) {
        if (T* g = grad_dst(x.node())) {
            T dv = o.grad[0];
            for (size_t i = 0; i < x.node()->val.size(); ++i) g[i] += dv;
        }
    });
}

template <typename T>
Tensor<T> mean_all(const Tensor<T>& x) {
    return scale(sum_all(x), T(1) / T(x.numel()));
}

template <typename T>
Tensor<T> mse(const Tensor<T>& a, const Tensor<T>& b) {
    Tensor<T> d = sub(a, b);
    return mean_all(mul(d, d));
}

// ---------------------------------------------------------------- attention

namespace {
template <typename T>
Tensor<T> sdp_attention_impl(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                             const Tensor<T>* logit_bias) {
    if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2)
        throw ShapeError("sdp_attention: expected rank-2 Q,K,V");
    int64_t d = q.dim(1), tk = k.dim(0);
    if (k.dim(1) != d || v.dim(1) != d || v.dim(0) != tk)
        throw ShapeError("sdp_attention: Q" + shape_str(q.shape()) + " K" + shape_str(k.shape()) +
                         " V" + shape_str(v.shape()));
    Tensor<T> logits = scale(matmul_nt(q, k), T(1) / std::sqrt(T(d)));
    if (logit_bias) {
        if (logit_bias->rank() != 1 || logit_bias->dim(0) != tk)
            throw ShapeError("sdp_attention: logit_bias must be [T_k]");
        logits = add_lastdim_bias(logits, *logit_bias);
    }
    for (T x : logits.data())
        if (!std::isfinite(static_cast<double>(x)))
            throw NumericError("sdp_attention: non-finite logits");
    return matmul(softmax_lastdim(logits), v);
}
}  // namespace

template <typename T>
Tensor<T> sdp_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v) {
    return sdp_attention_impl(q, k, v, static_cast<const Tensor<T>*>(nullptr));
}

template <typename T>
Tensor<T> sdp_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                        const Tensor<T>& logit_bias) {
    return sdp_attention_impl(q, k, v, &logit_bias);
}

// ---------------------------------------------------------------- instantiation

#define LVC_INSTANTIATE(T)                                                                        \
    template class Tensor<T>;                                                                     \
    template Tensor<T> detail::make_result<T>(Shape, Buffer<T>, std::vector<Tensor<T>>,           \
                                              std::function<void(TensorNode<T>&)>);               \
    template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                                \
    template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);                                \
    template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                                \
    template Tensor<T> scale<T>(const Tensor<T>&, T);                                             \
    template Tensor<T> silu<T>(const Tensor<T>&);                                                 \
    template Tensor<T> matmul<T>(const Tensor<T>&, const Tensor<T>&);                             \
    template Tensor<T> matmul_nt<T>(const Tensor<T>&, const Tensor<T>&);                          \
    template Tensor<T> bmm<T>(const Tensor<T>&, const Tensor<T>&);                                \
    template Tensor<T> bmm_nt<T>(const Tensor<T>&, const Tensor<T>&);                             \
    template Tensor<T> linear<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);           \
    template Tensor<T> add_lastdim_bias<T>(const Tensor<T>&, const Tensor<T>&);                   \
    template Tensor<T> add_bias_bm<T>(const Tensor<T>&, const Tensor<T>&);                        \
    template Tensor<T> add_channel_bias<T>(const Tensor<T>&, const Tensor<T>&);                   \
    template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int); \
    template Tensor<T> temporal_conv3d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);  \
    template Tensor<T> group_norm<T>(const Tensor<T>&, int, const Tensor<T>&, const Tensor<T>&,   \
                                     T);                                                          \
    template Tensor<T> softmax_lastdim<T>(const Tensor<T>&);                                      \
    template Tensor<T> concat<T>(const std::vector<Tensor<T>>&, int);                             \
    template Tensor<T> slice<T>(const Tensor<T>&, int, int64_t, int64_t);                         \
    template Tensor<T> reshape<T>(const Tensor<T>&, Shape);                                       \
    template Tensor<T> permute<T>(const Tensor<T>&, const std::vector<int>&);                     \
    template Tensor<T> upsample_nearest2x<T>(const Tensor<T>&);                                   \
    template Tensor<T> sum_all<T>(const Tensor<T>&);                                              \
    template Tensor<T> mean_all<T>(const Tensor<T>&);                                             \
    template Tensor<T> mse<T>(const Tensor<T>&, const Tensor<T>&);                                \
    template Tensor<T> sdp_attention<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);    \
    template Tensor<T> sdp_attention<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                        const Tensor<T>&);

LVC_INSTANTIATE(float)
LVC_INSTANTIATE(double)

#undef LVC_INSTANTIATE

}  // namespace lvc
