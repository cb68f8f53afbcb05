#pragma once

#include <cmath>
#include <cstdint>

// Scalar reference kernels. These define the semantics the SIMD variants are
// tested against, and they are the only implementations used for double
// precision (the gradient-check path).
namespace lvc::kernels::ref {

template <typename T>
void add(const T* a, const T* b, T* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

template <typename T>
void sub(const T* a, const T* b, T* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}

template <typename T>
void mul(const T* a, const T* b, T* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

template <typename T>
void scale(const T* a, T s, T* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = a[i] * s;
}

// y += a*x
template <typename T>
void axpy(T a, const T* x, T* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// z = a*x + b*y
template <typename T>
void saxpby(T a, const T* x, T b, const T* y, T* z, int64_t n) {
    for (int64_t i = 0; i < n; ++i) z[i] = a * x[i] + b * y[i];
}

template <typename T>
T dot(const T* a, const T* b, int64_t n) {
    T acc = 0;
    for (int64_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

template <typename T>
T sum(const T* a, int64_t n) {
    T acc = 0;
    for (int64_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

template <typename T>
T sumsq(const T* a, int64_t n) {
    T acc = 0;
    for (int64_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

template <typename T>
T max(const T* a, int64_t n) {
    T m = a[0];
    for (int64_t i = 1; i < n; ++i) m = a[i] > m ? a[i] : m;
    return m;
}

template <typename T>
void silu(const T* x, T* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) {
        T s = T(1) / (T(1) + std::exp(-x[i]));
        y[i] = x[i] * s;
    }
}

// dx += dy * d silu(x)/dx
template <typename T>
void silu_bwd(const T* x, const T* dy, T* dx, int64_t n) {
    for (int64_t i = 0; i < n; ++i) {
        T s = T(1) / (T(1) + std::exp(-x[i]));
        dx[i] += dy[i] * s * (T(1) + x[i] * (T(1) - s));
    }
}

template <typename T>
void vexp(const T* x, T* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

// Packed-layout GEMM family. `acc` false zeroes C first.
// gemm_nn: C[M,N] (+)= A[M,K] * B[K,N]
template <typename T>
void gemm_nn(int64_t M, int64_t N, int64_t K, const T* A, const T* B, T* C, bool acc) {
    for (int64_t m = 0; m < M; ++m) {
        T* c = C + m * N;
        if (!acc)
            for (int64_t j = 0; j < N; ++j) c[j] = 0;
        const T* a = A + m * K;
        for (int64_t k = 0; k < K; ++k) {
            T av = a[k];
            const T* b = B + k * N;
            for (int64_t j = 0; j < N; ++j) c[j] += av * b[j];
        }
    }
}

// gemm_nt: C[M,N] (+)= A[M,K] * B[N,K]^T
template <typename T>
void gemm_nt(int64_t M, int64_t N, int64_t K, const T* A, const T* B, T* C, bool acc) {
    for (int64_t m = 0; m < M; ++m) {
        const T* a = A + m * K;
        T* c = C + m * N;
        for (int64_t j = 0; j < N; ++j) {
            T d = dot(a, B + j * K, K);
            c[j] = acc ? c[j] + d : d;
        }
    }
}

// gemm_tn: C[M,N] (+)= A^T * B where A is [K,lda] and B is [K,N].
// lda is A's row stride; the element for output row m is A[k*lda + m].
template <typename T>
void gemm_tn(int64_t M, int64_t N, int64_t K, const T* A, int64_t lda, const T* B, T* C,
             bool acc) {
    for (int64_t m = 0; m < M; ++m) {
        T* c = C + m * N;
        if (!acc)
            for (int64_t j = 0; j < N; ++j) c[j] = 0;
        for (int64_t k = 0; k < K; ++k) {
            T av = A[k * lda + m];
            const T* b = B + k * N;
            for (int64_t j = 0; j < N; ++j) c[j] += av * b[j];
        }
    }
}

}  // namespace lvc::kernels::ref
