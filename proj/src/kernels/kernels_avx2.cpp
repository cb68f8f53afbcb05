// AVX2+FMA variants. Built with -mavx2 -mfma on x86-64; the dispatcher only
// hands this table out when cpuid reports both features.
#include "kernels/kernels.hpp"
#include "kernels/ref_kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace lvc::kernels {
namespace {

inline float hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
    lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
    return _mm_cvtss_f32(lo);
}

inline float hmax(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_max_ps(lo, hi);
    lo = _mm_max_ps(lo, _mm_movehl_ps(lo, lo));
    lo = _mm_max_ss(lo, _mm_shuffle_ps(lo, lo, 1));
    return _mm_cvtss_f32(lo);
}

// cephes-style exp, ~1e-7 relative accuracy over the clamped range
inline __m256 exp256(__m256 x) {
    x = _mm256_min_ps(_mm256_max_ps(x, _mm256_set1_ps(-88.3762626647949f)),
                      _mm256_set1_ps(88.3762626647949f));
    __m256 fx = _mm256_fmadd_ps(x, _mm256_set1_ps(1.44269504088896341f),
                                _mm256_set1_ps(0.5f));
    fx = _mm256_floor_ps(fx);
    x = _mm256_fnmadd_ps(fx, _mm256_set1_ps(0.693359375f), x);
    x = _mm256_fnmadd_ps(fx, _mm256_set1_ps(-2.12194440e-4f), x);
    __m256 z = _mm256_mul_ps(x, x);
    __m256 y = _mm256_set1_ps(1.9875691500e-4f);
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.3981999507e-3f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(8.3334519073e-3f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(4.1665795894e-2f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.6666665459e-1f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(5.0000001201e-1f));
    y = _mm256_fmadd_ps(y, z, _mm256_add_ps(x, _mm256_set1_ps(1.0f)));
    __m256i n = _mm256_cvttps_epi32(fx);
    n = _mm256_slli_epi32(_mm256_add_epi32(n, _mm256_set1_epi32(127)), 23);
    return _mm256_mul_ps(y, _mm256_castsi256_ps(n));
}

void add(const float* a, const float* b, float* y, int64_t n) {
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    for (; i < n; ++i) y[i] = a[i] + b[i];
}

void sub(const float* a, const float* b, float* y, int64_t n) {
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    for (; i < n; ++i) y[i] = a[i] - b[i];
}

void mul(const float* a, const float* b, float* y, int64_t n) {
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    for (; i < n; ++i) y[i] = a[i] * b[i];
}

void scale(const float* a, float s, float* y, int64_t n) {
    __m256 vs = _mm256_set1_ps(s);
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), vs));
    for (; i < n; ++i) y[i] = a[i] * s;
}

void axpy(float a, const float* x, float* y, int64_t n) {
    __m256 va = _mm256_set1_ps(a);
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void saxpby(float a, const float* x, float b, const float* y, float* z, int64_t n) {
    __m256 va = _mm256_set1_ps(a), vb = _mm256_set1_ps(b);
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 t = _mm256_mul_ps(vb, _mm256_loadu_ps(y + i));
        _mm256_storeu_ps(z + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), t));
    }
    for (; i < n; ++i) z[i] = a * x[i] + b * y[i];
}

float dot(const float* a, const float* b, int64_t n) {
    __m256 acc0 = _mm256_setzero_ps(), acc1 = _mm256_setzero_ps();
    int64_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8)
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    float r = hsum(_mm256_add_ps(acc0, acc1));
    for (; i < n; ++i) r += a[i] * b[i];
    return r;
}

float sum(const float* a, int64_t n) {
    __m256 acc = _mm256_setzero_ps();
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(a + i));
    float r = hsum(acc);
    for (; i < n; ++i) r += a[i];
    return r;
}

float sumsq(const float* a, int64_t n) {
    __m256 acc = _mm256_setzero_ps();
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 v = _mm256_loadu_ps(a + i);
        acc = _mm256_fmadd_ps(v, v, acc);
    }
    float r = hsum(acc);
    for (; i < n; ++i) r += a[i] * a[i];
    return r;
}

float vmax(const float* a, int64_t n) {
    if (n < 8) return ref::max(a, n);
    __m256 m = _mm256_loadu_ps(a);
    int64_t i = 8;
    for (; i + 8 <= n; i += 8) m = _mm256_max_ps(m, _mm256_loadu_ps(a + i));
    float r = hmax(m);
    for (; i < n; ++i) r = a[i] > r ? a[i] : r;
    return r;
}

void silu(const float* x, float* y, int64_t n) {
    const __m256 one = _mm256_set1_ps(1.0f);
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 v = _mm256_loadu_ps(x + i);
        __m256 e = exp256(_mm256_sub_ps(_mm256_setzero_ps(), v));
        _mm256_storeu_ps(y + i, _mm256_div_ps(v, _mm256_add_ps(one, e)));
    }
    if (i < n) ref::silu(x + i, y + i, n - i);
}

void vexp(const float* x, float* y, int64_t n) {
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, exp256(_mm256_loadu_ps(x + i)));
    if (i < n) ref::vexp(x + i, y + i, n - i);
}

void silu_bwd(const float* x, const float* dy, float* dx, int64_t n) {
    const __m256 one = _mm256_set1_ps(1.0f);
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 v = _mm256_loadu_ps(x + i);
        __m256 e = exp256(_mm256_sub_ps(_mm256_setzero_ps(), v));
        __m256 s = _mm256_div_ps(one, _mm256_add_ps(one, e));
        __m256 g = _mm256_fmadd_ps(v, _mm256_sub_ps(one, s), one);
        g = _mm256_mul_ps(_mm256_mul_ps(s, g), _mm256_loadu_ps(dy + i));
        _mm256_storeu_ps(dx + i, _mm256_add_ps(_mm256_loadu_ps(dx + i), g));
    }
    if (i < n) ref::silu_bwd(x + i, dy + i, dx + i, n - i);
}

// Broadcast-A GEMM with a 32-wide C tile held in registers across k.
void gemm_nn(int64_t M, int64_t N, int64_t K, const float* A, const float* B, float* C, bool acc) {
    for (int64_t m = 0; m < M; ++m) {
        const float* a = A + m * K;
        float* c = C + m * N;
        int64_t j = 0;
        for (; j + 32 <= N; j += 32) {
            __m256 c0, c1, c2, c3;
            if (acc) {
                c0 = _mm256_loadu_ps(c + j);
                c1 = _mm256_loadu_ps(c + j + 8);
                c2 = _mm256_loadu_ps(c + j + 16);
                c3 = _mm256_loadu_ps(c + j + 24);
            } else {
                c0 = c1 = c2 = c3 = _mm256_setzero_ps();
            }
            for (int64_t k = 0; k < K; ++k) {
                __m256 av = _mm256_set1_ps(a[k]);
                const float* b = B + k * N + j;
                c0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b), c0);
                c1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b + 8), c1);
                c2 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b + 16), c2);
                c3 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b + 24), c3);
            }
            _mm256_storeu_ps(c + j, c0);
            _mm256_storeu_ps(c + j + 8, c1);
            _mm256_storeu_ps(c + j + 16, c2);
            _mm256_storeu_ps(c + j + 24, c3);
        }
        for (; j + 8 <= N; j += 8) {
            __m256 c0 = acc ? _mm256_loadu_ps(c + j) : _mm256_setzero_ps();
            for (int64_t k = 0; k < K; ++k)
                c0 = _mm256_fmadd_ps(_mm256_set1_ps(a[k]), _mm256_loadu_ps(B + k * N + j), c0);
            _mm256_storeu_ps(c + j, c0);
        }
        for (; j < N; ++j) {
            float v = acc ? c[j] : 0.0f;
            for (int64_t k = 0; k < K; ++k) v += a[k] * B[k * N + j];
            c[j] = v;
        }
    }
}

void gemm_nt(int64_t M, int64_t N, int64_t K, const float* A, const float* B, float* C, bool acc) {
    for (int64_t m = 0; m < M; ++m) {
        const float* a = A + m * K;
        float* c = C + m * N;
        for (int64_t j = 0; j < N; ++j) {
            float d = dot(a, B + j * K, K);
            c[j] = acc ? c[j] + d : d;
        }
    }
}

void gemm_tn(int64_t M, int64_t N, int64_t K, const float* A, int64_t lda, const float* B,
             float* C, bool acc) {
    for (int64_t m = 0; m < M; ++m) {
        float* c = C + m * N;
        int64_t j = 0;
        for (; j + 16 <= N; j += 16) {
            __m256 c0, c1;
            if (acc) {
                c0 = _mm256_loadu_ps(c + j);
                c1 = _mm256_loadu_ps(c + j + 8);
            } else {
                c0 = c1 = _mm256_setzero_ps();
            }
            for (int64_t k = 0; k < K; ++k) {
                __m256 av = _mm256_set1_ps(A[k * lda + m]);
                const float* b = B + k * N + j;
                c0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b), c0);
                c1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b + 8), c1);
            }
            _mm256_storeu_ps(c + j, c0);
            _mm256_storeu_ps(c + j + 8, c1);
        }
        for (; j < N; ++j) {
            float v = acc ? c[j] : 0.0f;
            for (int64_t k = 0; k < K; ++k) v += A[k * lda + m] * B[k * N + j];
            c[j] = v;
        }
    }
}

}  // namespace

const TableF32* avx2_table_impl() {
    static const TableF32 t = {
        "avx2", &add,   &sub,   &mul,  &scale, &axpy,     &saxpby, &dot,     &sum,
        &sumsq, &vmax,  &silu,  &silu_bwd, &vexp, &gemm_nn, &gemm_nt, &gemm_tn,
    };
    return &t;
}

}  // namespace lvc::kernels

#else

namespace lvc::kernels {
const TableF32* avx2_table_impl() { return nullptr; }
}  // namespace lvc::kernels

#endif
