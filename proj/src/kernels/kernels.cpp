#include "kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "common/parallel.hpp"
#include "kernels/ref_kernels.hpp"

namespace lvc::kernels {

const TableF32* avx2_table_impl();  // kernels_avx2.cpp

const TableF32* avx2_table() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return avx2_table_impl();
#endif
    return nullptr;
}

namespace {

const TableF32* pick_default() {
    if (const char* env = std::getenv("LVC_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_table();
        if (std::strcmp(env, "avx2") == 0 && avx2_table()) return avx2_table();
    }
    if (const TableF32* t = avx2_table()) return t;
    return &scalar_table();
}

std::atomic<const TableF32*> g_active{nullptr};

}  // namespace

const TableF32& active() {
    const TableF32* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        t = pick_default();
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

void set_active(const TableF32* t) {
    g_active.store(t ? t : pick_default(), std::memory_order_release);
}

namespace {
// Row-parallel wrappers. Each output row is written by exactly one thread,
// so results do not depend on the partitioning.
template <typename F>
void rows_parallel(int64_t M, int64_t work_per_row, F f) {
    if (M > 1 && M * work_per_row > 16384) {
        parallel_for(M, [&](int64_t b, int64_t e) { f(b, e); });
    } else {
        f(0, M);
    }
}
}  // namespace

void pgemm_nn(int64_t M, int64_t N, int64_t K, const float* A, const float* B, float* C, bool acc) {
    const TableF32& t = active();
    rows_parallel(M, N * K, [&](int64_t b, int64_t e) {
        t.gemm_nn(e - b, N, K, A + b * K, B, C + b * N, acc);
    });
}

void pgemm_nt(int64_t M, int64_t N, int64_t K, const float* A, const float* B, float* C, bool acc) {
    const TableF32& t = active();
    rows_parallel(M, N * K, [&](int64_t b, int64_t e) {
        t.gemm_nt(e - b, N, K, A + b * K, B, C + b * N, acc);
    });
}

void pgemm_tn(int64_t M, int64_t N, int64_t K, const float* A, const float* B, float* C, bool acc) {
    const TableF32& t = active();
    rows_parallel(M, N * K, [&](int64_t b, int64_t e) {
        // A is [K,M]; the row offset moves along M (columns of A).
        t.gemm_tn(e - b, N, K, A + b, M, B, C + b * N, acc);
    });
}

void pgemm_nn(int64_t M, int64_t N, int64_t K, const double* A, const double* B, double* C, bool acc) {
    rows_parallel(M, N * K, [&](int64_t b, int64_t e) {
        ref::gemm_nn(e - b, N, K, A + b * K, B, C + b * N, acc);
    });
}

void pgemm_nt(int64_t M, int64_t N, int64_t K, const double* A, const double* B, double* C, bool acc) {
    rows_parallel(M, N * K, [&](int64_t b, int64_t e) {
        ref::gemm_nt(e - b, N, K, A + b * K, B, C + b * N, acc);
    });
}

void pgemm_tn(int64_t M, int64_t N, int64_t K, const double* A, const double* B, double* C, bool acc) {
    rows_parallel(M, N * K, [&](int64_t b, int64_t e) {
        ref::gemm_tn(e - b, N, K, A + b, M, B, C + b * N, acc);
    });
}

}  // namespace lvc::kernels
