#pragma once

#include <cstdint>

// Float32 hot loops behind a runtime-dispatched table: a scalar reference
// build and an AVX2+FMA build selected by cpuid (LVC_KERNELS=scalar|avx2
// overrides). Double precision always runs the scalar reference templates.
namespace lvc::kernels {

struct TableF32 {
    const char* name;
    void (*add)(const float*, const float*, float*, int64_t);
    void (*sub)(const float*, const float*, float*, int64_t);
    void (*mul)(const float*, const float*, float*, int64_t);
    void (*scale)(const float*, float, float*, int64_t);
    void (*axpy)(float, const float*, float*, int64_t);
    void (*saxpby)(float, const float*, float, const float*, float*, int64_t);
    float (*dot)(const float*, const float*, int64_t);
    float (*sum)(const float*, int64_t);
    float (*sumsq)(const float*, int64_t);
    float (*max)(const float*, int64_t);
    void (*silu)(const float*, float*, int64_t);
    void (*silu_bwd)(const float*, const float*, float*, int64_t);
    void (*vexp)(const float*, float*, int64_t);
    void (*gemm_nn)(int64_t, int64_t, int64_t, const float*, const float*, float*, bool);
    void (*gemm_nt)(int64_t, int64_t, int64_t, const float*, const float*, float*, bool);
    void (*gemm_tn)(int64_t, int64_t, int64_t, const float*, int64_t, const float*, float*, bool);
};

const TableF32& scalar_table();
const TableF32* avx2_table();  // nullptr when unsupported at build or run time
const TableF32& active();
void set_active(const TableF32* t);  // nullptr restores auto-detection

// GEMMs parallelized over rows of C via the shared pool; everything
// else in the table is single-call.
void pgemm_nn(int64_t M, int64_t N, int64_t K, const float* A, const float* B, float* C, bool acc);
void pgemm_nt(int64_t M, int64_t N, int64_t K, const float* A, const float* B, float* C, bool acc);
void pgemm_tn(int64_t M, int64_t N, int64_t K, const float* A, const float* B, float* C, bool acc);

void pgemm_nn(int64_t M, int64_t N, int64_t K, const double* A, const double* B, double* C, bool acc);
void pgemm_nt(int64_t M, int64_t N, int64_t K, const double* A, const double* B, double* C, bool acc);
void pgemm_tn(int64_t M, int64_t N, int64_t K, const double* A, const double* B, double* C, bool acc);

}  // namespace lvc::kernels
