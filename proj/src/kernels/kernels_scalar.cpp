#include "kernels/kernels.hpp"
#include "kernels/ref_kernels.hpp"

namespace lvc::kernels {

const TableF32& scalar_table() {
    static const TableF32 t = {
        "scalar",
        &ref::add<float>,
        &ref::sub<float>,
        &ref::mul<float>,
        &ref::scale<float>,
        &ref::axpy<float>,
        &ref::saxpby<float>,
        &ref::dot<float>,
        &ref::sum<float>,
        &ref::sumsq<float>,
        &ref::max<float>,
        &ref::silu<float>,
        &ref::silu_bwd<float>,
        &ref::vexp<float>,
        &ref::gemm_nn<float>,
        &ref::gemm_nt<float>,
        &ref::gemm_tn<float>,
    };
    return t;
}

}  // namespace lvc::kernels
