#include "sampler/segmenting.hpp"

#include "kernels/kernels.hpp"
#include "kernels/ref_kernels.hpp"

namespace lvc {

SegmentPlan plan_segments(int total, int frames, int overlap) {
    if (frames < 2) throw ConfigError("plan_segments: N must be >= 2");
    if (overlap < 0 || overlap >= frames)
        throw ConfigError("plan_segments: overlap must satisfy 0 <= o < N");
    if (total < frames)
        throw ConfigError("plan_segments: total frames " + std::to_string(total) +
                          " < segment length " + std::to_string(frames) +
                          "; pad the sketch sequence to at least N frames");
    SegmentPlan plan;
    plan.total = total;
    plan.frames = frames;
    plan.overlap = overlap;
    int step = frames - overlap;
    for (int n = 1;; ++n) {
        int start = (n - 1) * step + 1;
        int end = start + frames - 1;
        if (end > total) break;
        plan.segments.push_back({start, end, n == 1 ? 0 : overlap});
        if (end == total) return plan;
    }
    // right-aligned remainder
    int start = total - frames + 1;
    int prev_end = plan.segments.back().end;
    plan.segments.push_back({start, total, prev_end - start + 1});
    return plan;
}

template <typename T>
Tensor<T> euler_step(const Tensor<T>& x, const Tensor<T>& denoised, double sigma_t,
                     double sigma_prev) {
    if (x.shape() != denoised.shape())
        throw ShapeError("euler_step: " + shape_str(x.shape()) + " vs " +
                         shape_str(denoised.shape()));
    if (sigma_t <= 0) throw NumericError("euler_step: sigma_t must be > 0");
    if (sigma_prev < 0 || sigma_prev >= sigma_t)
        throw NumericError("euler_step: need sigma_t > sigma_prev >= 0");
    if (sigma_prev == 0.0) return denoised.detach();
    Tensor<T> out = Tensor<T>::zeros(x.shape());
    T a = static_cast<T>(sigma_prev / sigma_t);
    T b = static_cast<T>((sigma_t - sigma_prev) / sigma_t);
    if constexpr (std::is_same_v<T, float>) {
        kernels::active().saxpby(a, x.data().data(), b, denoised.data().data(),
                                 out.mutable_data().data(), x.numel());
    } else {
        kernels::ref::saxpby(a, x.data().data(), b, denoised.data().data(),
                             out.mutable_data().data(), x.numel());
    }
    return out;
}

template Tensor<float> euler_step<float>(const Tensor<float>&, const Tensor<float>&, double,
                                         double);
template Tensor<double> euler_step<double>(const Tensor<double>&, const Tensor<double>&, double,
                                           double);

}  // namespace lvc
