#pragma once

#include <vector>

#include "core/tensor.hpp"

namespace lvc {

struct Segment {
    int start = 1;         // 1-based inclusive frame range
    int end = 1;
    int overlap_prev = 0;  // frames shared with the previous segment
};

struct SegmentPlan {
    int total = 0;   // L
    int frames = 0;  // N
    int overlap = 0; // o
    std::vector<Segment> segments;
};

// Segment n covers frames (n-1)(N-o)+1 .. (n-1)(N-o)+N. When (L-o) is not
// divisible by (N-o) the final segment is right-aligned to end at L and its
// overlap with the previous segment exceeds o.
SegmentPlan plan_segments(int total, int frames, int overlap);

// x_{t-1} = (sigma_prev/sigma_t) x_t + ((sigma_t - sigma_prev)/sigma_t) denoised.
// sigma_prev == 0 returns the denoised prediction exactly.
template <typename T>
Tensor<T> euler_step(const Tensor<T>& x, const Tensor<T>& denoised, double sigma_t,
                     double sigma_prev);

}  // namespace lvc
