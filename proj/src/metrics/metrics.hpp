#pragma once

#include <vector>

#include "core/tensor.hpp"

namespace lvc::metrics {

// Bilinear gather at p + flow(p); out-of-bounds samples clamp to the border.
Tensor<float> warp(const Tensor<float>& frame, const Tensor<float>& flow);

// Bilinear resize (half-pixel centers). Used to bring frames, sketches and
// flows to the 256x256 evaluation grid; flow displacements are rescaled.
Tensor<float> resize_bilinear(const Tensor<float>& img, int64_t out_h, int64_t out_w);
Tensor<float> resize_flow(const Tensor<float>& flow, int64_t out_h, int64_t out_w);

struct TcReport {
    double value = 0.0;
    int pairs = 0;
    int guarded = 0;  // pairs where a denominator hit the epsilon guard
};

// Mean over t of [||warp(g_t)-g_{t+1}|| / ||g_{t+1}||] / [||warp(o_t)-o_{t+1}|| / ||o_{t+1}||],
// frames resized to eval_size first, denominators guarded by 1e-8.
TcReport tc(const std::vector<Tensor<float>>& generated,
            const std::vector<Tensor<float>>& original,
            const std::vector<Tensor<float>>& flows, int64_t eval_size = 256);

// Exact Euclidean distance transform (two-pass lower-envelope on squared
// distances). mask is [1,H,W] with line pixels > 0.5; throws on empty masks.
std::vector<double> edt(const Tensor<float>& mask);

struct EdmdReport {
    double value = 0.0;
    int frames = 0;
    int skipped = 0;  // frames with an empty sketch on either side
};

// Mean over frames of RMSE between the distance maps of the two sketch
// sequences, both nearest-upsampled to eval_size beforehand.
EdmdReport edmd(const std::vector<Tensor<float>>& generated_sketches,
                const std::vector<Tensor<float>>& input_sketches, int64_t eval_size = 256);

// -10*log10(MSE) with peak 1; +inf for identical inputs.
double psnr(const Tensor<float>& a, const Tensor<float>& b);

// 11x11 Gaussian window sigma=1.5, K1=0.01, K2=0.03, averaged over channels
// and the valid (fully covered) window positions.
double ssim(const Tensor<float>& a, const Tensor<float>& b);

}  // namespace lvc::metrics
