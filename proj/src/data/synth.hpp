#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/tensor.hpp"

namespace lvc::data {

// Flat-colored shapes on a flat background following piecewise-linear
// trajectories (translation plus optional slow scaling), with exact backward
// flows derived from the trajectory math. flow_valid marks pixels where the
// warp identity warp(frame_t, flow)(p) == frame_{t+1}(p) is guaranteed
// (source point surrounded by the same entity, no occlusion or border).
struct SyntheticClip {
    int height = 0, width = 0;
    std::vector<Tensor<float>> frames;    // [3,H,W] in [0,1]
    std::vector<Tensor<float>> flows;     // L-1 backward flows F_{t+1->t} [2,H,W], (dx,dy)
    std::vector<Tensor<float>> sketches;  // [1,H,W] in {0,1}
    std::vector<std::array<float, 3>> palette;  // index 0 = background, then shapes
    std::vector<std::vector<int16_t>> id_maps;  // per frame, topmost shape id, -1 = background
    std::vector<std::vector<uint8_t>> flow_valid;  // per flow, H*W
};

struct ClipGenConfig {
    int length = 16;
    int height = 64;
    int width = 64;
    int shapes = 3;
    double motion_scale = 2.0;  // px/frame velocity bound
    bool allow_scale = true;
    // Controlled-motion mode: every shape translates at exactly this velocity
    // (px/frame), no bends, swaps or scaling.
    bool use_fixed_velocity = false;
    double fixed_vx = 0.0, fixed_vy = 0.0;
};

SyntheticClip gen_clip(uint64_t seed, const ClipGenConfig& cfg);

// Sobel gradient magnitude on luminance (threshold 0.15), thinned to
// one-pixel lines by non-maximum suppression along the dominant gradient
// axis. Output is 1.0 on lines, 0.0 elsewhere.
Tensor<float> extract_sketch(const Tensor<float>& frame);

}  // namespace lvc::data
