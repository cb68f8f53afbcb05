#pragma once

#include "core/tensor.hpp"

namespace lvc::vae {

inline constexpr int kPatch = 4;
inline constexpr int kLatentChannels = 48;  // 4*4*3

// Lossless frame <-> latent map standing in for a learned autoencoder:
// space-to-depth of 4x4 RGB patches into 48 channels followed by the fixed
// affine (v - 0.5) * 2. The affine round-trips bit-exactly for pixel values
// in {0} U [0.25, 1] (float density below 0.25 exceeds what the [-1,1]
// latent range can hold); generated palettes stay inside that set.
Tensor<float> encode(const Tensor<float>& frame);   // [3,H,W] -> [48,H/4,W/4]
Tensor<float> decode(const Tensor<float>& latent);  // [48,h,w] -> [3,4h,4w]

}  // namespace lvc::vae
