#pragma once

#include <random>

#include "core/param_store.hpp"
#include "core/tensor.hpp"
#include "model/attention_modes.hpp"
#include "model/config.hpp"

namespace lvc {

// Initializes base U-Net weights (Kaiming-uniform convolutions/linears),
// clones the encoder into the ControlNet branch bit-exactly, and zero-
// initializes the sketch encoders plus the ControlNet output projections.
template <typename T>
ParamStore<T> build_params(const DenoiserConfig& cfg, std::mt19937_64& rng);

// Parameter-name prefixes of the cloned encoder (relative, e.g. "stem").
const std::vector<std::string>& encoder_prefixes();

// One denoiser evaluation over R reference entries followed by N video
// frames. x rows are channel concatenations [cond_latent, noised_latent]
// (the caller applies c_in to the noised half), sketches are at frame
// resolution (4x the latent grid). Reference entries skip every temporal
// layer; spatial self-attention of video frames follows `modes`.
template <typename T>
Tensor<T> unet_forward(const ParamStore<T>& params, const DenoiserConfig& cfg, const Tensor<T>& x,
                       const Tensor<T>& sketches, T c_noise, const ModeSchedule& modes,
                       int num_refs, bool use_controlnet);

}  // namespace lvc
