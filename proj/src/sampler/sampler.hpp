#pragma once

#include <functional>
#include <random>
#include <vector>

#include "core/param_store.hpp"
#include "edm/edm.hpp"
#include "model/attention_modes.hpp"
#include "model/config.hpp"
#include "sampler/segmenting.hpp"

namespace lvc {

// Denoiser outputs (predicted clean latents) of the trailing frames of the
// previously sampled segment, per timestep t in [1,T].
template <typename T>
struct BlendCache {
    int frames = 0;
    std::vector<std::vector<Tensor<T>>> per_step;  // [T+1]; index t holds `frames` latents

    bool empty() const { return frames == 0; }
};

template <typename T>
using DenoiserBatchFn = std::function<Tensor<T>(const Tensor<T>&, double)>;

template <typename T>
struct SegmentResult {
    std::vector<Tensor<T>> video_latents;  // N final latents [CL,h,w]
    BlendCache<T> cache;                   // recorded for the next segment
};

// One segment of sequential sampling: X_T ~ N(0, sigma_max^2), then for
// t=T..1 evaluate the denoiser on all R+N entries, overwrite the first
// `cache->frames` video outputs with cache[t] (Overlapped Blending), record
// the trailing `record_frames` outputs, and Euler-step every entry.
template <typename T>
SegmentResult<T> sample_segment(const DenoiserBatchFn<T>& denoiser, int num_refs, int frames,
                                int64_t channels, int64_t h, int64_t w,
                                const NoiseSchedule& sched, const ModeSchedule& modes,
                                const BlendCache<T>* cache, int record_frames,
                                std::mt19937_64& rng, bool fixed_reference_noise = false);

enum class SampleAblation { None, NoRefAttention, NoSchemes, PrevSample };

struct LongSampleConfig {
    NoiseSchedule schedule;
    int overlap = 4;
    int shift = 3;
    double alpha = 10.0;
    uint64_t seed = 0;
    bool use_controlnet = true;
    bool amplify_scales_keys = false;
    bool fixed_reference_noise = false;
    SampleAblation ablation = SampleAblation::None;

    void validate(int frames) const;
};

struct LongSampleResult {
    std::vector<Tensor<float>> frames;   // L decoded RGB frames [3,H,W]
    std::vector<Tensor<float>> latents;  // L final latents [CL,h,w]
    int64_t denoiser_evals = 0;          // entry-evaluations, for timing reports
};

// Sequential long-video sampling: segment 1 runs Standard attention with the
// global reference; later segments add the o previous overlapped results to
// the reference bundle and engage Overlapped Blending + Prev-Reference
// Attention. The channel-concat conditioning always uses the first reference
// frame (PrevSample ablation re-encodes the last decoded frame instead).
LongSampleResult sample_long(const ParamStore<float>& params, const DenoiserConfig& cfg,
                             const std::vector<Tensor<float>>& sketches,
                             const Tensor<float>& reference_frame,
                             const Tensor<float>& reference_sketch, const LongSampleConfig& scfg);

}  // namespace lvc
