#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sampler/sampler.hpp"

namespace lvc::eval {

// Ground-truth clip material needed to score one sampled configuration.
struct ClipMaterial {
    std::vector<Tensor<float>> frames;    // originals [3,H,W]
    std::vector<Tensor<float>> sketches;  // [1,H,W]
    std::vector<Tensor<float>> flows;     // L-1 backward flows
    std::vector<std::array<float, 3>> palette;  // [0] background, then shapes
};

// Mean absolute error between generated pixels and each shape's palette
// color, masked to pixels where the original frame shows that exact color.
double shape_color_error(const std::vector<Tensor<float>>& generated,
                         const std::vector<Tensor<float>>& original,
                         const std::vector<std::array<float, 3>>& palette);

// Mean flow magnitude over moving pixels, rescaled to eval_size (matches the
// motion statistics convention of the evaluation grid).
double mean_motion(const std::vector<Tensor<float>>& flows, int64_t native_w,
                   int64_t eval_size = 256);

struct ConfigScores {
    double tc = 0.0;
    double edmd = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
    double color_err = 0.0;
    int64_t denoiser_evals = 0;
    double wall_seconds = 0.0;
};

// Samples the clip with one configuration and scores it against the ground
// truth. The reference frame/sketch are the clip's first frame.
ConfigScores run_and_score(const ParamStore<float>& params, const DenoiserConfig& cfg,
                           const ClipMaterial& clip, const LongSampleConfig& scfg,
                           int64_t eval_size = 256);

struct AblationRow {
    std::string name;
    ConfigScores mean;                 // aggregate means over clips
    std::vector<ConfigScores> per_clip;
};

// Full method plus the three ablations over a set of clips.
std::vector<AblationRow> ablation_table(const ParamStore<float>& params,
                                        const DenoiserConfig& cfg,
                                        const std::vector<ClipMaterial>& clips,
                                        const LongSampleConfig& base);

struct OverlapTiming {
    int overlap = 0;
    double seconds = 0.0;
    double ratio_vs_no_overlap = 1.0;
    int64_t denoiser_evals = 0;
};

// Inference-time sweep over o in {0,2,4,6,8,10} on the given clips.
std::vector<OverlapTiming> overlap_sweep(const ParamStore<float>& params,
                                         const DenoiserConfig& cfg,
                                         const std::vector<ClipMaterial>& clips,
                                         const LongSampleConfig& base,
                                         const std::vector<int>& overlaps = {0, 2, 4, 6, 8, 10});

}  // namespace lvc::eval
