#pragma once

#include <random>
#include <string>
#include <vector>

#include "core/param_store.hpp"
#include "edm/edm.hpp"
#include "model/config.hpp"

namespace lvc {

// Clips held as 8-bit frames to keep large datasets in memory; latents are
// encoded on the fly.
struct TrainClip {
    int height = 0, width = 0;
    std::vector<std::vector<uint8_t>> frames;    // packed [3*H*W]
    std::vector<std::vector<uint8_t>> sketches;  // [H*W] in {0,1}
};
using TrainDataset = std::vector<TrainClip>;

TrainClip pack_clip(const std::vector<Tensor<float>>& frames,
                    const std::vector<Tensor<float>>& sketches);
Tensor<float> clip_frame(const TrainClip& clip, int index);   // [3,H,W]
Tensor<float> clip_sketch(const TrainClip& clip, int index);  // [1,H,W]
TrainDataset dataset_from_dir(const std::string& root);

// One training sample: entry 0 is the reference (target x^0, cond x^0, own
// sketch), entries 1..N are the window frames conditioned on the repeated
// reference latent. sigma < 0 draws from the training noise distribution.
struct Batch {
    Tensor<float> clean;     // [N+1, CL, h, w]
    Tensor<float> cond;      // [N+1, CL, h, w]
    Tensor<float> sketches;  // [N+1, 1, H, W]
    Tensor<float> noise;     // same shape as clean
    Tensor<float> noised;    // clean + sigma * noise
    double sigma = 0.0;
    int clip_index = 0;
    int set_k = 0;
    int reference_frame = 0;  // 1-based frame index of the chosen reference
};

Batch assemble_batch(const TrainDataset& ds, int window, std::mt19937_64& rng,
                     const TrainingNoiseConfig& noise_cfg = {}, double sigma = -1.0);

struct TrainConfig {
    int steps = 500;
    int batch_size = 1;  // training sets per optimizer step
    double lr = 5e-5;
    double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    // "paper": ControlNet + spatial/temporal self-attention; "all": everything
    std::string groups = "paper";
    uint64_t seed = 0;
    int checkpoint_every = 0;  // 0: final only
    bool use_controlnet = true;
    bool per_sample_sigma = false;
    double sigma_data = 0.5;
    TrainingNoiseConfig noise;
    std::string out_checkpoint;  // empty: keep in memory only
    std::string loss_log;        // CSV "step,loss,sigma"; empty: no log

    void validate() const;
};

bool param_in_group(const std::string& name, const std::string& groups);

struct TrainResult {
    std::vector<double> losses;  // per step
    std::vector<double> sigmas;
};

// Adam on the selected parameter groups; throws NumericError with a
// diagnostic dump if the loss goes non-finite.
TrainResult train(const TrainConfig& tc, const DenoiserConfig& cfg, ParamStore<float>& params,
                  const TrainDataset& ds);

}  // namespace lvc
