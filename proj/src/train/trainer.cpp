#include "train/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include "data/curate.hpp"
#include "data/dataset_io.hpp"
#include "model/checkpoint.hpp"
#include "model/unet.hpp"
#include "vae/patch_codec.hpp"

namespace lvc {

namespace {
uint8_t to_byte(float v) {
    float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<uint8_t>(std::lround(c * 255.0f));
}
}  // namespace

TrainClip pack_clip(const std::vector<Tensor<float>>& frames,
                    const std::vector<Tensor<float>>& sketches) {
    if (frames.empty() || frames.size() != sketches.size())
        throw ConfigError("pack_clip: frames/sketches mismatch");
    TrainClip clip;
    clip.height = static_cast<int>(frames[0].dim(1));
    clip.width = static_cast<int>(frames[0].dim(2));
    for (size_t i = 0; i < frames.size(); ++i) {
        std::vector<uint8_t> f(frames[i].numel());
        for (int64_t j = 0; j < frames[i].numel(); ++j) f[j] = to_byte(frames[i].data()[j]);
        clip.frames.push_back(std::move(f));
        std::vector<uint8_t> s(sketches[i].numel());
        for (int64_t j = 0; j < sketches[i].numel(); ++j)
            s[j] = sketches[i].data()[j] > 0.5f ? 1 : 0;
        clip.sketches.push_back(std::move(s));
    }
    return clip;
}

Tensor<float> clip_frame(const TrainClip& clip, int index) {
    const auto& raw = clip.frames.at(index);
    std::vector<float> v(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) v[i] = static_cast<float>(raw[i]) / 255.0f;
    return Tensor<float>::from_data({3, clip.height, clip.width}, std::move(v));
}

Tensor<float> clip_sketch(const TrainClip& clip, int index) {
    const auto& raw = clip.sketches.at(index);
    std::vector<float> v(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) v[i] = raw[i] ? 1.0f : 0.0f;
    return Tensor<float>::from_data({1, clip.height, clip.width}, std::move(v));
}

TrainDataset dataset_from_dir(const std::string& root) {
    TrainDataset ds;
    for (const std::string& dir : data::list_clip_dirs(root)) {
        data::LoadedClip lc = data::read_clip_dir(dir, /*need_flows=*/false);
        if (lc.sketches.size() != lc.frames.size())
            throw IoError(dir + ": clip has no sketches");
        ds.push_back(pack_clip(lc.frames, lc.sketches));
    }
    if (ds.empty()) throw IoError("no clips under " + root);
    return ds;
}

Batch assemble_batch(const TrainDataset& ds, int window, std::mt19937_64& rng,
                     const TrainingNoiseConfig& noise_cfg, double sigma) {
    if (ds.empty()) throw ConfigError("assemble_batch: empty dataset");
    // clips eligible for the window length
    std::vector<int> eligible;
    for (size_t i = 0; i < ds.size(); ++i)
        if (static_cast<int>(ds[i].frames.size()) > window) eligible.push_back(static_cast<int>(i));
    if (eligible.empty())
        throw ConfigError("assemble_batch: no clip longer than the window (" +
                          std::to_string(window) + ")");
    int ci = eligible[rng() % eligible.size()];
    const TrainClip& clip = ds[ci];
    auto sets = data::build_training_sets(static_cast<int>(clip.frames.size()), window);
    const data::TrainingSet& set = sets[rng() % sets.size()];
    int ref = 1 + static_cast<int>(rng() % set.candidate_count);  // uniform over candidates

    Batch b;
    b.clip_index = ci;
    b.set_k = set.k;
    b.reference_frame = ref;
    b.sigma = sigma >= 0 ? sigma : sample_training_sigma(rng, noise_cfg);

    Tensor<float> ref_latent = vae::encode(clip_frame(clip, ref - 1));
    std::vector<Tensor<float>> clean_rows, cond_rows, sketch_rows;
    int64_t cl = ref_latent.dim(0), h = ref_latent.dim(1), w = ref_latent.dim(2);
    clean_rows.push_back(reshape(ref_latent, {1, cl, h, w}));
    cond_rows.push_back(reshape(ref_latent, {1, cl, h, w}));
    sketch_rows.push_back(reshape(clip_sketch(clip, ref - 1), {1, 1, clip.height, clip.width}));
    for (int i = 0; i < window; ++i) {
        int frame = set.target_begin + i;  // 0-based
        Tensor<float> lat = vae::encode(clip_frame(clip, frame));
        clean_rows.push_back(reshape(lat, {1, cl, h, w}));
        cond_rows.push_back(reshape(ref_latent, {1, cl, h, w}));
        sketch_rows.push_back(reshape(clip_sketch(clip, frame), {1, 1, clip.height, clip.width}));
    }
    b.clean = concat<float>(clean_rows, 0);
    b.cond = concat<float>(cond_rows, 0);
    b.sketches = concat<float>(sketch_rows, 0);
    b.noise = Tensor<float>::randn(b.clean.shape(), rng);
    b.noised = add(b.clean, scale(b.noise, static_cast<float>(b.sigma)));
    return b;
}

void TrainConfig::validate() const {
    if (steps < 1 || batch_size < 1 || lr <= 0 || beta1 <= 0 || beta1 >= 1 || beta2 <= 0 ||
        beta2 >= 1 || adam_eps <= 0 || sigma_data <= 0)
        throw ConfigError("train config: hyperparameters must be positive (betas in (0,1))");
    if (groups != "paper" && groups != "all")
        throw ConfigError("train config: groups must be 'paper' or 'all'");
}

bool param_in_group(const std::string& name, const std::string& groups) {
    if (groups == "all") return true;
    // the paper grouping: the whole ControlNet branch plus every spatial and
    // temporal self-attention layer of the base net
    return name.rfind("ctrl.", 0) == 0 || name.find(".sattn.") != std::string::npos ||
           name.find(".tattn.") != std::string::npos;
}

namespace {

struct Adam {
    double lr, b1, b2, eps;
    int64_t t = 0;
    std::map<std::string, std::pair<std::vector<float>, std::vector<float>>> state;

    void step(ParamStore<float>& ps, const std::set<std::string>& trainable) {
        ++t;
        double bc1 = 1.0 - std::pow(b1, static_cast<double>(t));
        double bc2 = 1.0 - std::pow(b2, static_cast<double>(t));
        for (auto& [name, p] : ps) {
            if (!trainable.count(name) || p.grad().empty()) continue;
            auto& [m, v] = state[name];
            if (m.empty()) {
                m.assign(p.numel(), 0.0f);
                v.assign(p.numel(), 0.0f);
            }
            auto w = p.mutable_data();
            auto g = p.grad();
            for (int64_t i = 0; i < p.numel(); ++i) {
                double gi = g[i];
                m[i] = static_cast<float>(b1 * m[i] + (1.0 - b1) * gi);
                v[i] = static_cast<float>(b2 * v[i] + (1.0 - b2) * gi * gi);
                double mh = m[i] / bc1, vh = v[i] / bc2;
                w[i] -= static_cast<float>(lr * mh / (std::sqrt(vh) + eps));
            }
        }
    }
};

}  // namespace

TrainResult train(const TrainConfig& tc, const DenoiserConfig& cfg, ParamStore<float>& params,
                  const TrainDataset& ds) {
    tc.validate();
    cfg.validate();
    int window = cfg.frames;

    std::set<std::string> trainable;
    for (auto& [name, p] : params) {
        bool on = param_in_group(name, tc.groups);
        p.set_requires_grad(on);
        if (on) trainable.insert(name);
    }

    Adam adam{tc.lr, tc.beta1, tc.beta2, tc.adam_eps};
    std::mt19937_64 rng(tc.seed);
    std::ofstream log;
    if (!tc.loss_log.empty()) {
        log.open(tc.loss_log);
        if (!log) throw IoError("cannot open loss log: " + tc.loss_log);
        log << "step,loss,sigma\n";
    }

    ModeSchedule modes = standard_modes(window);
    TrainResult result;
    for (int step = 1; step <= tc.steps; ++step) {
        params.zero_grad();
        double shared_sigma = tc.per_sample_sigma ? -1.0 : sample_training_sigma(rng, tc.noise);
        double step_loss = 0.0;
        double last_sigma = shared_sigma;
        for (int b = 0; b < tc.batch_size; ++b) {
            Batch batch = assemble_batch(ds, window, rng, tc.noise, shared_sigma);
            last_sigma = batch.sigma;
            auto denoiser = [&](const Tensor<float>& noised, double s, int) {
                auto unet = [&](const Tensor<float>& xin, float cn, int) {
                    return unet_forward(params, cfg, concat<float>({batch.cond, xin}, 1),
                                        batch.sketches, cn, modes, 1, tc.use_controlnet);
                };
                return denoise(unet, noised, s, 0, tc.sigma_data);
            };
            Tensor<float> loss =
                scale(dsm_loss(denoiser, batch.clean, 0, batch.sigma, batch.noise, tc.sigma_data),
                      1.0f / static_cast<float>(tc.batch_size));
            double lv = loss.item();
            if (!std::isfinite(lv)) {
                std::cerr << "train: non-finite loss at step " << step << " (sigma " << batch.sigma
                          << ", clip " << batch.clip_index << ", set " << batch.set_k << ")\n";
                for (const auto& [name, p] : params) {
                    float mx = 0;
                    for (float x : p.data()) mx = std::max(mx, std::abs(x));
                    if (!std::isfinite(mx) || mx > 1e6)
                        std::cerr << "  suspicious parameter " << name << " max|w|=" << mx << "\n";
                }
                throw NumericError("training aborted on non-finite loss at step " +
                                   std::to_string(step));
            }
            step_loss += lv;
            loss.backward();
        }
        adam.step(params, trainable);
        result.losses.push_back(step_loss);
        result.sigmas.push_back(last_sigma);
        if (log) log << step << "," << step_loss << "," << last_sigma << "\n";
        if (!tc.out_checkpoint.empty() && tc.checkpoint_every > 0 &&
            step % tc.checkpoint_every == 0)
            save_checkpoint(tc.out_checkpoint, params, cfg);
    }
    if (!tc.out_checkpoint.empty()) save_checkpoint(tc.out_checkpoint, params, cfg);
    return result;
}

}  // namespace lvc
