#include "sampler/sampler.hpp"

#include <cstring>

#include "model/unet.hpp"
#include "vae/patch_codec.hpp"

namespace lvc {

namespace {

template <typename T>
void copy_row(Tensor<T>& dst, int64_t row, const Tensor<T>& src) {
    int64_t stride = dst.numel() / dst.dim(0);
    if (src.numel() != stride)
        throw ShapeError("blend cache entry size mismatch: " + shape_str(src.shape()));
    std::memcpy(dst.mutable_data().data() + row * stride, src.data().data(),
                sizeof(T) * static_cast<size_t>(stride));
}

template <typename T>
Tensor<T> take_row(const Tensor<T>& src, int64_t row, Shape row_shape) {
    int64_t stride = src.numel() / src.dim(0);
    std::vector<T> v(src.data().begin() + row * stride, src.data().begin() + (row + 1) * stride);
    return Tensor<T>::from_data(std::move(row_shape), std::move(v));
}

}  // namespace

template <typename T>
SegmentResult<T> sample_segment(const DenoiserBatchFn<T>& denoiser, int num_refs, int frames,
                                int64_t channels, int64_t h, int64_t w,
                                const NoiseSchedule& sched, const ModeSchedule& modes,
                                const BlendCache<T>* cache, int record_frames,
                                std::mt19937_64& rng, bool fixed_reference_noise) {
    sched.validate();
    validate_modes(modes, num_refs);
    if (static_cast<int>(modes.frame_modes.size()) != frames)
        throw ConfigError("sample_segment: mode schedule length vs frame count");
    bool blending = cache != nullptr && !cache->empty();
    if (blending) {
        if (modes.overlap != cache->frames)
            throw ConfigError("sample_segment: blending cache holds " +
                              std::to_string(cache->frames) +
                              " frames but the mode schedule engages " +
                              std::to_string(modes.overlap) +
                              "; blending and overlap attention must engage together");
        if (static_cast<int>(cache->per_step.size()) != sched.steps + 1)
            throw ConfigError("sample_segment: cache step count vs schedule T");
    } else if (modes.overlap > 0) {
        throw ConfigError("sample_segment: overlap mode schedule requires a blending cache");
    }
    if (record_frames < 0 || record_frames > frames)
        throw ConfigError("sample_segment: record_frames outside [0,N]");

    NoGradGuard ng;
    int64_t F = num_refs + frames;
    Tensor<T> x = Tensor<T>::randn({F, channels, h, w}, rng, sched.sigma_max);
    Tensor<T> ref_init;
    if (fixed_reference_noise) ref_init = x.detach();

    SegmentResult<T> res;
    res.cache.frames = record_frames;
    res.cache.per_step.resize(static_cast<size_t>(sched.steps) + 1);

    Shape row_shape{channels, h, w};
    for (int t = sched.steps; t >= 1; --t) {
        double sigma_t = sched.sigma_at(t);
        double sigma_prev = sched.sigma_at(t - 1);
        Tensor<T> d = denoiser(x, sigma_t);
        if (d.shape() != x.shape())
            throw ShapeError("sample_segment: denoiser output " + shape_str(d.shape()));
        if (blending)
            for (int i = 0; i < cache->frames; ++i)
                copy_row(d, num_refs + i, cache->per_step[t][i]);
        if (record_frames > 0) {
            auto& rec = res.cache.per_step[t];
            rec.reserve(record_frames);
            for (int i = 0; i < record_frames; ++i)
                rec.push_back(take_row(d, num_refs + frames - record_frames + i, row_shape));
        }
        x = euler_step(x, d, sigma_t, sigma_prev);
        if (fixed_reference_noise)
            for (int r = 0; r < num_refs; ++r) copy_row(x, r, take_row(ref_init, r, row_shape));
    }

    res.video_latents.reserve(frames);
    for (int i = 0; i < frames; ++i) res.video_latents.push_back(take_row(x, num_refs + i, row_shape));
    return res;
}

void LongSampleConfig::validate(int frames) const {
    schedule.validate();
    if (overlap < 0 || overlap >= frames)
        throw ConfigError("sampler: overlap must satisfy 0 <= o < N");
    if (alpha <= 0) throw ConfigError("sampler: alpha must be positive");
}

LongSampleResult sample_long(const ParamStore<float>& params, const DenoiserConfig& cfg,
                             const std::vector<Tensor<float>>& sketches,
                             const Tensor<float>& reference_frame,
                             const Tensor<float>& reference_sketch, const LongSampleConfig& scfg) {
    NoGradGuard ng;
    cfg.validate();
    int total = static_cast<int>(sketches.size());
    int frames = cfg.frames;
    scfg.validate(frames);
    if (total < 1) throw ConfigError("sample_long: no sketches");
    if (reference_frame.rank() != 3 || reference_frame.dim(0) != 3)
        throw ShapeError("sample_long: reference frame must be [3,H,W]");
    int64_t fh = reference_frame.dim(1), fw = reference_frame.dim(2);
    for (const auto& s : sketches)
        if (s.shape() != Shape{1, fh, fw})
            throw ShapeError("sample_long: sketch shape " + shape_str(s.shape()) +
                             " vs reference " + shape_str(reference_frame.shape()));
    if (reference_sketch.shape() != Shape{1, fh, fw})
        throw ShapeError("sample_long: reference sketch shape mismatch");

    bool schemes = scfg.ablation == SampleAblation::None ||
                   scfg.ablation == SampleAblation::NoRefAttention;
    SegmentPlan plan = plan_segments(total, frames, scfg.overlap);
    if (schemes && plan.segments.size() > 1 &&
        (scfg.shift < 1 || scfg.shift > scfg.overlap))
        throw ConfigError("sample_long: shift must be in [1, overlap] for multi-segment runs");

    int64_t h = fh / vae::kPatch, w = fw / vae::kPatch;
    int64_t cl = cfg.latent_channels;
    Tensor<float> first_ref_latent = vae::encode(reference_frame);

    LongSampleResult out;
    out.frames.resize(static_cast<size_t>(total));
    out.latents.resize(static_cast<size_t>(total));

    std::mt19937_64 rng(scfg.seed);
    BlendCache<float> cache;
    Tensor<float> ref_latent = first_ref_latent;
    Tensor<float> ref_sketch = reference_sketch;

    for (size_t si = 0; si < plan.segments.size(); ++si) {
        const Segment& seg = plan.segments[si];
        int n = static_cast<int>(si) + 1;
        int o_eff = schemes ? seg.overlap_prev : 0;

        ModeSchedule modes = schemes && n > 1
                                 ? segment_modes(n, frames, o_eff, scfg.shift, scfg.alpha)
                                 : standard_modes(frames);
        modes.amplify_scales_keys = scfg.amplify_scales_keys;
        if (scfg.ablation == SampleAblation::NoRefAttention) modes.reference_attention = false;
        int num_refs = 1 + modes.overlap;

        // conditioning rows: reference bundle then C = [x^0] x N
        std::vector<Tensor<float>> cond_rows, sketch_rows;
        cond_rows.push_back(reshape(ref_latent, {1, cl, h, w}));
        sketch_rows.push_back(reshape(ref_sketch, {1, 1, fh, fw}));
        for (int i = 1; i <= modes.overlap; ++i) {
            int global = seg.start + i - 1;  // overlapped frame, finalized earlier
            cond_rows.push_back(reshape(out.latents[global - 1], {1, cl, h, w}));
            sketch_rows.push_back(reshape(sketches[global - 1], {1, 1, fh, fw}));
        }
        for (int i = 0; i < frames; ++i) {
            cond_rows.push_back(reshape(ref_latent, {1, cl, h, w}));
            sketch_rows.push_back(reshape(sketches[seg.start - 1 + i], {1, 1, fh, fw}));
        }
        Tensor<float> cond = concat<float>(cond_rows, 0);
        Tensor<float> sk = concat<float>(sketch_rows, 0);

        DenoiserBatchFn<float> denoiser = [&](const Tensor<float>& noised, double sigma) {
            PrecondCoeffs pc = precond(sigma, scfg.schedule.sigma_data);
            Tensor<float> x_in =
                concat<float>({cond, scale(noised, static_cast<float>(pc.c_in))}, 1);
            Tensor<float> u = unet_forward(params, cfg, x_in, sk, static_cast<float>(pc.c_noise),
                                           modes, num_refs, scfg.use_controlnet);
            return add(scale(noised, static_cast<float>(pc.c_skip)),
                       scale(u, static_cast<float>(pc.c_out)));
        };

        int record = 0;
        if (schemes && si + 1 < plan.segments.size())
            record = plan.segments[si + 1].overlap_prev;
        SegmentResult<float> res = sample_segment(
            denoiser, num_refs, frames, cl, h, w, scfg.schedule, modes,
            (schemes && n > 1) ? &cache : nullptr, record, rng, scfg.fixed_reference_noise);
        cache = std::move(res.cache);
        out.denoiser_evals += static_cast<int64_t>(num_refs + frames) * scfg.schedule.steps;

        // overlapped frames keep the earlier segment's output (blending makes
        // them bit-identical in latent space anyway)
        for (int i = seg.overlap_prev; i < frames; ++i) {
            int global = seg.start + i;
            out.latents[global - 1] = res.video_latents[i];
            out.frames[global - 1] = vae::decode(res.video_latents[i]);
        }

        if (scfg.ablation == SampleAblation::PrevSample) {
            ref_latent = vae::encode(out.frames[seg.end - 1]);
            ref_sketch = sketches[seg.end - 1];
        }
    }
    return out;
}

template struct BlendCache<float>;
template struct BlendCache<double>;
template SegmentResult<float> sample_segment<float>(const DenoiserBatchFn<float>&, int, int,
                                                    int64_t, int64_t, int64_t,
                                                    const NoiseSchedule&, const ModeSchedule&,
                                                    const BlendCache<float>*, int,
                                                    std::mt19937_64&, bool);
template SegmentResult<double> sample_segment<double>(const DenoiserBatchFn<double>&, int, int,
                                                      int64_t, int64_t, int64_t,
                                                      const NoiseSchedule&, const ModeSchedule&,
                                                      const BlendCache<double>*, int,
                                                      std::mt19937_64&, bool);

}  // namespace lvc
