#include "eval/ablation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "data/synth.hpp"
#include "metrics/metrics.hpp"

namespace lvc::eval {

double shape_color_error(const std::vector<Tensor<float>>& generated,
                         const std::vector<Tensor<float>>& original,
                         const std::vector<std::array<float, 3>>& palette) {
    if (generated.size() != original.size() || generated.empty())
        throw ConfigError("shape_color_error: sequence length mismatch");
    double acc = 0.0;
    int64_t count = 0;
    for (size_t t = 0; t < generated.size(); ++t) {
        const auto& g = generated[t];
        const auto& o = original[t];
        if (g.shape() != o.shape()) throw ShapeError("shape_color_error: frame shape mismatch");
        int64_t plane = o.dim(1) * o.dim(2);
        auto od = o.data();
        auto gd = g.data();
        for (size_t k = 1; k < palette.size(); ++k) {
            const auto& c = palette[k];
            for (int64_t p = 0; p < plane; ++p) {
                if (od[p] != c[0] || od[plane + p] != c[1] || od[2 * plane + p] != c[2]) continue;
                for (int ch = 0; ch < 3; ++ch) {
                    acc += std::abs(static_cast<double>(gd[ch * plane + p]) - c[ch]);
                    ++count;
                }
            }
        }
    }
    return count > 0 ? acc / static_cast<double>(count) : 0.0;
}

double mean_motion(const std::vector<Tensor<float>>& flows, int64_t native_w, int64_t eval_size) {
    double acc = 0.0;
    int64_t count = 0;
    double scale = static_cast<double>(eval_size) / static_cast<double>(native_w);
    for (const auto& f : flows) {
        int64_t plane = f.dim(1) * f.dim(2);
        auto d = f.data();
        for (int64_t p = 0; p < plane; ++p) {
            double mag = std::hypot(d[p], d[plane + p]);
            if (mag > 0.0) {
                acc += mag * scale;
                ++count;
            }
        }
    }
    return count > 0 ? acc / static_cast<double>(count) : 0.0;
}

ConfigScores run_and_score(const ParamStore<float>& params, const DenoiserConfig& cfg,
                           const ClipMaterial& clip, const LongSampleConfig& scfg,
                           int64_t eval_size) {
    if (clip.frames.empty()) throw ConfigError("run_and_score: empty clip");
    Tensor<float> reference = clip.frames[0];
    Tensor<float> ref_sketch = clip.sketches[0];

    auto t0 = std::chrono::steady_clock::now();
    LongSampleResult res = sample_long(params, cfg, clip.sketches, reference, ref_sketch, scfg);
    auto t1 = std::chrono::steady_clock::now();

    ConfigScores s;
    s.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    s.denoiser_evals = res.denoiser_evals;
    s.tc = metrics::tc(res.frames, clip.frames, clip.flows, eval_size).value;

    std::vector<Tensor<float>> gen_sketches;
    gen_sketches.reserve(res.frames.size());
    for (const auto& f : res.frames) gen_sketches.push_back(data::extract_sketch(f));
    s.edmd = metrics::edmd(gen_sketches, clip.sketches, eval_size).value;

    double ps = 0.0, ss = 0.0;
    for (size_t i = 0; i < res.frames.size(); ++i) {
        Tensor<float> g = metrics::resize_bilinear(res.frames[i], eval_size, eval_size);
        Tensor<float> o = metrics::resize_bilinear(clip.frames[i], eval_size, eval_size);
        double p = metrics::psnr(g, o);
        ps += std::isinf(p) ? 100.0 : p;  // identical frames counted as 100 dB
        ss += metrics::ssim(g, o);
    }
    s.psnr = ps / static_cast<double>(res.frames.size());
    s.ssim = ss / static_cast<double>(res.frames.size());
    if (!clip.palette.empty())
        s.color_err = shape_color_error(res.frames, clip.frames, clip.palette);
    return s;
}

std::vector<AblationRow> ablation_table(const ParamStore<float>& params,
                                        const DenoiserConfig& cfg,
                                        const std::vector<ClipMaterial>& clips,
                                        const LongSampleConfig& base) {
    struct Variant {
        const char* name;
        SampleAblation ablation;
    };
    const Variant variants[] = {
        {"full", SampleAblation::None},
        {"-ref-attn", SampleAblation::NoRefAttention},
        {"-schemes", SampleAblation::NoSchemes},
        {"prev-sample", SampleAblation::PrevSample},
    };
    std::vector<AblationRow> rows;
    for (const Variant& v : variants) {
        AblationRow row;
        row.name = v.name;
        LongSampleConfig scfg = base;
        scfg.ablation = v.ablation;
        for (const ClipMaterial& clip : clips) {
            ConfigScores s = run_and_score(params, cfg, clip, scfg);
            row.mean.tc += s.tc;
            row.mean.edmd += s.edmd;
            row.mean.psnr += s.psnr;
            row.mean.ssim += s.ssim;
            row.mean.color_err += s.color_err;
            row.mean.denoiser_evals += s.denoiser_evals;
            row.mean.wall_seconds += s.wall_seconds;
            row.per_clip.push_back(s);
        }
        double n = static_cast<double>(clips.size());
        row.mean.tc /= n;
        row.mean.edmd /= n;
        row.mean.psnr /= n;
        row.mean.ssim /= n;
        row.mean.color_err /= n;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<OverlapTiming> overlap_sweep(const ParamStore<float>& params,
                                         const DenoiserConfig& cfg,
                                         const std::vector<ClipMaterial>& clips,
                                         const LongSampleConfig& base,
                                         const std::vector<int>& overlaps) {
    std::vector<OverlapTiming> out;
    double baseline = 0.0;
    for (int o : overlaps) {
        if (o >= cfg.frames) continue;  // overlap must stay below the segment length
        LongSampleConfig scfg = base;
        scfg.overlap = o;
        scfg.shift = std::min(base.shift, o);  // keep i - shift >= 1 for small overlaps
        if (o == 0) scfg.ablation = SampleAblation::NoSchemes;  // no overlap, no blending
        OverlapTiming t;
        t.overlap = o;
        auto t0 = std::chrono::steady_clock::now();
        for (const ClipMaterial& clip : clips) {
            LongSampleResult r =
                sample_long(params, cfg, clip.sketches, clip.frames[0], clip.sketches[0], scfg);
            t.denoiser_evals += r.denoiser_evals;
        }
        auto t1 = std::chrono::steady_clock::now();
        t.seconds = std::chrono::duration<double>(t1 - t0).count();
        if (o == 0) baseline = t.seconds;
        t.ratio_vs_no_overlap = baseline > 0 ? t.seconds / baseline : 1.0;
        out.push_back(t);
    }
    return out;
}

}  // namespace lvc::eval
