#include "cli/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>

#include "common/rng.hpp"
#include "core/tensor_io.hpp"
#include "data/dataset_io.hpp"
#include "data/synth.hpp"
#include "edm/edm.hpp"
#include "eval/ablation.hpp"
#include "metrics/metrics.hpp"
#include "model/checkpoint.hpp"
#include "model/unet.hpp"
#include "sampler/sampler.hpp"
#include "train/trainer.hpp"
#include "vae/patch_codec.hpp"

namespace fs = std::filesystem;

namespace lvc::cli {

namespace {

const std::map<std::string, std::set<std::string>>& run_config_schema() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"data",
         {"out", "clips", "seed", "width", "height", "shapes", "motion", "min_len", "max_len",
          "allow_scale"}},
        {"model",
         {"base_channels", "channel_mult", "frames", "head_dim", "latent_channels",
          "sketch_channels", "emb_dim", "sketch_feat_channels", "norm_groups"}},
        {"train",
         {"dataset", "out", "steps", "batch", "lr", "groups", "seed", "checkpoint_every",
          "loss_log", "use_controlnet", "per_sample_sigma", "log_mean", "log_std", "sigma_data"}},
        {"sample",
         {"steps", "sigma_min", "sigma_max", "rho", "sigma_data", "overlap", "shift", "alpha",
          "seed", "ablate", "fixed_ref_noise", "amplify_scale_keys", "use_controlnet"}},
        {"eval", {"eval_size"}},
        {"ablate", {"dataset", "checkpoint", "clips", "seed", "length"}},
    };
    return schema;
}

}  // namespace

void validate_run_config(const ConfigFile& cf) {
    const auto& schema = run_config_schema();
    for (const std::string& sec : cf.section_names()) {
        auto it = schema.find(sec);
        if (it == schema.end()) throw ConfigError("unknown config section [" + sec + "]");
        for (const std::string& key : cf.keys(sec))
            if (!it->second.count(key))
                throw ConfigError("unknown key '" + key + "' in section [" + sec + "]");
    }
}

namespace {

ConfigFile load_run_config(const std::string& path) {
    ConfigFile cf = ConfigFile::load(path);
    validate_run_config(cf);
    return cf;
}

LongSampleConfig sample_config_from(const ConfigFile& cf) {
    LongSampleConfig sc;
    sc.schedule.steps = static_cast<int>(cf.get_int("sample", "steps", sc.schedule.steps));
    sc.schedule.sigma_min = cf.get_double("sample", "sigma_min", sc.schedule.sigma_min);
    sc.schedule.sigma_max = cf.get_double("sample", "sigma_max", sc.schedule.sigma_max);
    sc.schedule.rho = cf.get_double("sample", "rho", sc.schedule.rho);
    sc.schedule.sigma_data = cf.get_double("sample", "sigma_data", sc.schedule.sigma_data);
    sc.overlap = static_cast<int>(cf.get_int("sample", "overlap", sc.overlap));
    sc.shift = static_cast<int>(cf.get_int("sample", "shift", sc.shift));
    sc.alpha = cf.get_double("sample", "alpha", sc.alpha);
    sc.seed = static_cast<uint64_t>(cf.get_int("sample", "seed", 0));
    sc.use_controlnet = cf.get_bool("sample", "use_controlnet", true);
    sc.fixed_reference_noise = cf.get_bool("sample", "fixed_ref_noise", false);
    sc.amplify_scales_keys = cf.get_bool("sample", "amplify_scale_keys", false);
    return sc;
}

SampleAblation parse_ablation(const std::string& name) {
    if (name.empty() || name == "none") return SampleAblation::None;
    if (name == "ref-attn") return SampleAblation::NoRefAttention;
    if (name == "schemes") return SampleAblation::NoSchemes;
    if (name == "prev-sample") return SampleAblation::PrevSample;
    throw ConfigError("unknown ablation '" + name + "' (ref-attn|schemes|prev-sample)");
}

std::string clip_dir_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "clip_%05d", index);
    return buf;
}

}  // namespace

int cmd_datagen(const DatagenArgs& args) {
    DatagenArgs a = args;
    if (!a.config.empty()) {
        ConfigFile cf = load_run_config(a.config);
        a.clips = static_cast<int>(cf.get_int("data", "clips", a.clips));
        a.seed = static_cast<uint64_t>(cf.get_int("data", "seed", static_cast<int64_t>(a.seed)));
        a.width = static_cast<int>(cf.get_int("data", "width", a.width));
        a.height = static_cast<int>(cf.get_int("data", "height", a.height));
        a.shapes = static_cast<int>(cf.get_int("data", "shapes", a.shapes));
        a.motion = cf.get_double("data", "motion", a.motion);
        a.min_len = static_cast<int>(cf.get_int("data", "min_len", a.min_len));
        a.max_len = static_cast<int>(cf.get_int("data", "max_len", a.max_len));
        if (cf.has("data", "out") && a.out.empty()) a.out = cf.get("data", "out");
    }
    if (a.out.empty()) throw ConfigError("datagen: --out is required");
    if (a.clips < 1 || a.min_len < 2 || a.max_len < a.min_len)
        throw ConfigError("datagen: need clips >= 1 and 2 <= min_len <= max_len");
    fs::create_directories(a.out);
    for (int i = 0; i < a.clips; ++i) {
        uint64_t cs = derive_seed(a.seed, static_cast<uint64_t>(i));
        data::ClipGenConfig g;
        g.height = a.height;
        g.width = a.width;
        g.shapes = a.shapes;
        g.motion_scale = a.motion;
        g.length = a.min_len +
                   static_cast<int>(splitmix64(cs) % static_cast<uint64_t>(a.max_len - a.min_len + 1));
        data::SyntheticClip clip = data::gen_clip(cs, g);
        data::write_clip_dir(a.out + "/" + clip_dir_name(i), clip);
    }
    std::cout << "wrote " << a.clips << " clips under " << a.out << "\n";
    return kExitOk;
}

int cmd_train(const TrainArgs& args) {
    if (args.config.empty()) throw ConfigError("train: --config is required");
    ConfigFile cf = load_run_config(args.config);

    DenoiserConfig mc = model_config_from_ini(cf);
    TrainConfig tc;
    tc.steps = static_cast<int>(cf.get_int("train", "steps", tc.steps));
    tc.batch_size = static_cast<int>(cf.get_int("train", "batch", tc.batch_size));
    tc.lr = cf.get_double("train", "lr", tc.lr);
    tc.groups = cf.get_or("train", "groups", tc.groups);
    tc.seed = static_cast<uint64_t>(cf.get_int("train", "seed", 0));
    tc.checkpoint_every = static_cast<int>(cf.get_int("train", "checkpoint_every", 0));
    tc.loss_log = cf.get_or("train", "loss_log", "");
    tc.use_controlnet = cf.get_bool("train", "use_controlnet", true);
    tc.per_sample_sigma = cf.get_bool("train", "per_sample_sigma", false);
    tc.noise.log_mean = cf.get_double("train", "log_mean", tc.noise.log_mean);
    tc.noise.log_std = cf.get_double("train", "log_std", tc.noise.log_std);
    tc.sigma_data = cf.get_double("train", "sigma_data", tc.sigma_data);
    tc.out_checkpoint = args.out.empty() ? cf.get_or("train", "out", "") : args.out;
    if (tc.out_checkpoint.empty()) throw ConfigError("train: no checkpoint path (--out or [train] out)");

    std::string dataset_dir = cf.get("train", "dataset");
    TrainDataset ds = dataset_from_dir(dataset_dir);

    std::mt19937_64 rng(derive_seed(tc.seed, 0xbadc0de));
    ParamStore<float> params = build_params<float>(mc, rng);
    TrainResult res = train(tc, mc, params, ds);
    std::cout << "trained " << tc.steps << " steps; first loss " << res.losses.front()
              << ", last loss " << res.losses.back() << "; checkpoint " << tc.out_checkpoint
              << "\n";
    return kExitOk;
}

int cmd_sample(const SampleArgs& args) {
    if (args.ckpt.empty() || args.sketches_dir.empty() || args.reference.empty() ||
        args.out.empty())
        throw ConfigError("sample: --ckpt, --sketches, --reference and --out are required");
    Checkpoint ck = load_checkpoint(args.ckpt);
    LongSampleConfig sc;
    if (!args.config.empty()) sc = sample_config_from(load_run_config(args.config));
    sc.ablation = parse_ablation(args.ablate);

    std::vector<Tensor<float>> sketches = data::read_sketch_series(args.sketches_dir);
    if (sketches.empty()) throw IoError("no sketch_*.ppm under " + args.sketches_dir);
    Tensor<float> reference = data::read_ppm(args.reference);
    Tensor<float> ref_sketch = data::extract_sketch(reference);

    LongSampleResult res = sample_long(ck.params, ck.cfg, sketches, reference, ref_sketch, sc);
    fs::create_directories(args.out);
    for (size_t i = 0; i < res.frames.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "frame_%05zu.ppm", i + 1);
        data::write_ppm(args.out + "/" + buf, res.frames[i]);
        if (args.dump_latents) {
            std::snprintf(buf, sizeof buf, "latent_%05zu.ten", i + 1);
            save_ten(args.out + "/" + buf, res.latents[i]);
        }
    }
    std::cout << "wrote " << res.frames.size() << " frames to " << args.out << "\n";
    return kExitOk;
}

namespace {

struct EvalRow {
    std::string id;
    double psnr, ssim, tc, edmd;
};

EvalRow eval_one_clip(const std::string& id, const std::string& gen_dir,
                      const std::string& orig_dir, const std::string& flow_dir,
                      int64_t eval_size) {
    data::LoadedClip gen = data::read_clip_dir(gen_dir, /*need_flows=*/false);
    data::LoadedClip orig = data::read_clip_dir(orig_dir, /*need_flows=*/false);
    if (gen.frames.size() != orig.frames.size())
        throw ConfigError(id + ": generated has " + std::to_string(gen.frames.size()) +
                          " frames, original has " + std::to_string(orig.frames.size()));
    std::vector<Tensor<float>> flows;
    for (int i = 1; i + 1 <= static_cast<int>(orig.frames.size()); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "flow_%05d.flo5", i);
        flows.push_back(data::read_flo5(flow_dir + "/" + buf));
    }
    if (orig.sketches.size() != orig.frames.size())
        throw IoError(id + ": original clip has no sketches");

    EvalRow row{id, 0, 0, 0, 0};
    double ps = 0, ss = 0;
    for (size_t i = 0; i < gen.frames.size(); ++i) {
        Tensor<float> g = metrics::resize_bilinear(gen.frames[i], eval_size, eval_size);
        Tensor<float> o = metrics::resize_bilinear(orig.frames[i], eval_size, eval_size);
        double p = metrics::psnr(g, o);
        ps += std::isinf(p) ? 100.0 : p;
        ss += metrics::ssim(g, o);
    }
    row.psnr = ps / static_cast<double>(gen.frames.size());
    row.ssim = ss / static_cast<double>(gen.frames.size());
    row.tc = metrics::tc(gen.frames, orig.frames, flows, eval_size).value;

    std::vector<Tensor<float>> gen_sketches;
    for (const auto& f : gen.frames) gen_sketches.push_back(data::extract_sketch(f));
    row.edmd = metrics::edmd(gen_sketches, orig.sketches, eval_size).value;
    return row;
}

bool has_frames(const std::string& dir) {
    return fs::exists(fs::path(dir) / "frame_00001.ppm");
}

}  // namespace

int cmd_eval(const EvalArgs& args) {
    if (args.generated.empty() || args.original.empty())
        throw ConfigError("eval: --generated and --original are required");
    std::string flow_root = args.flows.empty() ? args.original : args.flows;
    int64_t eval_size = 256;
    if (!args.config.empty())
        eval_size = load_run_config(args.config).get_int("eval", "eval_size", 256);

    std::vector<EvalRow> rows;
    if (has_frames(args.generated)) {
        rows.push_back(eval_one_clip(fs::path(args.generated).filename().string(),
                                     args.generated, args.original, flow_root, eval_size));
    } else {
        for (const std::string& dir : data::list_clip_dirs(args.generated)) {
            std::string id = fs::path(dir).filename().string();
            std::string orig = args.original + "/" + id;
            std::string flows = flow_root + "/" + id;
            if (!fs::is_directory(orig)) throw IoError("eval: missing original clip " + orig);
            rows.push_back(eval_one_clip(id, dir, orig, flows, eval_size));
        }
    }
    if (rows.empty()) throw IoError("eval: no clips found under " + args.generated);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!args.out.empty()) {
        file.open(args.out);
        if (!file) throw IoError("cannot write " + args.out);
        os = &file;
    }
    *os << "clip_id,psnr,ssim,tc,edmd\n";
    for (const EvalRow& r : rows)
        *os << r.id << "," << r.psnr << "," << r.ssim << "," << r.tc << "," << r.edmd << "\n";
    return kExitOk;
}

int cmd_schedule(const ScheduleArgs& args) {
    NoiseSchedule sched;
    sched.steps = args.steps;
    sched.sigma_min = args.sigma_min;
    sched.sigma_max = args.sigma_max;
    sched.rho = args.rho;
    sched.validate();
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!args.out.empty()) {
        file.open(args.out);
        if (!file) throw IoError("cannot write " + args.out);
        os = &file;
    }
    char buf[64];
    for (int t = sched.steps; t >= 1; --t) {
        std::snprintf(buf, sizeof buf, "%d,%.10g\n", t, sched.sigma_at(t));
        *os << buf;
    }
    return kExitOk;
}

int cmd_ablate(const AblateArgs& args) {
    if (args.config.empty()) throw ConfigError("ablate: --config is required");
    ConfigFile cf = load_run_config(args.config);
    std::string dataset = cf.get("ablate", "dataset");
    std::string ckpt_path = cf.get("ablate", "checkpoint");
    int max_clips = static_cast<int>(cf.get_int("ablate", "clips", 8));

    Checkpoint ck = load_checkpoint(ckpt_path);
    LongSampleConfig sc = sample_config_from(cf);

    std::vector<eval::ClipMaterial> clips;
    for (const std::string& dir : data::list_clip_dirs(dataset)) {
        if (static_cast<int>(clips.size()) >= max_clips) break;
        data::LoadedClip lc = data::read_clip_dir(dir);
        if (static_cast<int>(lc.frames.size()) < ck.cfg.frames) continue;
        eval::ClipMaterial m;
        m.frames = std::move(lc.frames);
        m.sketches = std::move(lc.sketches);
        m.flows = std::move(lc.flows);
        m.palette = std::move(lc.palette);
        clips.push_back(std::move(m));
    }
    if (clips.empty()) throw IoError("ablate: no usable clips under " + dataset);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!args.out.empty()) {
        file.open(args.out);
        if (!file) throw IoError("cannot write " + args.out);
        os = &file;
    }

    if (args.overlap_sweep) {
        auto sweep = eval::overlap_sweep(ck.params, ck.cfg, clips, sc);
        std::cout << "overlap,time_s,ratio_vs_o0,denoiser_evals\n";
        if (os != &std::cout) *os << "overlap,time_s,ratio_vs_o0,denoiser_evals\n";
        for (const auto& row : sweep) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%d,%.3f,%.3f,%lld\n", row.overlap, row.seconds,
                          row.ratio_vs_no_overlap, static_cast<long long>(row.denoiser_evals));
            std::cout << buf;
            if (os != &std::cout) *os << buf;
        }
        return kExitOk;
    }

    auto rows = eval::ablation_table(ck.params, ck.cfg, clips, sc);
    std::cout << "config,tc,edmd,psnr,ssim,color_err\n";
    if (os != &std::cout) *os << "config,tc,edmd,psnr,ssim,color_err\n";
    for (const auto& row : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,%.2f,%.4f,%.5f\n", row.name.c_str(),
                      row.mean.tc, row.mean.edmd, row.mean.psnr, row.mean.ssim,
                      row.mean.color_err);
        std::cout << buf;
        if (os != &std::cout) *os << buf;
    }
    return kExitOk;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ShapeError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace lvc::cli
