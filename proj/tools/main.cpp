// lvc: reference-based lineart video colorization pipeline
//   datagen   synthesize an animation dataset with ground-truth flows
//   train     finetune the video denoiser on a dataset
//   sample    colorize a sketch sequence from a reference frame
//   eval      score generated clips (PSNR/SSIM/TC/EDMD)
//   schedule  dump the sigma ladder as CSV
//   ablate    compare the full method against its ablations / overlap sweep
#include "CLI11.hpp"
#include "cli/commands.hpp"

using namespace lvc::cli;

int main(int argc, char** argv) {
    CLI::App app{"reference-based lineart video colorization"};
    app.require_subcommand(1);

    DatagenArgs dg;
    CLI::App* datagen = app.add_subcommand("datagen", "generate a synthetic dataset");
    datagen->add_option("--out", dg.out, "output dataset directory")->required();
    datagen->add_option("--clips", dg.clips, "number of clips");
    datagen->add_option("--seed", dg.seed, "base seed");
    datagen->add_option("--config", dg.config, "run config ([data] section)");
    datagen->add_option("--width", dg.width);
    datagen->add_option("--height", dg.height);
    datagen->add_option("--shapes", dg.shapes);
    datagen->add_option("--motion", dg.motion, "max velocity px/frame");
    datagen->add_option("--min-len", dg.min_len);
    datagen->add_option("--max-len", dg.max_len);

    TrainArgs tr;
    CLI::App* train = app.add_subcommand("train", "train the denoiser");
    train->add_option("--config", tr.config, "run config")->required();
    train->add_option("--out", tr.out, "checkpoint path (overrides [train] out)");

    SampleArgs sm;
    CLI::App* sample = app.add_subcommand("sample", "colorize a sketch sequence");
    sample->add_option("--ckpt", sm.ckpt, "checkpoint")->required();
    sample->add_option("--sketches", sm.sketches_dir, "directory with sketch_%05d.ppm")
        ->required();
    sample->add_option("--reference", sm.reference, "reference frame (PPM)")->required();
    sample->add_option("--out", sm.out, "output frame directory")->required();
    sample->add_option("--config", sm.config, "run config ([sample] section)");
    sample->add_option("--ablate", sm.ablate, "ref-attn|schemes|prev-sample");
    sample->add_flag("--dump-latents", sm.dump_latents, "also write latent_%05d.ten");

    EvalArgs ev;
    CLI::App* eval = app.add_subcommand("eval", "score generated clips");
    eval->add_option("--generated", ev.generated)->required();
    eval->add_option("--original", ev.original)->required();
    eval->add_option("--flows", ev.flows, "flow directory (defaults to --original)");
    eval->add_option("--out", ev.out, "CSV output (stdout when omitted)");
    eval->add_option("--config", ev.config, "run config ([eval] section)");

    ScheduleArgs sc;
    CLI::App* schedule = app.add_subcommand("schedule", "dump the sigma ladder");
    schedule->add_option("--T", sc.steps, "step count");
    schedule->add_option("--sigma-min", sc.sigma_min);
    schedule->add_option("--sigma-max", sc.sigma_max);
    schedule->add_option("--rho", sc.rho);
    schedule->add_option("--out", sc.out, "CSV output (stdout when omitted)");

    AblateArgs ab;
    CLI::App* ablate = app.add_subcommand("ablate", "ablation table / overlap sweep");
    ablate->add_option("--config", ab.config, "run config ([ablate]+[sample])")->required();
    ablate->add_flag("--overlap", ab.overlap_sweep, "sweep o in {0,2,4,6,8,10}");
    ablate->add_option("--out", ab.out, "CSV output");

    CLI11_PARSE(app, argc, argv);

    if (*datagen) return run_guarded([&] { return cmd_datagen(dg); });
    if (*train) return run_guarded([&] { return cmd_train(tr); });
    if (*sample) return run_guarded([&] { return cmd_sample(sm); });
    if (*eval) return run_guarded([&] { return cmd_eval(ev); });
    if (*schedule) return run_guarded([&] { return cmd_schedule(sc); });
    if (*ablate) return run_guarded([&] { return cmd_ablate(ab); });
    return kExitConfig;
}
