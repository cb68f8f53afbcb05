#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cli/config_file.hpp"

namespace lvc::cli {

// Exit codes: 0 ok, 2 config error, 3 I/O error, 4 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;

// Rejects unknown sections/keys before any work starts.
void validate_run_config(const ConfigFile& cf);

struct DatagenArgs {
    std::string out;
    std::string config;  // optional run config path
    int clips = 16;
    uint64_t seed = 0;
    int width = 64, height = 64, shapes = 3;
    int min_len = 8, max_len = 16;
    double motion = 2.0;
};
int cmd_datagen(const DatagenArgs& args);

struct TrainArgs {
    std::string config;  // required
    std::string out;     // checkpoint path override
};
int cmd_train(const TrainArgs& args);

struct SampleArgs {
    std::string ckpt;
    std::string sketches_dir;
    std::string reference;
    std::string out;
    std::string config;   // optional [sample] overrides
    std::string ablate;   // "", "ref-attn", "schemes", "prev-sample"
    bool dump_latents = false;
};
int cmd_sample(const SampleArgs& args);

struct EvalArgs {
    std::string generated;
    std::string original;
    std::string flows;  // defaults to original when empty
    std::string out;    // CSV path; stdout when empty
    std::string config;
};
int cmd_eval(const EvalArgs& args);

struct ScheduleArgs {
    int steps = 25;
    double sigma_min = 0.002;
    double sigma_max = 700.0;
    double rho = 7.0;
    std::string out;  // stdout when empty
};
int cmd_schedule(const ScheduleArgs& args);

struct AblateArgs {
    std::string config;  // required: dataset + checkpoint + sample settings
    bool overlap_sweep = false;
    std::string out;  // CSV; stdout table always printed
};
int cmd_ablate(const AblateArgs& args);

// Maps exceptions to exit codes around a command body.
int run_guarded(const std::function<int()>& body);

}  // namespace lvc::cli
