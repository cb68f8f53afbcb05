#pragma once

#include <string>

#include "cli/config_file.hpp"
#include "core/param_store.hpp"
#include "model/config.hpp"

namespace lvc {

// Checkpoint container: magic "LVCDCKPT", u32 version=1, u32 entry count,
// then per entry u16 name length, UTF-8 name, and a ".ten" tensor record.
// The model config is serialized alongside as structured text at
// "<path>.cfg" ([model] section).
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const ParamStore<float>& params,
                     const DenoiserConfig& cfg);

struct Checkpoint {
    ParamStore<float> params;
    DenoiserConfig cfg;
};
Checkpoint load_checkpoint(const std::string& path);

void model_config_to_ini(const DenoiserConfig& cfg, ConfigFile& out);
DenoiserConfig model_config_from_ini(const ConfigFile& in);

}  // namespace lvc
