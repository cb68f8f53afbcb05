#include "model/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "core/tensor_io.hpp"

namespace lvc {

namespace {

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

void put_u16(std::ostream& os, uint16_t v) {
    os.put(static_cast<char>(v & 0xff));
    os.put(static_cast<char>(v >> 8));
}

uint16_t get_u16(std::istream& is) {
    int lo = is.get(), hi = is.get();
    return static_cast<uint16_t>((hi << 8) | lo);
}

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        os << v[i];
    }
    return os.str();
}

std::vector<int> split_ints(const std::string& s) {
    std::vector<int> out;
    std::istringstream is(s);
    std::string part;
    while (std::getline(is, part, ',')) out.push_back(std::stoi(part));
    return out;
}

}  // namespace

void model_config_to_ini(const DenoiserConfig& cfg, ConfigFile& out) {
    out.set("model", "base_channels", std::to_string(cfg.base_channels));
    out.set("model", "channel_mult", join_ints(cfg.channel_mult));
    out.set("model", "frames", std::to_string(cfg.frames));
    out.set("model", "head_dim", std::to_string(cfg.head_dim));
    out.set("model", "latent_channels", std::to_string(cfg.latent_channels));
    out.set("model", "sketch_channels", std::to_string(cfg.sketch_channels));
    out.set("model", "emb_dim", std::to_string(cfg.emb_dim));
    out.set("model", "sketch_feat_channels", std::to_string(cfg.sketch_feat_channels));
    out.set("model", "norm_groups", std::to_string(cfg.norm_groups));
}

DenoiserConfig model_config_from_ini(const ConfigFile& in) {
    DenoiserConfig cfg;
    cfg.base_channels = static_cast<int>(in.get_int("model", "base_channels", cfg.base_channels));
    if (in.has("model", "channel_mult")) cfg.channel_mult = split_ints(in.get("model", "channel_mult"));
    cfg.frames = static_cast<int>(in.get_int("model", "frames", cfg.frames));
    cfg.head_dim = static_cast<int>(in.get_int("model", "head_dim", cfg.head_dim));
    cfg.latent_channels =
        static_cast<int>(in.get_int("model", "latent_channels", cfg.latent_channels));
    cfg.sketch_channels =
        static_cast<int>(in.get_int("model", "sketch_channels", cfg.sketch_channels));
    cfg.emb_dim = static_cast<int>(in.get_int("model", "emb_dim", cfg.emb_dim));
    cfg.sketch_feat_channels =
        static_cast<int>(in.get_int("model", "sketch_feat_channels", cfg.sketch_feat_channels));
    cfg.norm_groups = static_cast<int>(in.get_int("model", "norm_groups", cfg.norm_groups));
    cfg.validate();
    return cfg;
}

void save_checkpoint(const std::string& path, const ParamStore<float>& params,
                     const DenoiserConfig& cfg) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f.write("LVCDCKPT", 8);
    put_u32(f, kCheckpointVersion);
    put_u32(f, static_cast<uint32_t>(params.size()));
    for (const auto& [name, t] : params) {
        if (name.size() > 0xffff) throw IoError("parameter name too long: " + name);
        put_u16(f, static_cast<uint16_t>(name.size()));
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_ten(f, t);
    }
    if (!f) throw IoError("failed writing checkpoint: " + path);

    ConfigFile cf;
    model_config_to_ini(cfg, cf);
    cf.save(path + ".cfg");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint: " + path);
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, "LVCDCKPT", 8) != 0)
        throw IoError(path + ": not a checkpoint (bad magic)");
    uint32_t version = get_u32(f);
    if (version != kCheckpointVersion)
        throw IoError(path + ": checkpoint version " + std::to_string(version) +
                      " != " + std::to_string(kCheckpointVersion) +
                      "; re-export the checkpoint with a matching build");
    uint32_t count = get_u32(f);
    Checkpoint ck;
    for (uint32_t i = 0; i < count; ++i) {
        uint16_t len = get_u16(f);
        std::string name(len, '\0');
        f.read(name.data(), len);
        if (!f) throw IoError(path + ": truncated entry name");
        ck.params.add(name, read_ten<float>(f, path + ":" + name));
    }
    ck.cfg = model_config_from_ini(ConfigFile::load(path + ".cfg"));
    return ck;
}

}  // namespace lvc
