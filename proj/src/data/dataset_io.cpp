#include "data/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace lvc::data {

namespace {

uint8_t to_byte(float v) {
    float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<uint8_t>(std::lround(c * 255.0f));
}

std::string indexed(const char* stem, int i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%05d.%s", stem, i, ext);
    return buf;
}

void put_u32(std::ofstream& f, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    f.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::ifstream& f) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

void write_ppm(const std::string& path, const Tensor<float>& image) {
    if (image.rank() != 3 || (image.dim(0) != 3 && image.dim(0) != 1))
        throw ShapeError("write_ppm: expected [3,H,W] or [1,H,W], got " +
                         shape_str(image.shape()));
    int64_t C = image.dim(0), H = image.dim(1), W = image.dim(2);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f << "P6\n" << W << " " << H << "\n255\n";
    auto src = image.data();
    std::vector<uint8_t> row(static_cast<size_t>(W) * 3);
    for (int64_t y = 0; y < H; ++y) {
        for (int64_t x = 0; x < W; ++x)
            for (int64_t c = 0; c < 3; ++c)
                row[x * 3 + c] = to_byte(src[((C == 3 ? c : 0) * H + y) * W + x]);
        f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!f) throw IoError("failed writing " + path);
}

Tensor<float> read_ppm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::string magic;
    f >> magic;
    if (magic != "P6") throw IoError(path + ": not a P6 PPM");
    auto next_token = [&]() {
        std::string tok;
        for (;;) {
            if (!(f >> tok)) throw IoError(path + ": truncated PPM header");
            if (tok[0] == '#') {
                std::string rest;
                std::getline(f, rest);
                continue;
            }
            return tok;
        }
    };
    int64_t W = std::stoll(next_token());
    int64_t H = std::stoll(next_token());
    int64_t maxval = std::stoll(next_token());
    if (W < 1 || H < 1 || maxval != 255) throw IoError(path + ": unsupported PPM header");
    f.get();  // single whitespace after maxval
    std::vector<uint8_t> raw(static_cast<size_t>(W) * H * 3);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!f) throw IoError(path + ": truncated PPM payload");
    Tensor<float> img = Tensor<float>::zeros({3, H, W});
    auto dst = img.mutable_data();
    for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < W; ++x)
            for (int64_t c = 0; c < 3; ++c)
                dst[(c * H + y) * W + x] =
                    static_cast<float>(raw[(y * W + x) * 3 + c]) / 255.0f;
    return img;
}

void write_flo5(const std::string& path, const Tensor<float>& flow) {
    if (flow.rank() != 3 || flow.dim(0) != 2)
        throw ShapeError("write_flo5: expected [2,H,W], got " + shape_str(flow.shape()));
    int64_t H = flow.dim(1), W = flow.dim(2);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f.write("FLO5", 4);
    put_u32(f, static_cast<uint32_t>(H));
    put_u32(f, static_cast<uint32_t>(W));
    auto src = flow.data();
    std::vector<float> pairs(static_cast<size_t>(H) * W * 2);
    for (int64_t p = 0; p < H * W; ++p) {
        pairs[2 * p] = src[p];            // dx
        pairs[2 * p + 1] = src[H * W + p];  // dy
    }
    f.write(reinterpret_cast<const char*>(pairs.data()),
            static_cast<std::streamsize>(pairs.size() * 4));
    if (!f) throw IoError("failed writing " + path);
}

Tensor<float> read_flo5(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "FLO5", 4) != 0) throw IoError(path + ": bad flo5 magic");
    int64_t H = get_u32(f), W = get_u32(f);
    if (H < 1 || W < 1 || H > 1 << 20 || W > 1 << 20) throw IoError(path + ": corrupt flo5 dims");
    std::vector<float> pairs(static_cast<size_t>(H) * W * 2);
    f.read(reinterpret_cast<char*>(pairs.data()),
           static_cast<std::streamsize>(pairs.size() * 4));
    if (!f) throw IoError(path + ": truncated flo5 payload");
    Tensor<float> flow = Tensor<float>::zeros({2, H, W});
    auto dst = flow.mutable_data();
    for (int64_t p = 0; p < H * W; ++p) {
        dst[p] = pairs[2 * p];
        dst[H * W + p] = pairs[2 * p + 1];
    }
    return flow;
}

void write_clip_dir(const std::string& dir, const SyntheticClip& clip) {
    fs::create_directories(dir);
    for (size_t i = 0; i < clip.frames.size(); ++i) {
        write_ppm(dir + "/" + indexed("frame", static_cast<int>(i) + 1, "ppm"), clip.frames[i]);
        // ink on paper: lines dark
        Tensor<float> inv = Tensor<float>::zeros(clip.sketches[i].shape());
        auto s = clip.sketches[i].data();
        auto d = inv.mutable_data();
        for (int64_t j = 0; j < inv.numel(); ++j) d[j] = 1.0f - s[j];
        write_ppm(dir + "/" + indexed("sketch", static_cast<int>(i) + 1, "ppm"), inv);
    }
    for (size_t i = 0; i < clip.flows.size(); ++i)
        write_flo5(dir + "/" + indexed("flow", static_cast<int>(i) + 1, "flo5"), clip.flows[i]);
    std::ofstream pal(dir + "/palette.txt");
    if (!pal) throw IoError("cannot write palette in " + dir);
    auto line = [&](const std::array<float, 3>& c) {
        pal << static_cast<int>(to_byte(c[0])) << " " << static_cast<int>(to_byte(c[1])) << " "
            << static_cast<int>(to_byte(c[2])) << "\n";
    };
    pal << "background ";
    line(clip.palette[0]);
    for (size_t k = 1; k < clip.palette.size(); ++k) {
        pal << "shape " << k - 1 << " ";
        line(clip.palette[k]);
    }
}

LoadedClip read_clip_dir(const std::string& dir, bool need_flows) {
    LoadedClip clip;
    for (int i = 1;; ++i) {
        std::string fp = dir + "/" + indexed("frame", i, "ppm");
        if (!fs::exists(fp)) break;
        clip.frames.push_back(read_ppm(fp));
        std::string sp = dir + "/" + indexed("sketch", i, "ppm");
        if (fs::exists(sp)) {
            Tensor<float> s = read_ppm(sp);
            int64_t H = s.dim(1), W = s.dim(2);
            Tensor<float> bin = Tensor<float>::zeros({1, H, W});
            auto src = s.data();
            auto dst = bin.mutable_data();
            for (int64_t p = 0; p < H * W; ++p) dst[p] = src[p] < 0.5f ? 1.0f : 0.0f;
            clip.sketches.push_back(bin);
        }
    }
    if (clip.frames.empty()) throw IoError("no frames found in " + dir);
    if (need_flows) {
        for (int i = 1; i + 1 <= static_cast<int>(clip.frames.size()); ++i) {
            std::string fp = dir + "/" + indexed("flow", i, "flo5");
            if (!fs::exists(fp)) {
                if (i == 1) break;  // dataset without flows
                throw IoError("missing flow file: " + fp);
            }
            clip.flows.push_back(read_flo5(fp));
        }
    }
    std::string pal = dir + "/palette.txt";
    if (fs::exists(pal)) {
        std::ifstream f(pal);
        std::string kind;
        while (f >> kind) {
            int idx = 0, r, g, b;
            if (kind == "shape") f >> idx;
            if (!(f >> r >> g >> b)) throw IoError(pal + ": malformed palette line");
            clip.palette.push_back({static_cast<float>(r) / 255.0f,
                                    static_cast<float>(g) / 255.0f,
                                    static_cast<float>(b) / 255.0f});
        }
    }
    return clip;
}

std::vector<Tensor<float>> read_sketch_series(const std::string& dir) {
    std::vector<Tensor<float>> out;
    for (int i = 1;; ++i) {
        std::string path = dir + "/" + indexed("sketch", i, "ppm");
        if (!fs::exists(path)) break;
        Tensor<float> img = read_ppm(path);
        int64_t H = img.dim(1), W = img.dim(2);
        Tensor<float> bin = Tensor<float>::zeros({1, H, W});
        auto src = img.data();
        auto dst = bin.mutable_data();
        for (int64_t p = 0; p < H * W; ++p) dst[p] = src[p] < 0.5f ? 1.0f : 0.0f;
        out.push_back(bin);
    }
    return out;
}

std::vector<std::string> list_clip_dirs(const std::string& root) {
    if (!fs::is_directory(root)) throw IoError("not a directory: " + root);
    std::vector<std::string> dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) dirs.push_back(e.path().string());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

}  // namespace lvc::data
