#pragma once

#include <string>
#include <vector>

#include "core/tensor.hpp"
#include "data/synth.hpp"

namespace lvc::data {

// P6 binary PPM, 8-bit, values clamped to [0,1] at write time.
void write_ppm(const std::string& path, const Tensor<float>& image);  // [3,H,W] or [1,H,W]
Tensor<float> read_ppm(const std::string& path);                      // always [3,H,W]

// ".flo5": magic "FLO5", u32 H, u32 W (little-endian), then H*W f32 (dx,dy)
// pairs row-major.
void write_flo5(const std::string& path, const Tensor<float>& flow);  // [2,H,W]
Tensor<float> read_flo5(const std::string& path);

// Dataset layout per clip directory:
//   frame_%05d.ppm, sketch_%05d.ppm, flow_%05d.flo5, palette.txt
// flow_k holds F_{k+1->k} (backward flow sampled at frame k+1); indices are
// 1-based. Sketches are stored ink-on-paper (inverted) for display and
// re-inverted on load.
void write_clip_dir(const std::string& dir, const SyntheticClip& clip);

struct LoadedClip {
    std::vector<Tensor<float>> frames;
    std::vector<Tensor<float>> sketches;  // [1,H,W] in {0,1}
    std::vector<Tensor<float>> flows;
    std::vector<std::array<float, 3>> palette;
};
LoadedClip read_clip_dir(const std::string& dir, bool need_flows = true);

// Sorted clip subdirectories of a dataset root.
std::vector<std::string> list_clip_dirs(const std::string& root);

// sketch_%05d.ppm files from a directory, binarized to {0,1} line masks.
std::vector<Tensor<float>> read_sketch_series(const std::string& dir);

}  // namespace lvc::data
