#pragma once

#include <vector>

#include "core/tensor.hpp"

namespace lvc::data {

// 1000-bin color histogram: each channel quantized to 10 uniform levels
// (index = min(floor(v*10), 9)), bin = 100r + 10g + b. Normalized mode sums
// to 1; raw mode holds pixel counts.
std::vector<double> histogram_1000(const Tensor<float>& frame, bool normalized = true);

double hist_rmse(const std::vector<double>& a, const std::vector<double>& b);

struct ClipFilterConfig {
    double threshold = 0.02;  // normalized-histogram default; 30.0 in raw-count mode
    bool normalized = true;
    int min_length = 15;
    int max_length = 200;
};

struct ClipRange {
    int start = 0;  // 0-based, inclusive
    int end = 0;    // exclusive
    int length() const { return end - start; }
};

// Cuts between consecutive frames whose histogram RMSE exceeds the
// threshold, then drops clips shorter than min_length or longer than
// max_length.
std::vector<ClipRange> split_scenes(const std::vector<Tensor<float>>& frames,
                                    const ClipFilterConfig& cfg = {});

// k-th set (k = 1..L-N): targets are frames k+1..k+N, reference candidates
// are frames 1..k (1-based frame indices).
struct TrainingSet {
    int k = 0;
    int target_begin = 0;  // 0-based index of the first target frame
    int candidate_count = 0;
};

std::vector<TrainingSet> build_training_sets(int clip_length, int window);

}  // namespace lvc::data
