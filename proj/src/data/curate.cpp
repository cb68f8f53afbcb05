#include "data/curate.hpp"

#include <algorithm>
#include <cmath>

namespace lvc::data {

std::vector<double> histogram_1000(const Tensor<float>& frame, bool normalized) {
    if (frame.rank() != 3 || frame.dim(0) != 3)
        throw ShapeError("histogram_1000: expected [3,H,W], got " + shape_str(frame.shape()));
    int64_t pixels = frame.dim(1) * frame.dim(2);
    auto src = frame.data();
    std::vector<double> hist(1000, 0.0);
    auto level = [](float v) {
        int q = static_cast<int>(std::floor(v * 10.0f));
        return std::clamp(q, 0, 9);
    };
    for (int64_t p = 0; p < pixels; ++p) {
        int r = level(src[p]);
        int g = level(src[pixels + p]);
        int b = level(src[2 * pixels + p]);
        hist[100 * r + 10 * g + b] += 1.0;
    }
    if (normalized)
        for (auto& v : hist) v /= static_cast<double>(pixels);
    return hist;
}

double hist_rmse(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw ShapeError("hist_rmse: histogram size mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

std::vector<ClipRange> split_scenes(const std::vector<Tensor<float>>& frames,
                                    const ClipFilterConfig& cfg) {
    if (frames.size() < 2) throw ConfigError("split_scenes: need at least 2 frames");
    std::vector<int> cut_after;  // cut between i and i+1
    std::vector<double> prev = histogram_1000(frames[0], cfg.normalized);
    for (size_t i = 1; i < frames.size(); ++i) {
        std::vector<double> cur = histogram_1000(frames[i], cfg.normalized);
        if (hist_rmse(prev, cur) > cfg.threshold) cut_after.push_back(static_cast<int>(i) - 1);
        prev = std::move(cur);
    }
    std::vector<ClipRange> out;
    int start = 0;
    auto emit = [&](int end) {
        ClipRange r{start, end};
        if (r.length() >= cfg.min_length && r.length() <= cfg.max_length) out.push_back(r);
        start = end;
    };
    for (int c : cut_after) emit(c + 1);
    emit(static_cast<int>(frames.size()));
    return out;
}

std::vector<TrainingSet> build_training_sets(int clip_length, int window) {
    if (window < 1) throw ConfigError("build_training_sets: window must be >= 1");
    std::vector<TrainingSet> out;
    if (clip_length <= window) return out;  // L <= N: no sets
    for (int k = 1; k <= clip_length - window; ++k)
        out.push_back({k, k, k});  // 0-based target begin == k (frames k+1..k+N)
    return out;
}

}  // namespace lvc::data
