#include "model/attention_modes.hpp"

#include <string>

namespace lvc {

FrameAttentionMode attention_mode_for(int frame_i, int segment_index, int overlap, int shift) {
    if (frame_i < 1) throw ConfigError("attention_mode_for: frame index is 1-based");
    if (segment_index <= 1 || overlap == 0) return FrameAttentionMode::Standard;
    if (frame_i <= overlap) return FrameAttentionMode::OverlapAmplified;
    if (shift < 1 || shift > overlap)
        throw ConfigError("attention_mode_for: shift " + std::to_string(shift) +
                          " must be in [1, overlap=" + std::to_string(overlap) + "]");
    return FrameAttentionMode::PrevReference;
}

ModeSchedule standard_modes(int frames) {
    ModeSchedule m;
    m.frame_modes.assign(static_cast<size_t>(frames), FrameAttentionMode::Standard);
    m.overlap = 0;
    return m;
}

ModeSchedule segment_modes(int segment_index, int frames, int overlap, int shift, double alpha) {
    ModeSchedule m;
    m.overlap = segment_index > 1 ? overlap : 0;
    m.shift = shift;
    m.alpha = alpha;
    m.frame_modes.resize(static_cast<size_t>(frames));
    for (int i = 1; i <= frames; ++i)
        m.frame_modes[i - 1] = attention_mode_for(i, segment_index, m.overlap, shift);
    return m;
}

void validate_modes(const ModeSchedule& m, int num_refs) {
    int n = static_cast<int>(m.frame_modes.size());
    if (n < 1) throw ConfigError("mode schedule: empty");
    if (num_refs < 1) throw ConfigError("mode schedule: reference bundle must have >= 1 entry");
    bool any_prev = false;
    for (int i = 1; i <= n; ++i) {
        FrameAttentionMode mode = m.frame_modes[i - 1];
        if (mode == FrameAttentionMode::OverlapAmplified) {
            if (i > m.overlap)
                throw ConfigError("mode schedule: OverlapAmplified on frame " + std::to_string(i) +
                                  " > overlap " + std::to_string(m.overlap));
            if (num_refs < 1 + i)
                throw ConfigError("mode schedule: frame " + std::to_string(i) +
                                  " needs previous-result entry; bundle holds " +
                                  std::to_string(num_refs));
        } else if (mode == FrameAttentionMode::PrevReference) {
            any_prev = true;
            if (i <= m.overlap)
                throw ConfigError("mode schedule: PrevReference on overlapped frame " +
                                  std::to_string(i));
            if (i - m.shift < 1)
                throw ConfigError("mode schedule: frame " + std::to_string(i) + " with shift " +
                                  std::to_string(m.shift) + " points before frame 1");
        }
    }
    if (any_prev && (m.shift < 1 || m.shift > m.overlap))
        throw ConfigError("mode schedule: shift " + std::to_string(m.shift) +
                          " must be in [1, overlap=" + std::to_string(m.overlap) + "]");
    if (m.overlap > 0 && num_refs != 1 + m.overlap)
        throw ConfigError("mode schedule: overlap " + std::to_string(m.overlap) + " needs " +
                          std::to_string(1 + m.overlap) + " reference entries, got " +
                          std::to_string(num_refs));
}

}  // namespace lvc
