#pragma once

#include <vector>

#include "common/errors.hpp"

namespace lvc {

// Per-frame spatial-attention behavior.
//   Standard:         keys/values = [own tokens, global-reference tokens]
//   OverlapAmplified: keys/values = [own tokens, own-previous-result tokens],
//                     previous-result logits raised by ln(alpha)
//   PrevReference:    keys/values = [frame (i-shift) tokens, global-reference tokens]
enum class FrameAttentionMode { Standard, OverlapAmplified, PrevReference };

struct ModeSchedule {
    std::vector<FrameAttentionMode> frame_modes;  // size N, frame i is 1-based index i-1
    int overlap = 0;  // previous-result reference entries; 0 for the first segment
    int shift = 3;
    double alpha = 10.0;
    bool amplify_scales_keys = false;  // literal key-scaling reading of the amplification
    bool reference_attention = true;   // false: plain self-attention everywhere (ablation)
};

// Segment 1 -> Standard everywhere; segment n>1 -> OverlapAmplified for
// i <= overlap, PrevReference for i > overlap.
FrameAttentionMode attention_mode_for(int frame_i, int segment_index, int overlap, int shift);

ModeSchedule standard_modes(int frames);
ModeSchedule segment_modes(int segment_index, int frames, int overlap, int shift,
                           double alpha = 10.0);

// Consistency with the reference bundle size; throws on violations.
void validate_modes(const ModeSchedule& modes, int num_refs);

}  // namespace lvc
