#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "common/errors.hpp"

namespace lvc {

struct DenoiserConfig {
    int base_channels = 32;
    std::vector<int> channel_mult = {1, 2};  // two levels: full-res and half-res
    int frames = 14;                         // N video frames per segment
    int head_dim = 32;
    int latent_channels = 48;
    int sketch_channels = 1;
    int emb_dim = 64;
    int sketch_feat_channels = 8;
    int norm_groups = 8;

    int level_channels(int level) const { return base_channels * channel_mult[level]; }

    void validate() const {
        if (base_channels < 1 || frames < 2 || head_dim < 1 || latent_channels < 1 ||
            sketch_channels < 1 || emb_dim < 2 || sketch_feat_channels < 1 || norm_groups < 1)
            throw ConfigError("model config: all sizes must be positive (frames >= 2)");
        if (channel_mult.size() != 2) throw ConfigError("model config: expected 2 channel levels");
        if (emb_dim % 2 != 0) throw ConfigError("model config: emb_dim must be even");
        for (int l = 0; l < 2; ++l) {
            int c = level_channels(l);
            if (c % norm_groups != 0)
                throw ConfigError("model config: norm_groups " + std::to_string(norm_groups) +
                                  " does not divide channels " + std::to_string(c));
            if (c >= head_dim && c % head_dim != 0)
                throw ConfigError("model config: head_dim " + std::to_string(head_dim) +
                                  " does not divide channels " + std::to_string(c));
        }
    }

    int heads_for(int channels) const { return channels >= head_dim ? channels / head_dim : 1; }
};

}  // namespace lvc
