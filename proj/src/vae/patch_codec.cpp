#include "vae/patch_codec.hpp"

namespace lvc::vae {

Tensor<float> encode(const Tensor<float>& frame) {
    if (frame.rank() != 3 || frame.dim(0) != 3)
        throw ShapeError("vae encode: expected [3,H,W], got " + shape_str(frame.shape()));
    int64_t H = frame.dim(1), W = frame.dim(2);
    if (H % kPatch != 0 || W % kPatch != 0)
        throw ShapeError("vae encode: H and W must be divisible by 4, got " +
                         shape_str(frame.shape()));
    int64_t h = H / kPatch, w = W / kPatch;
    Tensor<float> out = Tensor<float>::zeros({kLatentChannels, h, w});
    auto dst = out.mutable_data();
    auto src = frame.data();
    for (int64_t c = 0; c < 3; ++c)
        for (int py = 0; py < kPatch; ++py)
            for (int px = 0; px < kPatch; ++px) {
                int64_t ch = (c * kPatch + py) * kPatch + px;
                for (int64_t y = 0; y < h; ++y)
                    for (int64_t x = 0; x < w; ++x) {
                        float v = src[(c * H + (y * kPatch + py)) * W + (x * kPatch + px)];
                        dst[(ch * h + y) * w + x] = (v - 0.5f) * 2.0f;
                    }
            }
    return out;
}

Tensor<float> decode(const Tensor<float>& latent) {
    if (latent.rank() != 3 || latent.dim(0) != kLatentChannels)
        throw ShapeError("vae decode: expected [48,h,w], got " + shape_str(latent.shape()));
    int64_t h = latent.dim(1), w = latent.dim(2);
    int64_t H = h * kPatch, W = w * kPatch;
    Tensor<float> out = Tensor<float>::zeros({3, H, W});
    auto dst = out.mutable_data();
    auto src = latent.data();
    for (int64_t c = 0; c < 3; ++c)
        for (int py = 0; py < kPatch; ++py)
            for (int px = 0; px < kPatch; ++px) {
                int64_t ch = (c * kPatch + py) * kPatch + px;
                for (int64_t y = 0; y < h; ++y)
                    for (int64_t x = 0; x < w; ++x) {
                        float v = src[(ch * h + y) * w + x];
                        dst[(c * H + (y * kPatch + py)) * W + (x * kPatch + px)] =
                            v * 0.5f + 0.5f;
                    }
            }
    return out;
}

}  // namespace lvc::vae
