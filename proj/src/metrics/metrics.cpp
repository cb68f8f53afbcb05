#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lvc::metrics {

namespace {

float sample_clamped(std::span<const float> plane, int64_t H, int64_t W, double y, double x) {
    // bilinear with border clamp, lerp form so equal neighbors reproduce exactly
    double cx = std::clamp(x, 0.0, static_cast<double>(W - 1));
    double cy = std::clamp(y, 0.0, static_cast<double>(H - 1));
    int64_t x0 = static_cast<int64_t>(std::floor(cx));
    int64_t y0 = static_cast<int64_t>(std::floor(cy));
    int64_t x1 = std::min(x0 + 1, W - 1);
    int64_t y1 = std::min(y0 + 1, H - 1);
    float fx = static_cast<float>(cx - x0), fy = static_cast<float>(cy - y0);
    float a = plane[y0 * W + x0], b = plane[y0 * W + x1];
    float c = plane[y1 * W + x0], d = plane[y1 * W + x1];
    float top = a + fx * (b - a);
    float bot = c + fx * (d - c);
    return top + fy * (bot - top);
}

}  // namespace

Tensor<float> warp(const Tensor<float>& frame, const Tensor<float>& flow) {
    if (frame.rank() != 3)
        throw ShapeError("warp: expected [C,H,W] frame, got " + shape_str(frame.shape()));
    int64_t C = frame.dim(0), H = frame.dim(1), W = frame.dim(2);
    if (flow.shape() != Shape{2, H, W})
        throw ShapeError("warp: flow " + shape_str(flow.shape()) + " vs frame " +
                         shape_str(frame.shape()));
    Tensor<float> out = Tensor<float>::zeros(frame.shape());
    auto dst = out.mutable_data();
    auto fl = flow.data();
    for (int64_t c = 0; c < C; ++c) {
        auto plane = frame.data().subspan(c * H * W, H * W);
        for (int64_t y = 0; y < H; ++y)
            for (int64_t x = 0; x < W; ++x) {
                double sx = x + fl[y * W + x];
                double sy = y + fl[H * W + y * W + x];
                dst[(c * H + y) * W + x] = sample_clamped(plane, H, W, sy, sx);
            }
    }
    return out;
}

Tensor<float> resize_bilinear(const Tensor<float>& img, int64_t out_h, int64_t out_w) {
    if (img.rank() != 3) throw ShapeError("resize: expected [C,H,W]");
    int64_t C = img.dim(0), H = img.dim(1), W = img.dim(2);
    if (H == out_h && W == out_w) return img.detach();
    Tensor<float> out = Tensor<float>::zeros({C, out_h, out_w});
    auto dst = out.mutable_data();
    double sy = static_cast<double>(H) / out_h, sx = static_cast<double>(W) / out_w;
    for (int64_t c = 0; c < C; ++c) {
        auto plane = img.data().subspan(c * H * W, H * W);
        for (int64_t y = 0; y < out_h; ++y)
            for (int64_t x = 0; x < out_w; ++x) {
                double srcy = (y + 0.5) * sy - 0.5;
                double srcx = (x + 0.5) * sx - 0.5;
                dst[(c * out_h + y) * out_w + x] = sample_clamped(plane, H, W, srcy, srcx);
            }
    }
    return out;
}

Tensor<float> resize_flow(const Tensor<float>& flow, int64_t out_h, int64_t out_w) {
    if (flow.rank() != 3 || flow.dim(0) != 2) throw ShapeError("resize_flow: expected [2,H,W]");
    Tensor<float> r = resize_bilinear(flow, out_h, out_w);
    float fx = static_cast<float>(out_w) / static_cast<float>(flow.dim(2));
    float fy = static_cast<float>(out_h) / static_cast<float>(flow.dim(1));
    auto d = r.mutable_data();
    int64_t plane = out_h * out_w;
    for (int64_t p = 0; p < plane; ++p) d[p] *= fx;
    for (int64_t p = 0; p < plane; ++p) d[plane + p] *= fy;
    return r;
}

namespace {

double l2_norm(std::span<const float> v) {
    double acc = 0.0;
    for (float x : v) acc += static_cast<double>(x) * x;
    return std::sqrt(acc);
}

double l2_diff(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = static_cast<double>(a[i]) - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

TcReport tc(const std::vector<Tensor<float>>& generated,
            const std::vector<Tensor<float>>& original,
            const std::vector<Tensor<float>>& flows, int64_t eval_size) {
    if (generated.size() < 2 || generated.size() != original.size())
        throw ConfigError("tc: need >= 2 frames and matching sequence lengths");
    if (flows.size() + 1 != generated.size())
        throw ConfigError("tc: need one flow per consecutive frame pair");
    const double eps = 1e-8;
    TcReport rep;
    double acc = 0.0;
    for (size_t t = 0; t + 1 < generated.size(); ++t) {
        Tensor<float> g0 = resize_bilinear(generated[t], eval_size, eval_size);
        Tensor<float> g1 = resize_bilinear(generated[t + 1], eval_size, eval_size);
        Tensor<float> o0 = resize_bilinear(original[t], eval_size, eval_size);
        Tensor<float> o1 = resize_bilinear(original[t + 1], eval_size, eval_size);
        Tensor<float> fl = resize_flow(flows[t], eval_size, eval_size);
        Tensor<float> gw = warp(g0, fl);
        Tensor<float> ow = warp(o0, fl);
        double gnorm = l2_norm(g1.data()), onorm = l2_norm(o1.data());
        double oerr = l2_diff(ow.data(), o1.data());
        bool guard = gnorm < eps || onorm < eps || oerr < eps;
        if (guard) ++rep.guarded;
        double rg = l2_diff(gw.data(), g1.data()) / std::max(gnorm, eps);
        double ro = oerr / std::max(onorm, eps);
        acc += rg / std::max(ro, eps);
        ++rep.pairs;
    }
    rep.value = acc / rep.pairs;
    return rep;
}

std::vector<double> edt(const Tensor<float>& mask) {
    if (mask.rank() != 3 || mask.dim(0) != 1)
        throw ShapeError("edt: expected [1,H,W] mask, got " + shape_str(mask.shape()));
    int64_t H = mask.dim(1), W = mask.dim(2);
    auto src = mask.data();
    const double kInf = 1e18;
    std::vector<double> f(static_cast<size_t>(H) * W);
    bool any = false;
    for (int64_t p = 0; p < H * W; ++p) {
        bool on = src[p] > 0.5f;
        any |= on;
        f[p] = on ? 0.0 : kInf;
    }
    if (!any) throw NumericError("edt: mask has no line pixels");

    // 1-D squared-distance lower envelope (applied per column, then per row)
    auto dt1d = [kInf](const std::vector<double>& fv, std::vector<double>& out) {
        int n = static_cast<int>(fv.size());
        std::vector<int> v(n);
        std::vector<double> z(n + 1);
        int k = 0;
        v[0] = 0;
        z[0] = -kInf;
        z[1] = kInf;
        for (int q = 1; q < n; ++q) {
            double s;
            for (;;) {
                s = ((fv[q] + q * q) - (fv[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
                if (s <= z[k]) {
                    --k;
                    continue;
                }
                break;
            }
            ++k;
            v[k] = q;
            z[k] = s;
            z[k + 1] = kInf;
        }
        k = 0;
        for (int q = 0; q < n; ++q) {
            while (z[k + 1] < q) ++k;
            double d = q - v[k];
            out[q] = d * d + fv[v[k]];
        }
    };

    std::vector<double> col(static_cast<size_t>(H)), colo(static_cast<size_t>(H));
    for (int64_t x = 0; x < W; ++x) {
        for (int64_t y = 0; y < H; ++y) col[y] = f[y * W + x];
        dt1d(col, colo);
        for (int64_t y = 0; y < H; ++y) f[y * W + x] = colo[y];
    }
    std::vector<double> row(static_cast<size_t>(W)), rowo(static_cast<size_t>(W));
    for (int64_t y = 0; y < H; ++y) {
        for (int64_t x = 0; x < W; ++x) row[x] = f[y * W + x];
        dt1d(row, rowo);
        for (int64_t x = 0; x < W; ++x) f[y * W + x] = rowo[x];
    }
    for (auto& d : f) d = std::sqrt(d);
    return f;
}

namespace {

Tensor<float> upsample_nearest_mask(const Tensor<float>& mask, int64_t out_h, int64_t out_w) {
    int64_t H = mask.dim(1), W = mask.dim(2);
    if (H == out_h && W == out_w) return mask.detach();
    Tensor<float> out = Tensor<float>::zeros({1, out_h, out_w});
    auto dst = out.mutable_data();
    auto src = mask.data();
    for (int64_t y = 0; y < out_h; ++y)
        for (int64_t x = 0; x < out_w; ++x) {
            int64_t sy = std::min(y * H / out_h, H - 1);
            int64_t sx = std::min(x * W / out_w, W - 1);
            dst[y * out_w + x] = src[sy * W + sx];
        }
    return out;
}

bool mask_empty(const Tensor<float>& m) {
    for (float v : m.data())
        if (v > 0.5f) return false;
    return true;
}

}  // namespace

EdmdReport edmd(const std::vector<Tensor<float>>& generated_sketches,
                const std::vector<Tensor<float>>& input_sketches, int64_t eval_size) {
    if (generated_sketches.size() != input_sketches.size() || generated_sketches.empty())
        throw ConfigError("edmd: sketch sequence length mismatch");
    EdmdReport rep;
    double acc = 0.0;
    for (size_t i = 0; i < generated_sketches.size(); ++i) {
        if (mask_empty(generated_sketches[i]) || mask_empty(input_sketches[i])) {
            ++rep.skipped;
            continue;
        }
        Tensor<float> g = upsample_nearest_mask(generated_sketches[i], eval_size, eval_size);
        Tensor<float> in = upsample_nearest_mask(input_sketches[i], eval_size, eval_size);
        std::vector<double> dg = edt(g);
        std::vector<double> di = edt(in);
        double se = 0.0;
        for (size_t p = 0; p < dg.size(); ++p) {
            double d = dg[p] - di[p];
            se += d * d;
        }
        acc += std::sqrt(se / static_cast<double>(dg.size()));
        ++rep.frames;
    }
    if (rep.frames > 0) rep.value = acc / rep.frames;
    return rep;
}

double psnr(const Tensor<float>& a, const Tensor<float>& b) {
    if (a.shape() != b.shape()) throw ShapeError("psnr: shape mismatch");
    double mse = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        double d = static_cast<double>(a.data()[i]) - b.data()[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.numel());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse);
}

double ssim(const Tensor<float>& a, const Tensor<float>& b) {
    if (a.shape() != b.shape() || a.rank() != 3) throw ShapeError("ssim: expected matching [C,H,W]");
    int64_t C = a.dim(0), H = a.dim(1), W = a.dim(2);
    const int win = 11, rad = 5;
    if (H < win || W < win) throw ShapeError("ssim: image smaller than the 11x11 window");
    const double k1 = 0.01, k2 = 0.03;
    const double c1 = (k1 * 1.0) * (k1 * 1.0), c2 = (k2 * 1.0) * (k2 * 1.0);

    double g[win];
    double gsum = 0.0;
    for (int i = 0; i < win; ++i) {
        double d = i - rad;
        g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        gsum += g[i];
    }
    for (int i = 0; i < win; ++i) g[i] /= gsum;

    double total = 0.0;
    int64_t count = 0;
    for (int64_t c = 0; c < C; ++c) {
        auto pa = a.data().subspan(c * H * W, H * W);
        auto pb = b.data().subspan(c * H * W, H * W);
        for (int64_t y = rad; y < H - rad; ++y)
            for (int64_t x = rad; x < W - rad; ++x) {
                double ma = 0, mb = 0, va = 0, vb = 0, cov = 0;
                for (int i = 0; i < win; ++i)
                    for (int j = 0; j < win; ++j) {
                        double wgt = g[i] * g[j];
                        double sa = pa[(y + i - rad) * W + (x + j - rad)];
                        double sb = pb[(y + i - rad) * W + (x + j - rad)];
                        ma += wgt * sa;
                        mb += wgt * sb;
                        va += wgt * sa * sa;
                        vb += wgt * sb * sb;
                        cov += wgt * sa * sb;
                    }
                va -= ma * ma;
                vb -= mb * mb;
                cov -= ma * mb;
                double s = ((2 * ma * mb + c1) * (2 * cov + c2)) /
                           ((ma * ma + mb * mb + c1) * (va + vb + c2));
                total += s;
                ++count;
            }
    }
    return total / static_cast<double>(count);
}

}  // namespace lvc::metrics
