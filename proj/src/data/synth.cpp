#include "data/synth.hpp"

#include <cmath>
#include <random>

#include "common/rng.hpp"

namespace lvc::data {

namespace {

struct Waypoint {
    double t;  // frame index
    double x, y;
};

struct Shape {
    enum class Kind { Ellipse, Polygon } kind;
    std::array<float, 3> color;
    double rx = 6, ry = 6;                    // base radii
    std::vector<std::array<double, 2>> poly;  // vertices relative to center
    std::vector<Waypoint> path;               // piecewise-linear center trajectory
    double scale0 = 1.0, scale1 = 1.0;        // linear in t over the clip

    void center_at(double t, double last, double* cx, double* cy) const {
        (void)last;
        for (size_t i = 0; i + 1 < path.size(); ++i) {
            if (t <= path[i + 1].t || i + 2 == path.size()) {
                double span = path[i + 1].t - path[i].t;
                double f = span > 0 ? (t - path[i].t) / span : 0.0;
                *cx = path[i].x + f * (path[i + 1].x - path[i].x);
                *cy = path[i].y + f * (path[i + 1].y - path[i].y);
                return;
            }
        }
        *cx = path.back().x;
        *cy = path.back().y;
    }

    double scale_at(double t, double last) const {
        double f = last > 0 ? t / last : 0.0;
        return scale0 + f * (scale1 - scale0);
    }

    bool contains(double px, double py, double cx, double cy, double s) const {
        double lx = (px - cx) / s, ly = (py - cy) / s;
        if (kind == Kind::Ellipse)
            return (lx / rx) * (lx / rx) + (ly / ry) * (ly / ry) <= 1.0;
        // convex polygon, counter-clockwise
        for (size_t i = 0; i < poly.size(); ++i) {
            const auto& a = poly[i];
            const auto& b = poly[(i + 1) % poly.size()];
            double cross = (b[0] - a[0]) * (ly - a[1]) - (b[1] - a[1]) * (lx - a[0]);
            if (cross < 0) return false;
        }
        return true;
    }
};

double luminance(const std::array<float, 3>& c) {
    return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
}

// Colors restricted to {0} U [64/255, 1] so the latent codec round-trips
// bit-exactly; entities keep pairwise luminance gaps so every edge responds
// in the sketch extractor.
std::vector<std::array<float, 3>> pick_palette(std::mt19937_64& rng, int count) {
    std::uniform_int_distribution<int> byte(64, 255);
    std::uniform_int_distribution<int> dark(0, 5);
    std::vector<std::array<float, 3>> colors;
    int guard = 0;
    while (static_cast<int>(colors.size()) < count && guard < 10000) {
        ++guard;
        std::array<float, 3> c;
        for (int i = 0; i < 3; ++i)
            c[i] = dark(rng) == 0 ? 0.0f : static_cast<float>(byte(rng)) / 255.0f;
        bool ok = true;
        for (const auto& prev : colors)
            if (std::abs(luminance(prev) - luminance(c)) < 0.18) ok = false;
        if (ok) colors.push_back(c);
    }
    // relax the gap if the palette is large
    std::uniform_int_distribution<int> any_byte(64, 255);
    while (static_cast<int>(colors.size()) < count) {
        std::array<float, 3> c;
        for (int i = 0; i < 3; ++i) c[i] = static_cast<float>(any_byte(rng)) / 255.0f;
        colors.push_back(c);
    }
    return colors;
}

}  // namespace

SyntheticClip gen_clip(uint64_t seed, const ClipGenConfig& cfg) {
    if (cfg.length < 2) throw ConfigError("gen_clip: length must be >= 2");
    if (cfg.height < 8 || cfg.width < 8 || cfg.height % 4 != 0 || cfg.width % 4 != 0)
        throw ConfigError("gen_clip: H and W must be >= 8 and divisible by 4");
    if (cfg.shapes < 0) throw ConfigError("gen_clip: negative shape count");

    std::mt19937_64 rng(splitmix64(seed));
    const int H = cfg.height, W = cfg.width, L = cfg.length;
    const double last = static_cast<double>(L - 1);

    auto palette = pick_palette(rng, cfg.shapes + 1);

    std::uniform_real_distribution<double> ux(0.0, W - 1.0), uy(0.0, H - 1.0);
    std::uniform_real_distribution<double> uv(-cfg.motion_scale, cfg.motion_scale);
    std::uniform_real_distribution<double> ur(std::min(H, W) / 12.0, std::min(H, W) / 5.0);
    std::uniform_real_distribution<double> uscale(0.85, 1.2);
    std::uniform_int_distribution<int> upoly(3, 5);
    std::uniform_int_distribution<int> ukind(0, 1);
    std::uniform_int_distribution<int> ubend(0, 2);

    std::vector<Shape> shapes(static_cast<size_t>(cfg.shapes));
    for (int k = 0; k < cfg.shapes; ++k) {
        Shape& s = shapes[k];
        s.color = palette[k + 1];
        s.kind = ukind(rng) == 0 ? Shape::Kind::Ellipse : Shape::Kind::Polygon;
        s.rx = ur(rng);
        s.ry = ur(rng);
        if (s.kind == Shape::Kind::Polygon) {
            int nv = upoly(rng);
            double r = s.rx;
            for (int i = 0; i < nv; ++i) {
                double ang = 2.0 * M_PI * i / nv;
                s.poly.push_back({r * std::cos(ang), 0.8 * r * std::sin(ang)});
            }
        }
        double x0 = ux(rng), y0 = uy(rng);
        double vx = uv(rng), vy = uv(rng);
        if (cfg.use_fixed_velocity) {
            vx = cfg.fixed_vx;
            vy = cfg.fixed_vy;
        }
        s.path.push_back({0.0, x0, y0});
        if (!cfg.use_fixed_velocity && ubend(rng) == 0 && L >= 6) {
            // piecewise-linear bend mid-clip
            double tm = std::floor(last / 2.0);
            s.path.push_back({tm, x0 + vx * tm, y0 + vy * tm});
            double vx2 = uv(rng), vy2 = uv(rng);
            s.path.push_back({last, x0 + vx * tm + vx2 * (last - tm),
                              y0 + vy * tm + vy2 * (last - tm)});
        } else {
            s.path.push_back({last, x0 + vx * last, y0 + vy * last});
        }
        if (!cfg.use_fixed_velocity && cfg.allow_scale && ubend(rng) == 0) {
            s.scale0 = 1.0;
            s.scale1 = uscale(rng);
        }
    }
    // occasional position swap between a shape pair
    if (!cfg.use_fixed_velocity && cfg.shapes >= 2 && ubend(rng) == 0) {
        Shape& a = shapes[0];
        Shape& b = shapes[1];
        std::swap(a.path.back().x, b.path.back().x);
        std::swap(a.path.back().y, b.path.back().y);
    }

    SyntheticClip clip;
    clip.height = H;
    clip.width = W;
    clip.palette = palette;

    // rasterize frames and id maps
    std::vector<std::vector<std::array<double, 3>>> geo(
        static_cast<size_t>(L));  // per frame, per shape: cx, cy, scale
    for (int t = 0; t < L; ++t) {
        geo[t].resize(shapes.size());
        Tensor<float> frame = Tensor<float>::zeros({3, H, W});
        auto fd = frame.mutable_data();
        std::vector<int16_t> ids(static_cast<size_t>(H) * W, -1);
        for (size_t k = 0; k < shapes.size(); ++k) {
            double cx, cy;
            shapes[k].center_at(t, last, &cx, &cy);
            double sc = shapes[k].scale_at(t, last);
            geo[t][k] = {cx, cy, sc};
        }
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                int16_t top = -1;
                for (int k = static_cast<int>(shapes.size()) - 1; k >= 0; --k) {
                    const auto& g = geo[t][k];
                    if (shapes[k].contains(x, y, g[0], g[1], g[2])) {
                        top = static_cast<int16_t>(k);
                        break;
                    }
                }
                ids[static_cast<size_t>(y) * W + x] = top;
                const auto& c = top < 0 ? palette[0] : palette[top + 1];
                for (int ch = 0; ch < 3; ++ch)
                    fd[(ch * H + y) * W + x] = c[ch];
            }
        clip.frames.push_back(frame);
        clip.id_maps.push_back(std::move(ids));
        clip.sketches.push_back(extract_sketch(frame));
    }

    // backward flows with validity masks
    for (int t = 0; t + 1 < L; ++t) {
        Tensor<float> flow = Tensor<float>::zeros({2, H, W});
        auto fd = flow.mutable_data();
        std::vector<uint8_t> valid(static_cast<size_t>(H) * W, 0);
        const auto& id_next = clip.id_maps[t + 1];
        const auto& id_cur = clip.id_maps[t];
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                size_t at = static_cast<size_t>(y) * W + x;
                int16_t k = id_next[at];
                if (k < 0) {
                    // background: zero flow; valid when unoccluded in frame t
                    valid[at] = id_cur[at] < 0 ? 1 : 0;
                    continue;
                }
                const auto& gn = geo[t + 1][k];
                const auto& gc = geo[t][k];
                double ratio = gc[2] / gn[2];
                double sx = gc[0] + (x - gn[0]) * ratio;
                double sy = gc[1] + (y - gn[1]) * ratio;
                fd[(0 * H + y) * W + x] = static_cast<float>(sx - x);
                fd[(1 * H + y) * W + x] = static_cast<float>(sy - y);
                int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
                bool ok = x0 >= 0 && y0 >= 0 && x0 + 1 < W && y0 + 1 < H;
                for (int dy = 0; ok && dy <= 1; ++dy)
                    for (int dx = 0; ok && dx <= 1; ++dx)
                        ok = id_cur[static_cast<size_t>(y0 + dy) * W + (x0 + dx)] == k;
                valid[at] = ok ? 1 : 0;
            }
        clip.flows.push_back(flow);
        clip.flow_valid.push_back(std::move(valid));
    }
    return clip;
}

Tensor<float> extract_sketch(const Tensor<float>& frame) {
    if (frame.rank() != 3 || frame.dim(0) != 3)
        throw ShapeError("extract_sketch: expected [3,H,W], got " + shape_str(frame.shape()));
    int64_t H = frame.dim(1), W = frame.dim(2);
    auto src = frame.data();
    std::vector<float> lum(static_cast<size_t>(H) * W);
    for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < W; ++x)
            lum[y * W + x] = 0.299f * src[(0 * H + y) * W + x] +
                             0.587f * src[(1 * H + y) * W + x] +
                             0.114f * src[(2 * H + y) * W + x];

    auto at = [&](int64_t y, int64_t x) {  // clamped border
        y = std::clamp<int64_t>(y, 0, H - 1);
        x = std::clamp<int64_t>(x, 0, W - 1);
        return lum[y * W + x];
    };

    std::vector<float> mag(static_cast<size_t>(H) * W);
    std::vector<float> gxv(static_cast<size_t>(H) * W), gyv(static_cast<size_t>(H) * W);
    for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < W; ++x) {
            float gx = (at(y - 1, x + 1) + 2.0f * at(y, x + 1) + at(y + 1, x + 1)) -
                       (at(y - 1, x - 1) + 2.0f * at(y, x - 1) + at(y + 1, x - 1));
            float gy = (at(y + 1, x - 1) + 2.0f * at(y + 1, x) + at(y + 1, x + 1)) -
                       (at(y - 1, x - 1) + 2.0f * at(y - 1, x) + at(y - 1, x + 1));
            gx *= 0.25f;
            gy *= 0.25f;
            gxv[y * W + x] = gx;
            gyv[y * W + x] = gy;
            mag[y * W + x] = std::sqrt(gx * gx + gy * gy);
        }

    const float tau = 0.15f;
    Tensor<float> out = Tensor<float>::zeros({1, H, W});
    auto dst = out.mutable_data();
    auto mag_at = [&](int64_t y, int64_t x) {
        if (y < 0 || y >= H || x < 0 || x >= W) return 0.0f;
        return mag[y * W + x];
    };
    for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < W; ++x) {
            float m = mag[y * W + x];
            if (m <= tau) continue;
            // non-maximum suppression along the dominant gradient axis;
            // ties break toward the positive direction so step edges give
            // one-pixel lines
            bool horiz = std::abs(gxv[y * W + x]) >= std::abs(gyv[y * W + x]);
            float prev = horiz ? mag_at(y, x - 1) : mag_at(y - 1, x);
            float next = horiz ? mag_at(y, x + 1) : mag_at(y + 1, x);
            if (m >= prev && m > next) dst[y * W + x] = 1.0f;
        }
    return out;
}

}  // namespace lvc::data
