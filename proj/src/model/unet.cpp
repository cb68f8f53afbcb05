#include "model/unet.hpp"

#include <cmath>

#include "common/rng.hpp"

namespace lvc {

const std::vector<std::string>& encoder_prefixes() {
    static const std::vector<std::string> v = {
        "stem",      "enc0.res",  "enc0.sattn", "enc0.tattn", "enc0.tconv", "down",
        "mid.res1",  "mid.sattn", "mid.tattn",  "mid.tconv",  "mid.res2",
    };
    return v;
}

namespace {

template <typename T>
Tensor<T> kaiming_conv(Shape shape, std::mt19937_64& rng) {
    int64_t fan_in = 1;
    for (size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Tensor<T> t = Tensor<T>::zeros(std::move(shape));
    fill_uniform<T>(t.mutable_data(), rng, -bound, bound);
    return t;
}

template <typename T>
struct Builder {
    ParamStore<T>& ps;
    std::mt19937_64& rng;

    void conv(const std::string& name, int64_t o, int64_t i, int64_t k) {
        ps.add(name + ".w", kaiming_conv<T>({o, i, k, k}, rng));
        ps.add(name + ".b", Tensor<T>::zeros({o}));
    }
    void lin(const std::string& name, int64_t o, int64_t i) {
        ps.add(name + ".w", kaiming_conv<T>({o, i}, rng));
        ps.add(name + ".b", Tensor<T>::zeros({o}));
    }
    void gn(const std::string& name, int64_t c) {
        ps.add(name + ".g", Tensor<T>::full({c}, T(1)));
        ps.add(name + ".b", Tensor<T>::zeros({c}));
    }
    void attn(const std::string& prefix, int64_t c) {
        gn(prefix + ".gn", c);
        lin(prefix + ".q", c, c);
        lin(prefix + ".k", c, c);
        lin(prefix + ".v", c, c);
        lin(prefix + ".o", c, c);
    }
    void res(const std::string& prefix, int64_t cin, int64_t cout, int64_t emb) {
        gn(prefix + ".gn1", cin);
        conv(prefix + ".conv1", cout, cin, 3);
        lin(prefix + ".emb", cout, emb);
        gn(prefix + ".gn2", cout);
        conv(prefix + ".conv2", cout, cout, 3);
        if (cin != cout) conv(prefix + ".skip", cout, cin, 1);
    }
    void tconv(const std::string& prefix, int64_t c) {
        ps.add(prefix + ".w", kaiming_conv<T>({c, c, 3}, rng));
        ps.add(prefix + ".b", Tensor<T>::zeros({c}));
    }
    void zero_conv(const std::string& name, int64_t o, int64_t i, int64_t k) {
        ps.add(name + ".w", Tensor<T>::zeros({o, i, k, k}));
        ps.add(name + ".b", Tensor<T>::zeros({o}));
    }
};

}  // namespace

template <typename T>
ParamStore<T> build_params(const DenoiserConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    ParamStore<T> ps;
    Builder<T> b{ps, rng};
    int64_t c0 = cfg.level_channels(0), c1 = cfg.level_channels(1);
    int64_t cl = cfg.latent_channels, e = cfg.emb_dim;

    b.lin("unet.time.fc1", e, e);
    b.lin("unet.time.fc2", e, e);
    b.conv("unet.stem", c0, 2 * cl, 3);
    b.res("unet.enc0.res", c0, c0, e);
    b.attn("unet.enc0.sattn", c0);
    b.attn("unet.enc0.tattn", c0);
    b.tconv("unet.enc0.tconv", c0);
    b.conv("unet.down", c1, c0, 3);
    b.res("unet.mid.res1", c1, c1, e);
    b.attn("unet.mid.sattn", c1);
    b.attn("unet.mid.tattn", c1);
    b.tconv("unet.mid.tconv", c1);
    b.res("unet.mid.res2", c1, c1, e);
    b.conv("unet.up", c0, c1, 3);
    b.res("unet.dec0.res", 2 * c0, c0, e);
    b.gn("unet.head.gn", c0);
    b.conv("unet.head.conv", cl, c0, 3);

    // ControlNet branch: bit-exact clone of the encoder weights.
    std::vector<std::pair<std::string, Tensor<T>>> clones;
    for (const auto& prefix : encoder_prefixes()) {
        std::string from = "unet." + prefix;
        for (const auto& [name, t] : ps)
            if (name.rfind(from, 0) == 0 &&
                (name.size() == from.size() || name[from.size()] == '.'))
                clones.emplace_back("ctrl." + name.substr(5), t.detach());
    }
    for (auto& [name, t] : clones) ps.add(name, std::move(t));

    // Sketch encoding and ControlNet output projections start as no-ops.
    b.zero_conv("ctrl.sketch.enc1", cfg.sketch_feat_channels, cfg.sketch_channels, 3);
    b.zero_conv("ctrl.sketch.enc2", cfg.sketch_feat_channels, cfg.sketch_feat_channels, 3);
    b.zero_conv("ctrl.sketch.proj", c0, cfg.sketch_feat_channels, 3);
    b.zero_conv("ctrl.tap0", c0, c0, 1);
    b.zero_conv("ctrl.tap1", c1, c1, 1);
    return ps;
}

namespace {

template <typename T>
Tensor<T> sinusoidal_embed(T value, int dim) {
    std::vector<T> v(static_cast<size_t>(dim));
    int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
        v[i] = static_cast<T>(std::sin(static_cast<double>(value) * freq));
        v[half + i] = static_cast<T>(std::cos(static_cast<double>(value) * freq));
    }
    return Tensor<T>::from_data({dim}, std::move(v));
}

template <typename T>
struct Net {
    const ParamStore<T>& ps;
    const DenoiserConfig& cfg;

    const Tensor<T>& p(const std::string& name) const { return ps.at(name); }

    Tensor<T> resblock(const std::string& prefix, const Tensor<T>& x, const Tensor<T>& emb) const {
        int groups = cfg.norm_groups;
        Tensor<T> h = conv2d(silu(group_norm(x, groups, p(prefix + ".gn1.g"), p(prefix + ".gn1.b"))),
                             p(prefix + ".conv1.w"), p(prefix + ".conv1.b"), 1, 1);
        Tensor<T> eb = linear(silu(emb), p(prefix + ".emb.w"), p(prefix + ".emb.b"));
        h = add_channel_bias(h, reshape(eb, {eb.numel()}));
        h = conv2d(silu(group_norm(h, groups, p(prefix + ".gn2.g"), p(prefix + ".gn2.b"))),
                   p(prefix + ".conv2.w"), p(prefix + ".conv2.b"), 1, 1);
        Tensor<T> skip = x;
        if (ps.contains(prefix + ".skip.w"))
            skip = conv2d(x, p(prefix + ".skip.w"), p(prefix + ".skip.b"), 1, 0);
        return add(h, skip);
    }

    // q[B,Tq,C] x k,v[B,Tk,C]; bias rows are per (batch*head).
    Tensor<T> mha(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, int heads,
                  const Tensor<T>* bias) const {
        int64_t B = q.dim(0), tq = q.dim(1), C = q.dim(2), tk = k.dim(1);
        int64_t dh = C / heads;
        auto split = [&](const Tensor<T>& t, int64_t len) {
            return reshape(permute(reshape(t, {B, len, heads, dh}), {0, 2, 1, 3}),
                           {B * heads, len, dh});
        };
        Tensor<T> logits = scale(bmm_nt(split(q, tq), split(k, tk)),
                                 static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh))));
        if (bias) logits = add_bias_bm(logits, *bias);
        Tensor<T> out = bmm(softmax_lastdim(logits), split(v, tk));
        return reshape(permute(reshape(out, {B, heads, tq, dh}), {0, 2, 1, 3}), {B, tq, C});
    }

    Tensor<T> spatial_attention(const std::string& prefix, const Tensor<T>& x,
                                const ModeSchedule& modes, int num_refs) const {
        int64_t F = x.dim(0), C = x.dim(1), h = x.dim(2), w = x.dim(3), P = h * w;
        int R = num_refs;
        int N = static_cast<int>(F) - R;
        int heads = cfg.heads_for(static_cast<int>(C));
        Tensor<T> xn = group_norm(x, cfg.norm_groups, p(prefix + ".gn.g"), p(prefix + ".gn.b"));
        Tensor<T> tok = reshape(permute(xn, {0, 2, 3, 1}), {F, P, C});
        Tensor<T> q = linear(tok, p(prefix + ".q.w"), p(prefix + ".q.b"));
        Tensor<T> k = linear(tok, p(prefix + ".k.w"), p(prefix + ".k.b"));
        Tensor<T> v = linear(tok, p(prefix + ".v.w"), p(prefix + ".v.b"));

        // Reference entries attend to their own tokens.
        Tensor<T> ref_out = mha(slice(q, 0, 0, R), slice(k, 0, 0, R), slice(v, 0, 0, R), heads,
                                nullptr);
        Tensor<T> out_tok;
        if (N == 0) {
            out_tok = ref_out;
        } else if (!modes.reference_attention) {
            Tensor<T> vid_out = mha(slice(q, 0, R, N), slice(k, 0, R, N), slice(v, 0, R, N),
                                    heads, nullptr);
            out_tok = concat<T>({ref_out, vid_out}, 0);
        } else {
            std::vector<Tensor<T>> ks, vs;
            bool any_bias = false;
            for (int i = 1; i <= N; ++i) {
                int64_t f = R + i - 1;
                Tensor<T> own_k = slice(k, 0, f, 1);
                Tensor<T> own_v = slice(v, 0, f, 1);
                switch (modes.frame_modes[i - 1]) {
                    case FrameAttentionMode::Standard:
                        ks.push_back(concat<T>({own_k, slice(k, 0, 0, 1)}, 1));
                        vs.push_back(concat<T>({own_v, slice(v, 0, 0, 1)}, 1));
                        break;
                    case FrameAttentionMode::OverlapAmplified: {
                        Tensor<T> pk = slice(k, 0, i, 1);
                        if (modes.amplify_scales_keys)
                            pk = scale(pk, static_cast<T>(std::log(modes.alpha)));
                        else
                            any_bias = true;
                        ks.push_back(concat<T>({own_k, pk}, 1));
                        vs.push_back(concat<T>({own_v, slice(v, 0, i, 1)}, 1));
                        break;
                    }
                    case FrameAttentionMode::PrevReference: {
                        int64_t src = R + (i - modes.shift) - 1;
                        ks.push_back(concat<T>({slice(k, 0, src, 1), slice(k, 0, 0, 1)}, 1));
                        vs.push_back(concat<T>({slice(v, 0, src, 1), slice(v, 0, 0, 1)}, 1));
                        break;
                    }
                }
            }
            Tensor<T> k_sel = concat<T>(ks, 0);
            Tensor<T> v_sel = concat<T>(vs, 0);
            Tensor<T> q_vid = slice(q, 0, R, N);
            Tensor<T> vid_out;
            if (any_bias) {
                // ln(alpha) on previous-result columns of amplified frames
                T la = static_cast<T>(std::log(modes.alpha));
                std::vector<T> bias(static_cast<size_t>(N) * heads * 2 * P, T(0));
                for (int i = 1; i <= N; ++i)
                    if (modes.frame_modes[i - 1] == FrameAttentionMode::OverlapAmplified &&
                        !modes.amplify_scales_keys)
                        for (int hd = 0; hd < heads; ++hd)
                            for (int64_t t = 0; t < P; ++t)
                                bias[(((i - 1) * heads + hd) * 2 + 1) * P + t] = la;
                Tensor<T> bias_t =
                    Tensor<T>::from_data({static_cast<int64_t>(N) * heads, 2 * P}, std::move(bias));
                vid_out = mha(q_vid, k_sel, v_sel, heads, &bias_t);
            } else {
                vid_out = mha(q_vid, k_sel, v_sel, heads, nullptr);
            }
            out_tok = concat<T>({ref_out, vid_out}, 0);
        }
        Tensor<T> proj = linear(out_tok, p(prefix + ".o.w"), p(prefix + ".o.b"));
        return add(x, permute(reshape(proj, {F, h, w, C}), {0, 3, 1, 2}));
    }

    // 1-D self-attention across the N video frames at fixed spatial position;
    // reference entries pass through untouched.
    Tensor<T> temporal_attention(const std::string& prefix, const Tensor<T>& x,
                                 int num_refs) const {
        int64_t F = x.dim(0), C = x.dim(1), h = x.dim(2), w = x.dim(3), P = h * w;
        int64_t N = F - num_refs;
        if (N == 0) return x;
        Tensor<T> xv = slice(x, 0, num_refs, N);
        Tensor<T> xn = group_norm(xv, cfg.norm_groups, p(prefix + ".gn.g"), p(prefix + ".gn.b"));
        Tensor<T> tok = reshape(permute(xn, {2, 3, 0, 1}), {P, N, C});
        Tensor<T> q = linear(tok, p(prefix + ".q.w"), p(prefix + ".q.b"));
        Tensor<T> k = linear(tok, p(prefix + ".k.w"), p(prefix + ".k.b"));
        Tensor<T> v = linear(tok, p(prefix + ".v.w"), p(prefix + ".v.b"));
        Tensor<T> out = mha(q, k, v, cfg.heads_for(static_cast<int>(C)), nullptr);
        Tensor<T> proj = linear(out, p(prefix + ".o.w"), p(prefix + ".o.b"));
        Tensor<T> back = permute(reshape(proj, {h, w, N, C}), {2, 3, 0, 1});
        Tensor<T> out_v = add(xv, back);
        if (num_refs == 0) return out_v;
        return concat<T>({slice(x, 0, 0, num_refs), out_v}, 0);
    }

    Tensor<T> temporal_conv(const std::string& prefix, const Tensor<T>& x, int num_refs) const {
        int64_t F = x.dim(0), C = x.dim(1), h = x.dim(2), w = x.dim(3);
        int64_t N = F - num_refs;
        if (N == 0) return x;
        Tensor<T> xv = slice(x, 0, num_refs, N);
        Tensor<T> x5 = reshape(permute(xv, {1, 0, 2, 3}), {1, C, N, h, w});
        Tensor<T> y5 = temporal_conv3d(x5, p(prefix + ".w"), p(prefix + ".b"));
        Tensor<T> y = permute(reshape(y5, {C, N, h, w}), {1, 0, 2, 3});
        Tensor<T> out_v = add(xv, y);
        if (num_refs == 0) return out_v;
        return concat<T>({slice(x, 0, 0, num_refs), out_v}, 0);
    }

    // Shared encoder body for the base branch ("unet.") and the ControlNet
    // clone ("ctrl."). Returns {level0 features, mid features}.
    std::pair<Tensor<T>, Tensor<T>> encoder(const std::string& root, Tensor<T> hin,
                                            const Tensor<T>& emb, const ModeSchedule& modes,
                                            int num_refs) const {
        Tensor<T> h = resblock(root + ".enc0.res", hin, emb);
        h = spatial_attention(root + ".enc0.sattn", h, modes, num_refs);
        h = temporal_attention(root + ".enc0.tattn", h, num_refs);
        h = temporal_conv(root + ".enc0.tconv", h, num_refs);
        Tensor<T> lvl0 = h;
        h = conv2d(h, p(root + ".down.w"), p(root + ".down.b"), 2, 1);
        h = resblock(root + ".mid.res1", h, emb);
        h = spatial_attention(root + ".mid.sattn", h, modes, num_refs);
        h = temporal_attention(root + ".mid.tattn", h, num_refs);
        h = temporal_conv(root + ".mid.tconv", h, num_refs);
        h = resblock(root + ".mid.res2", h, emb);
        return {lvl0, h};
    }
};

}  // namespace

template <typename T>
Tensor<T> unet_forward(const ParamStore<T>& params, const DenoiserConfig& cfg, const Tensor<T>& x,
                       const Tensor<T>& sketches, T c_noise, const ModeSchedule& modes,
                       int num_refs, bool use_controlnet) {
    cfg.validate();
    validate_modes(modes, num_refs);
    int64_t F = x.dim(0);
    int N = static_cast<int>(modes.frame_modes.size());
    if (x.rank() != 4 || x.dim(1) != 2 * cfg.latent_channels)
        throw ShapeError("unet_forward: input must be [F," +
                         std::to_string(2 * cfg.latent_channels) + ",h,w], got " +
                         shape_str(x.shape()));
    if (F != num_refs + N)
        throw ShapeError("unet_forward: " + std::to_string(F) + " entries != " +
                         std::to_string(num_refs) + " refs + " + std::to_string(N) + " frames");
    int64_t h = x.dim(2), w = x.dim(3);
    if (h % 2 != 0 || w % 2 != 0)
        throw ShapeError("unet_forward: latent dims must be even, got " + shape_str(x.shape()));
    if (sketches.rank() != 4 || sketches.dim(0) != F || sketches.dim(1) != cfg.sketch_channels ||
        sketches.dim(2) != 4 * h || sketches.dim(3) != 4 * w)
        throw ShapeError("unet_forward: sketches must be [F," +
                         std::to_string(cfg.sketch_channels) + "," + std::to_string(4 * h) + "," +
                         std::to_string(4 * w) + "], got " + shape_str(sketches.shape()));
    for (T val : {c_noise})
        if (!std::isfinite(static_cast<double>(val)))
            throw NumericError("unet_forward: non-finite c_noise");

    Net<T> net{params, cfg};
    Tensor<T> emb = reshape(sinusoidal_embed<T>(c_noise, cfg.emb_dim), {1, cfg.emb_dim});
    emb = linear(silu(linear(emb, params.at("unet.time.fc1.w"), params.at("unet.time.fc1.b"))),
                 params.at("unet.time.fc2.w"), params.at("unet.time.fc2.b"));

    Tensor<T> h0 = conv2d(x, params.at("unet.stem.w"), params.at("unet.stem.b"), 1, 1);
    auto [skip0, mid] = net.encoder("unet", h0, emb, modes, num_refs);

    if (use_controlnet) {
        Tensor<T> sk = silu(conv2d(sketches, params.at("ctrl.sketch.enc1.w"),
                                   params.at("ctrl.sketch.enc1.b"), 2, 1));
        sk = silu(conv2d(sk, params.at("ctrl.sketch.enc2.w"), params.at("ctrl.sketch.enc2.b"), 2, 1));
        Tensor<T> c0 = add(conv2d(x, params.at("ctrl.stem.w"), params.at("ctrl.stem.b"), 1, 1),
                           conv2d(sk, params.at("ctrl.sketch.proj.w"),
                                  params.at("ctrl.sketch.proj.b"), 1, 1));
        auto [clvl0, cmid] = net.encoder("ctrl", c0, emb, modes, num_refs);
        skip0 = add(skip0, conv2d(clvl0, params.at("ctrl.tap0.w"), params.at("ctrl.tap0.b"), 1, 0));
        mid = add(mid, conv2d(cmid, params.at("ctrl.tap1.w"), params.at("ctrl.tap1.b"), 1, 0));
    }

    Tensor<T> u = conv2d(upsample_nearest2x(mid), params.at("unet.up.w"), params.at("unet.up.b"),
                         1, 1);
    u = concat<T>({u, skip0}, 1);
    u = net.resblock("unet.dec0.res", u, emb);
    u = silu(group_norm(u, cfg.norm_groups, params.at("unet.head.gn.g"),
                        params.at("unet.head.gn.b")));
    return conv2d(u, params.at("unet.head.conv.w"), params.at("unet.head.conv.b"), 1, 1);
}

template ParamStore<float> build_params<float>(const DenoiserConfig&, std::mt19937_64&);
template ParamStore<double> build_params<double>(const DenoiserConfig&, std::mt19937_64&);
template Tensor<float> unet_forward<float>(const ParamStore<float>&, const DenoiserConfig&,
                                           const Tensor<float>&, const Tensor<float>&, float,
                                           const ModeSchedule&, int, bool);
template Tensor<double> unet_forward<double>(const ParamStore<double>&, const DenoiserConfig&,
                                             const Tensor<double>&, const Tensor<double>&, double,
                                             const ModeSchedule&, int, bool);

}  // namespace lvc
