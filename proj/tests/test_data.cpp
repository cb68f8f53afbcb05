#include <cmath>
#include <cstring>
#include <filesystem>

#include "data/curate.hpp"
#include "data/dataset_io.hpp"
#include "data/synth.hpp"
#include "doctest.h"
#include "metrics/metrics.hpp"

using namespace lvc;
using namespace lvc::data;

namespace {

bool bits_equal(std::span<const float> a, std::span<const float> b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("gen_clip: determinism, zero-shape case, validation") {
    ClipGenConfig cfg;
    cfg.length = 6;
    cfg.height = 32;
    cfg.width = 32;
    SyntheticClip a = gen_clip(77, cfg);
    SyntheticClip b = gen_clip(77, cfg);
    REQUIRE(a.frames.size() == 6);
    REQUIRE(a.flows.size() == 5);
    REQUIRE(a.sketches.size() == 6);
    for (size_t i = 0; i < a.frames.size(); ++i)
        CHECK(bits_equal(a.frames[i].data(), b.frames[i].data()));
    for (size_t i = 0; i < a.flows.size(); ++i)
        CHECK(bits_equal(a.flows[i].data(), b.flows[i].data()));

    SyntheticClip c = gen_clip(78, cfg);
    bool differs = false;
    for (size_t i = 0; i < a.frames.size() && !differs; ++i)
        differs = !bits_equal(a.frames[i].data(), c.frames[i].data());
    CHECK(differs);

    ClipGenConfig empty = cfg;
    empty.shapes = 0;
    SyntheticClip e = gen_clip(5, empty);
    for (size_t t = 1; t < e.frames.size(); ++t)
        CHECK(bits_equal(e.frames[t].data(), e.frames[0].data()));
    for (const auto& fl : e.flows)
        for (float v : fl.data()) CHECK(v == 0.0f);

    ClipGenConfig bad = cfg;
    bad.length = 1;
    CHECK_THROWS_AS(gen_clip(1, bad), ConfigError);
    bad = cfg;
    bad.width = 30;
    CHECK_THROWS_AS(gen_clip(1, bad), ConfigError);
}

TEST_CASE("gen_clip: integer translation gives exact backward flow (-vx,-vy)") {
    ClipGenConfig cfg;
    cfg.length = 4;
    cfg.height = 32;
    cfg.width = 32;
    cfg.shapes = 1;
    cfg.use_fixed_velocity = true;
    cfg.fixed_vx = 2.0;
    cfg.fixed_vy = 0.0;
    int checked = 0;
    for (uint64_t seed : {3ull, 4ull, 5ull, 6ull}) {
        SyntheticClip clip = gen_clip(seed, cfg);
        for (size_t t = 0; t < clip.flows.size(); ++t) {
            auto fl = clip.flows[t].data();
            const auto& ids = clip.id_maps[t + 1];
            for (int64_t p = 0; p < 32 * 32; ++p) {
                if (ids[p] != 0) continue;
                CHECK(fl[p] == -2.0f);
                CHECK(fl[32 * 32 + p] == 0.0f);
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("gen_clip: warp consistency on valid pixels") {
    ClipGenConfig cfg;
    cfg.length = 8;
    cfg.height = 48;
    cfg.width = 48;
    cfg.shapes = 3;
    cfg.motion_scale = 2.5;
    for (uint64_t seed : {1ull, 9ull, 123ull}) {
        SyntheticClip clip = gen_clip(seed, cfg);
        for (size_t t = 0; t + 1 < clip.frames.size(); ++t) {
            Tensor<float> warped = metrics::warp(clip.frames[t], clip.flows[t]);
            const auto& valid = clip.flow_valid[t];
            auto w = warped.data();
            auto nx = clip.frames[t + 1].data();
            int64_t plane = 48 * 48;
            int valid_count = 0;
            for (int64_t p = 0; p < plane; ++p) {
                if (!valid[p]) continue;
                ++valid_count;
                for (int c = 0; c < 3; ++c)
                    CHECK(std::abs(w[c * plane + p] - nx[c * plane + p]) <= 1.0f / 255.0f);
            }
            CHECK(valid_count > plane / 2);
        }
    }
}

TEST_CASE("extract_sketch: spec examples") {
    TensorF flat = TensorF::full({3, 16, 16}, 0.7f);
    TensorF s = data::extract_sketch(flat);
    for (float v : s.data()) CHECK(v == 0.0f);

    // vertical two-tone edge -> one-pixel-wide vertical line
    TensorF edge = TensorF::zeros({3, 16, 16});
    auto d = edge.mutable_data();
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 16; ++y)
            for (int x = 8; x < 16; ++x) d[(c * 16 + y) * 16 + x] = 1.0f;
    TensorF es = data::extract_sketch(edge);
    auto sd = es.data();
    for (int y = 2; y < 14; ++y) {
        int on = 0;
        for (int x = 0; x < 16; ++x) on += sd[y * 16 + x] > 0.5f ? 1 : 0;
        CHECK(on == 1);
        CHECK(sd[y * 16 + 8] == 1.0f);  // the brighter side of the step survives
    }

    for (float v : es.data()) CHECK((v == 0.0f || v == 1.0f));
}

TEST_CASE("histogram_1000: spec examples") {
    TensorF black = TensorF::zeros({3, 8, 8});
    auto h = histogram_1000(black);
    CHECK(h[0] == doctest::Approx(1.0));

    // half red (level 9,0,0), half blue (level 0,0,9)
    TensorF rb = TensorF::zeros({3, 8, 8});
    auto d = rb.mutable_data();
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            if (x < 4)
                d[(0 * 8 + y) * 8 + x] = 0.95f;  // red level 9
            else
                d[(2 * 8 + y) * 8 + x] = 0.95f;  // blue level 9
        }
    auto h2 = histogram_1000(rb);
    CHECK(h2[900] == doctest::Approx(0.5));
    CHECK(h2[9] == doctest::Approx(0.5));

    double sum = 0;
    for (double v : h2) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-9);

    auto raw = histogram_1000(rb, false);
    CHECK(raw[900] == doctest::Approx(32.0));
}

TEST_CASE("split_scenes: cuts and length filter") {
    TensorF red = TensorF::zeros({3, 8, 8});
    for (int64_t p = 0; p < 64; ++p) red.mutable_data()[p] = 0.95f;
    TensorF blue = TensorF::zeros({3, 8, 8});
    for (int64_t p = 0; p < 64; ++p) blue.mutable_data()[2 * 64 + p] = 0.95f;

    // hard-cut RMSE: two opposite unit-mass bins -> sqrt(2/1000)
    double rmse = hist_rmse(histogram_1000(red), histogram_1000(blue));
    CHECK(rmse == doctest::Approx(std::sqrt(2.0 / 1000.0)).epsilon(1e-12));

    std::vector<TensorF> frames;
    for (int i = 0; i < 20; ++i) frames.push_back(red);
    for (int i = 0; i < 17; ++i) frames.push_back(blue);
    ClipFilterConfig cfg;
    cfg.threshold = 0.02;
    auto clips = split_scenes(frames, cfg);
    REQUIRE(clips.size() == 2);
    CHECK(clips[0].start == 0);
    CHECK(clips[0].end == 20);
    CHECK(clips[1].start == 20);
    CHECK(clips[1].end == 37);

    // identical consecutive frames: RMSE 0, no cut
    std::vector<TensorF> same(30, red);
    auto whole = split_scenes(same, cfg);
    REQUIRE(whole.size() == 1);
    CHECK(whole[0].length() == 30);

    // too long -> dropped
    std::vector<TensorF> many(300, red);
    CHECK(split_scenes(many, cfg).empty());
    // too short segments -> dropped
    std::vector<TensorF> shorts;
    for (int i = 0; i < 5; ++i) shorts.push_back(red);
    for (int i = 0; i < 25; ++i) shorts.push_back(blue);
    auto kept = split_scenes(shorts, cfg);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].start == 5);
}

TEST_CASE("split_scenes: generated clips with disjoint palettes cut at the junction") {
    ClipGenConfig g;
    g.length = 16;
    g.height = 32;
    g.width = 32;
    SyntheticClip a = gen_clip(11, g);
    SyntheticClip b = gen_clip(987654, g);
    std::vector<TensorF> frames = a.frames;
    frames.insert(frames.end(), b.frames.begin(), b.frames.end());
    ClipFilterConfig cfg;
    cfg.min_length = 10;
    auto clips = split_scenes(frames, cfg);
    REQUIRE(clips.size() == 2);
    CHECK(clips[0].end == 16);
    CHECK(clips[1].start == 16);
}

TEST_CASE("build_training_sets: index arithmetic") {
    auto sets = build_training_sets(20, 14);
    REQUIRE(sets.size() == 6);
    CHECK(sets[0].k == 1);
    CHECK(sets[0].target_begin == 1);  // frames 2..15 in 1-based terms
    CHECK(sets[0].candidate_count == 1);
    CHECK(sets[5].k == 6);
    CHECK(sets[5].target_begin == 6);

    auto single = build_training_sets(15, 14);
    REQUIRE(single.size() == 1);

    CHECK(build_training_sets(14, 14).empty());

    for (const auto& s : sets) CHECK(s.candidate_count <= s.target_begin);
}

TEST_CASE("dataset io: ppm, flo5 and clip directory round trips") {
    namespace fs = std::filesystem;
    fs::path tmp = fs::temp_directory_path() / "lvc_test_io";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    // ppm: 8-bit grid values survive exactly
    TensorF img = TensorF::zeros({3, 8, 12});
    std::mt19937_64 rng(5);
    for (auto& v : img.mutable_data()) v = static_cast<float>(rng() % 256) / 255.0f;
    write_ppm((tmp / "img.ppm").string(), img);
    TensorF back = read_ppm((tmp / "img.ppm").string());
    CHECK(bits_equal(back.data(), img.data()));

    TensorF flow = TensorF::randn({2, 6, 7}, rng);
    write_flo5((tmp / "f.flo5").string(), flow);
    TensorF fback = read_flo5((tmp / "f.flo5").string());
    CHECK(bits_equal(fback.data(), flow.data()));

    ClipGenConfig cfg;
    cfg.length = 5;
    cfg.height = 16;
    cfg.width = 16;
    SyntheticClip clip = gen_clip(42, cfg);
    write_clip_dir((tmp / "clip").string(), clip);
    LoadedClip loaded = read_clip_dir((tmp / "clip").string());
    REQUIRE(loaded.frames.size() == 5);
    REQUIRE(loaded.flows.size() == 4);
    REQUIRE(loaded.sketches.size() == 5);
    REQUIRE(loaded.palette.size() == clip.palette.size());
    for (size_t i = 0; i < 5; ++i) {
        CHECK(bits_equal(loaded.frames[i].data(), clip.frames[i].data()));
        CHECK(bits_equal(loaded.sketches[i].data(), clip.sketches[i].data()));
    }
    for (size_t i = 0; i < 4; ++i) CHECK(bits_equal(loaded.flows[i].data(), clip.flows[i].data()));

    CHECK_THROWS_AS(read_ppm((tmp / "missing.ppm").string()), IoError);
    CHECK_THROWS_AS(read_clip_dir((tmp / "nothing").string()), IoError);
    fs::remove_all(tmp);
}
