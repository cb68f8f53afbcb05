#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "edm/edm.hpp"

using namespace lvc;

TEST_CASE("sigma ladder: exact endpoints and affine sigma^(1/rho)") {
    NoiseSchedule sched;
    CHECK(std::abs(sched.sigma_at(25) - 700.0) / 700.0 < 1e-9);
    CHECK(std::abs(sched.sigma_at(1) - 0.002) / 0.002 < 1e-9);
    CHECK(sched.sigma_at(0) == 0.0);

    // independent evaluation via the log form, long double
    auto oracle = [&](int t) {
        long double a = std::exp(std::log(700.0L) / 7.0L);
        long double b = std::exp(std::log(0.002L) / 7.0L);
        long double f = (25.0L - t) / 24.0L;
        long double base = a + f * (b - a);
        return static_cast<double>(std::exp(7.0L * std::log(base)));
    };
    for (int t = 1; t <= 25; ++t)
        CHECK(std::abs(sched.sigma_at(t) - oracle(t)) / oracle(t) < 1e-12);
    CHECK(sched.sigma_at(13) == doctest::Approx(15.6).epsilon(0.01));

    // strictly increasing
    for (int t = 1; t < 25; ++t) CHECK(sched.sigma_at(t) < sched.sigma_at(t + 1));

    // sigma_t^(1/rho) affine in t: vanishing second differences
    std::vector<double> roots;
    for (int t = 1; t <= 25; ++t) roots.push_back(std::pow(sched.sigma_at(t), 1.0 / 7.0));
    double slope = roots[1] - roots[0];
    for (size_t i = 2; i < roots.size(); ++i) {
        double dd = (roots[i] - roots[i - 1]) - (roots[i - 1] - roots[i - 2]);
        CHECK(std::abs(dd) < 1e-9 * std::abs(slope));
    }

    CHECK_THROWS_AS(sched.sigma_at(26), ConfigError);
    CHECK_THROWS_AS(sched.sigma_at(-1), ConfigError);
    NoiseSchedule bad = sched;
    bad.steps = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("preconditioning: pinned values and identities") {
    PrecondCoeffs z = precond(0.0);
    CHECK(z.c_skip == 1.0);
    CHECK(z.c_out == 0.0);

    PrecondCoeffs p = precond(0.5, 0.5);
    CHECK(p.c_skip == doctest::Approx(0.5));
    CHECK(p.c_in == doctest::Approx(1.0 / (0.5 * std::sqrt(2.0))).epsilon(1e-9));
    CHECK(p.c_in == doctest::Approx(1.41421356).epsilon(1e-6));

    CHECK(precond(1e9).c_skip < 1e-15);
    CHECK_THROWS_AS(precond(-0.1), NumericError);

    // identities over 1000 log-uniform sigmas in [1e-3, 1e3]
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(std::log(1e-3), std::log(1e3));
    const double sd = 0.5;
    for (int i = 0; i < 1000; ++i) {
        double s = std::exp(u(rng));
        PrecondCoeffs c = precond(s, sd);
        CHECK(std::abs(c.c_in * c.c_in * (s * s + sd * sd) - 1.0) < 1e-6);
        CHECK(std::abs(c.c_skip - sd * sd * c.c_in * c.c_in) / c.c_skip < 1e-6);
        CHECK(std::abs(c.c_out * c.c_out - s * s * sd * sd * c.c_in * c.c_in) /
                  (c.c_out * c.c_out) <
              1e-6);
    }
}

TEST_CASE("denoise wrapper") {
    std::mt19937_64 rng(3);
    TensorF x = TensorF::randn({2, 3}, rng);
    struct NoCond {};
    NoCond cond;

    auto zero_unet = [](const TensorF& in, float, const NoCond&) {
        return TensorF::zeros(in.shape());
    };
    TensorF y0 = denoise(zero_unet, x, 0.0, cond);
    CHECK(std::equal(y0.data().begin(), y0.data().end(), x.data().begin()));

    double sigma = 1.3;
    TensorF ys = denoise(zero_unet, x, sigma, cond);
    double cs = precond(sigma).c_skip;
    for (int64_t i = 0; i < x.numel(); ++i)
        CHECK(ys.data()[i] == doctest::Approx(x.data()[i] * cs).epsilon(1e-6));

    auto ones_unet = [](const TensorF& in, float, const NoCond&) {
        return TensorF::full(in.shape(), 1.0f);
    };
    TensorF xz = TensorF::zeros({2, 2});
    TensorF yo = denoise(ones_unet, xz, 0.5, cond, 0.5);
    for (float v : yo.data()) CHECK(v == doctest::Approx(0.35355339).epsilon(1e-6));

    // sigma -> 0 converges to identity
    TensorF yn = denoise(zero_unet, x, 1e-6, cond);
    for (int64_t i = 0; i < x.numel(); ++i)
        CHECK(std::abs(yn.data()[i] - x.data()[i]) < 1e-4);
}

TEST_CASE("dsm loss") {
    std::mt19937_64 rng(4);
    TensorF clean = TensorF::randn({3, 3}, rng);
    TensorF noise = TensorF::randn({3, 3}, rng);
    struct NoCond {};
    NoCond cond;

    CHECK(dsm_weight(0.5, 0.5) == doctest::Approx(8.0));

    auto perfect = [&](const TensorF&, double, const NoCond&) { return clean; };
    CHECK(dsm_loss(perfect, clean, cond, 0.7, noise).item() == 0.0f);

    auto zero_d = [](const TensorF& in, double, const NoCond&) {
        return TensorF::zeros(in.shape());
    };
    TensorF ones = TensorF::full({4}, 1.0f);
    TensorF zn = TensorF::zeros({4});
    double sigma = 0.9;
    float loss = dsm_loss(zero_d, ones, cond, sigma, zn).item();
    CHECK(loss == doctest::Approx(dsm_weight(sigma)).epsilon(1e-6));

    CHECK_THROWS_AS(dsm_loss(zero_d, ones, cond, 0.0, zn), NumericError);
    CHECK(loss >= 0.0f);
}

TEST_CASE("training sigma distribution") {
    std::mt19937_64 rng(11);
    const int n = 100000;
    std::vector<double> draws(n);
    for (auto& d : draws) {
        d = sample_training_sigma(rng);
        CHECK(d > 0.0);
    }
    std::nth_element(draws.begin(), draws.begin() + n / 2, draws.end());
    double median = draws[n / 2];
    CHECK(median == doctest::Approx(std::exp(1.0)).epsilon(0.05));

    std::mt19937_64 a(99), b(99);
    for (int i = 0; i < 10; ++i)
        CHECK(sample_training_sigma(a) == sample_training_sigma(b));
}
