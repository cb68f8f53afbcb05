#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "core/tensor.hpp"

namespace lvc {

// Discretized sigma ladder: sigma_t^{1/rho} is affine in t, running from
// sigma_max^{1/rho} at t=T down to sigma_min^{1/rho} at t=1, with sigma_0 = 0
// so the final Euler step lands exactly on the denoised prediction.
struct NoiseSchedule {
    double sigma_min = 0.002;
    double sigma_max = 700.0;
    double rho = 7.0;
    int steps = 25;  // T
    double sigma_data = 0.5;

    void validate() const;
    double sigma_at(int t) const;          // t in [0, T]; sigma_at(0) == 0
    std::vector<double> ladder() const;    // [0..T]
};

struct PrecondCoeffs {
    double c_skip, c_out, c_in, c_noise;
};

// EDM-convention preconditioning. c_noise is ln(sigma)/4, defined as 0 at
// sigma=0 (the network is never evaluated there).
PrecondCoeffs precond(double sigma, double sigma_data = 0.5);

// Loss weighting lambda(sigma) = (sigma^2 + sd^2) / (sigma * sd)^2.
double dsm_weight(double sigma, double sigma_data = 0.5);

struct TrainingNoiseConfig {
    double log_mean = 1.0;
    double log_std = 1.6;
};

// sigma = exp(g), g ~ Normal(log_mean, log_std^2)
double sample_training_sigma(std::mt19937_64& rng, const TrainingNoiseConfig& cfg = {});

// D(x; sigma) = c_skip * x + c_out * U(c_in * x; c_noise, cond).
// `unet` is any callable (scaled_x, c_noise, cond) -> Tensor.
template <typename T, typename UnetFn, typename Cond>
Tensor<T> denoise(UnetFn&& unet, const Tensor<T>& x, double sigma, const Cond& cond,
                  double sigma_data = 0.5) {
    PrecondCoeffs pc = precond(sigma, sigma_data);
    Tensor<T> u = unet(scale(x, static_cast<T>(pc.c_in)), static_cast<T>(pc.c_noise), cond);
    if (u.shape() != x.shape())
        throw ShapeError("denoise: network output " + shape_str(u.shape()) +
                         " does not match input " + shape_str(x.shape()));
    return add(scale(x, static_cast<T>(pc.c_skip)), scale(u, static_cast<T>(pc.c_out)));
}

// lambda(sigma) * MSE(D(clean + sigma*noise; sigma, cond), clean).
// `denoiser` is any callable (noised, sigma, cond) -> Tensor.
template <typename T, typename DenoiserFn, typename Cond>
Tensor<T> dsm_loss(DenoiserFn&& denoiser, const Tensor<T>& clean, const Cond& cond, double sigma,
                   const Tensor<T>& noise, double sigma_data = 0.5) {
    if (noise.shape() != clean.shape())
        throw ShapeError("dsm_loss: noise " + shape_str(noise.shape()) + " vs clean " +
                         shape_str(clean.shape()));
    if (sigma == 0.0) throw NumericError("dsm_loss: sigma == 0 has undefined weight");
    Tensor<T> noised = add(clean, scale(noise, static_cast<T>(sigma)));
    Tensor<T> d = denoiser(noised, sigma, cond);
    return scale(mse(d, clean), static_cast<T>(dsm_weight(sigma, sigma_data)));
}

}  // namespace lvc
