#include "edm/edm.hpp"

namespace lvc {

void NoiseSchedule::validate() const {
    if (sigma_min <= 0 || sigma_max <= 0 || rho <= 0 || sigma_data <= 0)
        throw ConfigError("noise schedule: sigma_min/sigma_max/rho/sigma_data must be positive");
    if (sigma_min >= sigma_max) throw ConfigError("noise schedule: sigma_min must be < sigma_max");
    if (steps < 2) throw ConfigError("noise schedule: T must be >= 2");
}

double NoiseSchedule::sigma_at(int t) const {
    validate();
    if (t < 0 || t > steps)
        throw ConfigError("sigma_at: t=" + std::to_string(t) + " outside [0," +
                          std::to_string(steps) + "]");
    if (t == 0) return 0.0;
    double a = std::pow(sigma_max, 1.0 / rho);
    double b = std::pow(sigma_min, 1.0 / rho);
    double f = static_cast<double>(steps - t) / static_cast<double>(steps - 1);
    return std::pow(a + f * (b - a), rho);
}

std::vector<double> NoiseSchedule::ladder() const {
    std::vector<double> s(static_cast<size_t>(steps) + 1);
    for (int t = 0; t <= steps; ++t) s[t] = sigma_at(t);
    return s;
}

PrecondCoeffs precond(double sigma, double sigma_data) {
    if (sigma < 0) throw NumericError("precond: sigma must be >= 0");
    double sd2 = sigma_data * sigma_data;
    double denom = sigma * sigma + sd2;
    PrecondCoeffs pc;
    pc.c_skip = sd2 / denom;
    pc.c_out = sigma * sigma_data / std::sqrt(denom);
    pc.c_in = 1.0 / std::sqrt(denom);
    pc.c_noise = sigma > 0 ? 0.25 * std::log(sigma) : 0.0;
    return pc;
}

double dsm_weight(double sigma, double sigma_data) {
    return (sigma * sigma + sigma_data * sigma_data) / ((sigma * sigma_data) * (sigma * sigma_data));
}

double sample_training_sigma(std::mt19937_64& rng, const TrainingNoiseConfig& cfg) {
    if (cfg.log_std <= 0) throw ConfigError("training noise: log_std must be positive");
    std::normal_distribution<double> dist(cfg.log_mean, cfg.log_std);
    return std::exp(dist(rng));
}

}  // namespace lvc
