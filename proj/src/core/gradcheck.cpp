#include "core/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "common/rng.hpp"

namespace lvc {

GradcheckReport gradcheck(const std::function<Tensor<double>(std::vector<Tensor<double>>&)>& fn,
                          std::vector<Tensor<double>> inputs, double h,
                          int64_t max_coords_per_input, uint64_t subsample_seed) {
    for (auto& t : inputs) t.set_requires_grad(true);

    Tensor<double> loss = fn(inputs);
    if (loss.numel() != 1) throw ShapeError("gradcheck: fn must return a scalar");
    for (auto& t : inputs) t.zero_grad();
    loss.backward();

    std::vector<std::vector<double>> analytic;
    for (auto& t : inputs) {
        if (t.grad().empty())
            analytic.emplace_back(static_cast<size_t>(t.numel()), 0.0);
        else
            analytic.emplace_back(t.grad().begin(), t.grad().end());
    }

    GradcheckReport rep;
    std::mt19937_64 pick_rng(subsample_seed);
    for (size_t ti = 0; ti < inputs.size(); ++ti) {
        Tensor<double>& t = inputs[ti];
        int64_t n = t.numel();
        std::vector<int64_t> coords;
        if (max_coords_per_input > 0 && n > max_coords_per_input) {
            std::vector<int64_t> all(static_cast<size_t>(n));
            for (int64_t i = 0; i < n; ++i) all[i] = i;
            std::shuffle(all.begin(), all.end(), pick_rng);
            coords.assign(all.begin(), all.begin() + max_coords_per_input);
        } else {
            coords.resize(static_cast<size_t>(n));
            for (int64_t i = 0; i < n; ++i) coords[i] = i;
        }
        for (int64_t c : coords) {
            double orig = t.mutable_data()[c];
            t.mutable_data()[c] = orig + h;
            double fp = fn(inputs).item();
            t.mutable_data()[c] = orig - h;
            double fm = fn(inputs).item();
            t.mutable_data()[c] = orig;
            double num = (fp - fm) / (2.0 * h);
            double ana = analytic[ti][static_cast<size_t>(c)];
            double denom = std::max({std::abs(num), std::abs(ana), 1.0});
            double rel = std::abs(num - ana) / denom;
            ++rep.checked;
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst = "input " + std::to_string(ti) + " index " + std::to_string(c);
            }
        }
    }
    return rep;
}

}  // namespace lvc
