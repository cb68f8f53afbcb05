#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace lvc {

struct GradcheckReport {
    double max_rel_err = 0.0;
    int64_t checked = 0;
    std::string worst;  // "input 2 index 17" for the worst coordinate

    bool pass(double tol) const { return max_rel_err < tol; }
};

// Central finite differences (h defaults to 1e-5) against analytic gradients,
// double precision only. `fn` maps the inputs to a scalar loss. When
// max_coords_per_input > 0 only that many coordinates per input are probed
// (deterministic subsample), which keeps whole-model checks tractable.
GradcheckReport gradcheck(const std::function<Tensor<double>(std::vector<Tensor<double>>&)>& fn,
                          std::vector<Tensor<double>> inputs, double h = 1e-5,
                          int64_t max_coords_per_input = 0, uint64_t subsample_seed = 0);

}  // namespace lvc
