#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "semcomm/nn/adam.h"

namespace semcomm::nn {

struct GradCheckOptions {
    double step = 1e-6;
    // Number of coordinates sampled uniformly over all parameters; 0 checks
    // every coordinate.
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t coordinates = 0;
    std::string worst;  // "name[index]" of the worst coordinate
};

// Compares the analytic gradients already stored in each parameter's grad
// buffer against central finite differences of `loss`. The relative error of
// one coordinate is |ga - gfd| / max(1e-8, |ga| + |gfd|). Parameter values
// are restored exactly afterwards.
GradCheckResult grad_check(const std::function<double()>& loss, std::span<const ParamRef> params,
                           const GradCheckOptions& options = {});

}  // namespace semcomm::nn
