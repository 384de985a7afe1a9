#include "semcomm/nn/grad_check.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "semcomm/core/errors.h"
#include "semcomm/core/rng.h"

namespace semcomm::nn {

GradCheckResult grad_check(const std::function<double()>& loss, std::span<const ParamRef> params,
                           const GradCheckOptions& options)
{
    std::vector<std::size_t> offsets;
    std::size_t total = 0;
    for (const auto& p : params) {
        if (!p.tensor->has_grad()) throw ConfigError("grad_check: '" + p.name + "' has no gradient buffer");
        offsets.push_back(total);
        total += p.tensor->size();
    }

    std::vector<std::size_t> coords;
    if (options.samples == 0 || options.samples >= total) {
        coords.resize(total);
        for (std::size_t i = 0; i < total; ++i) coords[i] = i;
    } else {
        Rng rng(options.seed);
        for (std::size_t i = 0; i < options.samples; ++i) coords.push_back(rng.below(total));
    }

    GradCheckResult result;
    for (std::size_t flat : coords) {
        const auto it = std::upper_bound(offsets.begin(), offsets.end(), flat) - 1;
        const std::size_t pi = static_cast<std::size_t>(it - offsets.begin());
        const std::size_t idx = flat - *it;
        Tensor& t = *params[pi].tensor;

        const double original = t[idx];
        t[idx] = original + options.step;
        const double plus = loss();
        t[idx] = original - options.step;
        const double minus = loss();
        t[idx] = original;

        const double fd = (plus - minus) / (2.0 * options.step);
        const double analytic = t.grad()[idx];
        const double rel = std::abs(analytic - fd) / std::max(1e-8, std::abs(analytic) + std::abs(fd));
        ++result.coordinates;
        if (rel > result.max_rel_error || result.worst.empty()) {
            result.max_rel_error = rel;
            result.worst = params[pi].name + "[" + std::to_string(idx) + "]";
        }
    }
    return result;
}

}  // namespace semcomm::nn
