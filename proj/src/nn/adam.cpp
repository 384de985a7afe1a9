#include "semcomm/nn/adam.h"

#include <cmath>

#include "semcomm/core/errors.h"

namespace semcomm::nn {

void Adam::step(std::span<const ParamRef> params)
{
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.emplace_back(p.tensor->size(), 0.0);
            v_.emplace_back(p.tensor->size(), 0.0);
        }
    }
    if (m_.size() != params.size()) {
        throw ConfigError("adam: parameter list changed size between steps (" +
                          std::to_string(m_.size()) + " -> " + std::to_string(params.size()) + ")");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& t = *params[i].tensor;
        if (!t.has_grad() || t.grad().size() != t.size() || m_[i].size() != t.size()) {
            throw ConfigError("adam: gradient shape mismatch for parameter '" + params[i].name + "'");
        }
        for (double g : t.grad()) {
            if (!std::isfinite(g)) {
                throw NumericError("adam: non-finite gradient in parameter '" + params[i].name + "'");
            }
        }
    }

    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& t = *params[i].tensor;
        auto g = t.grad();
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < t.size(); ++j) {
            m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
            v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
            const double mh = m[j] / bc1;
            const double vh = v[j] / bc2;
            t[j] -= config_.lr * mh / (std::sqrt(vh) + config_.eps);
        }
    }
}

}  // namespace semcomm::nn
