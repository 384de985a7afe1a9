#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semcomm/nn/tensor.h"

namespace semcomm::nn {

// A trainable tensor and the name it is checkpointed under.
struct ParamRef {
    std::string name;
    Tensor* tensor = nullptr;
};

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are bound positionally to the
// parameter list on the first step and persist across calls.
class Adam {
public:
    explicit Adam(AdamConfig config = {}) : config_(config) {}

    // Reads each tensor's gradient buffer. Throws NumericError naming the
    // first parameter with a non-finite gradient; nothing is updated then.
    void step(std::span<const ParamRef> params);

    std::uint64_t steps() const { return t_; }
    const AdamConfig& config() const { return config_; }

private:
    AdamConfig config_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace semcomm::nn
