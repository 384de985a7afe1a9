#pragma once

#include <cstdint>

#include "semcomm/codec/config.h"
#include "semcomm/core/image.h"

namespace semcomm::codec {
struct SemanticPayload;
}

namespace semcomm::metrics {

double mse(const ImageFrame& a, const ImageFrame& b);

// 10 log10(max^2 / MSE). Identical images give +infinity. Throws ConfigError
// on a shape mismatch or max_val <= 0.
double psnr(const ImageFrame& a, const ImageFrame& b, double max_val = 1.0);

struct CompressionAccount {
    std::uint64_t raw_bits = 0;      // H * W * 3 * 8
    std::uint64_t payload_bits = 0;  // indices or f32 symbols only
    double ratio = 0.0;              // raw_bits / payload_bits
};

// Digital: one ceil(log2 K)-bit index per latent cell. Analog: 32 bits per
// channel symbol.
CompressionAccount compression_ratio(const codec::CodecConfig& config, const codec::SemanticPayload& payload);

}  // namespace semcomm::metrics
