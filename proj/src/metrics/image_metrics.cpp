#include "semcomm/metrics/image_metrics.h"

#include <cmath>
#include <limits>

#include "semcomm/codec/codec.h"
#include "semcomm/core/errors.h"

namespace semcomm::metrics {

double mse(const ImageFrame& a, const ImageFrame& b)
{
    if (!a.same_shape(b)) {
        throw ConfigError("image shapes differ: " + std::to_string(a.height) + "x" + std::to_string(a.width) + "x" +
                          std::to_string(a.channels) + " vs " + std::to_string(b.height) + "x" +
                          std::to_string(b.width) + "x" + std::to_string(b.channels));
    }
    if (a.data.empty()) throw ConfigError("mse of empty images");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double psnr(const ImageFrame& a, const ImageFrame& b, double max_val)
{
    if (!(max_val > 0.0)) throw ConfigError("psnr max_val must be positive");
    const double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(max_val * max_val / m);
}

CompressionAccount compression_ratio(const codec::CodecConfig& config, const codec::SemanticPayload& payload)
{
    CompressionAccount acc;
    acc.raw_bits = static_cast<std::uint64_t>(config.height) * config.width * 3 * 8;
    if (payload.mode == codec::TransmissionMode::digital) {
        acc.payload_bits = static_cast<std::uint64_t>(payload.indices.size()) * config.index_bits();
    } else {
        acc.payload_bits = static_cast<std::uint64_t>(payload.symbols.size()) * 32;
    }
    acc.ratio = acc.payload_bits ? static_cast<double>(acc.raw_bits) / static_cast<double>(acc.payload_bits)
                                 : std::numeric_limits<double>::infinity();
    return acc;
}

}  // namespace semcomm::metrics
