#pragma once

#include <json.hpp>
#include <string>
#include <vector>

namespace semcomm::codec {

enum class TransmissionMode { analog, digital };

std::string to_string(TransmissionMode mode);
TransmissionMode parse_mode(const std::string& text);

// Geometry and hyper-parameters of the codec. Four stride-2 stages map an
// H x W image onto an (H/16) x (W/16) latent grid of D-dimensional cells.
struct CodecConfig {
    int height = 32;
    int width = 32;
    // Encoder widths: image channels, two conv stages, two residual stages.
    // The last entry is the embedding dimension.
    std::vector<int> channel_plan{3, 32, 64, 64, 64};
    int codebook_size = 512;
    double commitment = 0.25;
    double snr_divisor_db = 20.0;
    TransmissionMode mode = TransmissionMode::analog;
    // Symbols per latent cell on the analog channel.
    int channel_dim = 64;
    bool attention = true;

    int embedding_dim() const { return channel_plan.back(); }
    int grid_h() const { return height / 16; }
    int grid_w() const { return width / 16; }
    int cells() const { return grid_h() * grid_w(); }
    // ceil(log2 K): bits per index on the wire.
    int index_bits() const;

    // Throws ConfigError describing the first violated invariant.
    void validate() const;

    bool operator==(const CodecConfig&) const = default;
};

nlohmann::json to_json(const CodecConfig& config);
CodecConfig config_from_json(const nlohmann::json& j);

}  // namespace semcomm::codec
