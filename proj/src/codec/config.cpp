#include "semcomm/codec/config.h"

#include "semcomm/core/errors.h"

namespace semcomm::codec {

std::string to_string(TransmissionMode mode)
{
    return mode == TransmissionMode::analog ? "analog" : "digital";
}

TransmissionMode parse_mode(const std::string& text)
{
    if (text == "analog") return TransmissionMode::analog;
    if (text == "digital") return TransmissionMode::digital;
    throw ConfigError("unknown transmission mode '" + text + "' (expected analog or digital)");
}

int CodecConfig::index_bits() const
{
    int bits = 0;
    while ((1LL << bits) < codebook_size) ++bits;
    return bits;
}

void CodecConfig::validate() const
{
    if (height <= 0 || width <= 0 || height % 16 != 0 || width % 16 != 0) {
        throw ConfigError("image size " + std::to_string(width) + "x" + std::to_string(height) +
                          " must be positive and divisible by 16");
    }
    if (height / 16 > 65535 || width / 16 > 65535) throw ConfigError("image too large");
    if (channel_plan.size() != 5) {
        throw ConfigError("channel plan needs 5 entries (image channels + 4 stages), got " +
                          std::to_string(channel_plan.size()));
    }
    if (channel_plan.front() != 3) throw ConfigError("channel plan must start with 3 (RGB)");
    for (int c : channel_plan) {
        if (c < 1) throw ConfigError("channel plan entries must be >= 1");
    }
    if (codebook_size < 2 || codebook_size > 65536) {
        throw ConfigError("codebook size must be in [2, 65536], got " + std::to_string(codebook_size));
    }
    if (!(commitment > 0.0)) throw ConfigError("commitment weight must be > 0");
    if (!(snr_divisor_db > 0.0)) throw ConfigError("snr divisor must be > 0");
    if (channel_dim < 1 || channel_dim > 65535) throw ConfigError("channel dim must be in [1, 65535]");
}

nlohmann::json to_json(const CodecConfig& c)
{
    return {
        {"height", c.height},
        {"width", c.width},
        {"channel_plan", c.channel_plan},
        {"embedding_dim", c.embedding_dim()},
        {"codebook_size", c.codebook_size},
        {"commitment", c.commitment},
        {"snr_divisor_db", c.snr_divisor_db},
        {"mode", to_string(c.mode)},
        {"channel_dim", c.channel_dim},
        {"attention", c.attention},
    };
}

CodecConfig config_from_json(const nlohmann::json& j)
{
    CodecConfig c;
    try {
        c.height = j.value("height", c.height);
        c.width = j.value("width", c.width);
        if (j.contains("channel_plan")) c.channel_plan = j.at("channel_plan").get<std::vector<int>>();
        if (j.contains("embedding_dim") && !c.channel_plan.empty()) {
            c.channel_plan.back() = j.at("embedding_dim").get<int>();
        }
        c.codebook_size = j.value("codebook_size", c.codebook_size);
        c.commitment = j.value("commitment", c.commitment);
        c.snr_divisor_db = j.value("snr_divisor_db", c.snr_divisor_db);
        if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
        c.channel_dim = j.value("channel_dim", c.channel_dim);
        c.attention = j.value("attention", c.attention);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("codec config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace semcomm::codec
