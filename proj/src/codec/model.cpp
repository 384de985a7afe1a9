#include "semcomm/codec/model.h"

#include <openssl/sha.h>

#include "semcomm/core/bytes.h"
#include "semcomm/core/errors.h"
#include "semcomm/core/files.h"
#include "semcomm/nn/checkpoint.h"

namespace semcomm::codec {

CodecModel CodecModel::create(const CodecConfig& config, std::uint64_t seed)
{
    config.validate();
    const auto& plan = config.channel_plan;
    const auto c = [&](int i) { return static_cast<std::size_t>(plan[static_cast<std::size_t>(i)]); };
    const std::size_t d = c(4);
    const auto dc = static_cast<std::size_t>(config.channel_dim);
    const auto k = static_cast<std::size_t>(config.codebook_size);

    CodecModel m;
    m.config = config;
    m.enc_down = {DownStage(c(0), c(1)), DownStage(c(1), c(2))};
    m.enc_res = {ResidualBlock(c(2), c(3), 2, true), ResidualBlock(c(3), c(4), 2, false)};
    m.tx_gate = LayerParams::dense(1, d);
    m.rx_gate = LayerParams::dense(1, d);
    m.codebook.embeddings = Tensor({k, d});
    m.codebook.usage = Tensor({k});
    m.channel_enc = LayerParams::conv(d, dc, 1);
    m.channel_dec = LayerParams::conv(dc, d, 1);
    m.dec_res = {UpResidualStage(d, c(3)), UpResidualStage(c(3), c(2))};
    m.dec_up = UpStage(c(2), c(1), false);
    m.dec_out = UpStage(c(1), c(0), true);

    Rng rng(seed);
    for (auto& s : m.enc_down) s.init(rng);
    for (auto& s : m.enc_res) s.init(rng);
    m.tx_gate.init(rng, 1.0);
    m.rx_gate.init(rng, 1.0);
    const double bound = 1.0 / static_cast<double>(k);
    for (auto& v : m.codebook.embeddings.values()) v = rng.uniform(-bound, bound);
    for (std::size_t i = 0; i < std::min(d, dc); ++i) {
        m.channel_enc.weight[i * d + i] = 1.0;
        m.channel_dec.weight[i * dc + i] = 1.0;
    }
    for (auto& s : m.dec_res) s.init(rng);
    m.dec_up.init(rng);
    m.dec_out.init(rng);
    return m;
}

std::vector<nn::ParamRef> CodecModel::trainable()
{
    std::vector<nn::ParamRef> out;
    ParamSink sink{out, false};
    for (std::size_t i = 0; i < enc_down.size(); ++i) enc_down[i].collect("enc.down" + std::to_string(i), sink);
    for (std::size_t i = 0; i < enc_res.size(); ++i) enc_res[i].collect("enc.res" + std::to_string(i), sink);
    if (config.attention) sink.layer("tx_gate", tx_gate);
    out.push_back({"codebook.embeddings", &codebook.embeddings});
    if (config.mode == TransmissionMode::analog) {
        sink.layer("channel.enc", channel_enc);
        sink.layer("channel.dec", channel_dec);
    }
    if (config.attention) sink.layer("rx_gate", rx_gate);
    for (std::size_t i = 0; i < dec_res.size(); ++i) dec_res[i].collect("dec.res" + std::to_string(i), sink);
    dec_up.collect("dec.up", sink);
    dec_out.collect("dec.out", sink);
    return out;
}

std::vector<nn::ParamRef> CodecModel::state()
{
    std::vector<nn::ParamRef> out;
    ParamSink sink{out, true};
    for (std::size_t i = 0; i < enc_down.size(); ++i) enc_down[i].collect("enc.down" + std::to_string(i), sink);
    for (std::size_t i = 0; i < enc_res.size(); ++i) enc_res[i].collect("enc.res" + std::to_string(i), sink);
    sink.layer("tx_gate", tx_gate);
    out.push_back({"codebook.embeddings", &codebook.embeddings});
    out.push_back({"codebook.usage", &codebook.usage});
    sink.layer("channel.enc", channel_enc);
    sink.layer("channel.dec", channel_dec);
    sink.layer("rx_gate", rx_gate);
    for (std::size_t i = 0; i < dec_res.size(); ++i) dec_res[i].collect("dec.res" + std::to_string(i), sink);
    dec_up.collect("dec.up", sink);
    dec_out.collect("dec.out", sink);
    return out;
}

void CodecModel::for_each_batchnorm(const std::function<void(LayerParams&)>& fn)
{
    for (auto& s : enc_down) fn(s.bn);
    for (auto& s : enc_res) {
        fn(s.bn1);
        fn(s.bn2);
    }
    for (auto& s : dec_res) {
        fn(s.res.bn1);
        fn(s.res.bn2);
        fn(s.bn);
    }
    fn(dec_up.bn);
}

void CodecModel::seed_running_stats()
{
    for_each_batchnorm([](LayerParams& p) { p.seed_running_stats(); });
}

void CodecModel::zero_grad()
{
    for (auto& p : trainable()) p.tensor->zero_grad();
}

std::vector<std::uint8_t> CodecModel::serialize() const
{
    auto& self = const_cast<CodecModel&>(*this);
    const auto params = self.state();
    const std::string header = to_json(config).dump();
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(header.size()));
    w.text(header);
    w.bytes(nn::encode_checkpoint(params));
    return w.take();
}

CodecModel CodecModel::deserialize(std::span<const std::uint8_t> bytes)
{
    ByteReader<IoError> r(bytes, "codec checkpoint: truncated header");
    const auto len = r.u32();
    CodecConfig config;
    try {
        config = config_from_json(nlohmann::json::parse(r.text(len)));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("codec checkpoint: bad config header: ") + e.what());
    }
    CodecModel m = create(config, 0);
    const auto stored = nn::decode_checkpoint(bytes.subspan(r.position()));
    nn::load_into(stored, m.state());
    m.for_each_batchnorm([](LayerParams& p) { p.stats_ready = true; });
    return m;
}

void CodecModel::save(const std::filesystem::path& path) const
{
    write_file(path, serialize());
}

CodecModel CodecModel::load(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path)) throw IoError("checkpoint not found: " + path.string());
    return deserialize(read_file(path));
}

std::array<std::uint8_t, 32> CodecModel::digest() const
{
    const auto bytes = serialize();
    std::array<std::uint8_t, 32> out{};
    SHA256(bytes.data(), bytes.size(), out.data());
    return out;
}

std::string CodecModel::digest_hex() const
{
    const auto d = digest();
    return hex(d);
}

std::string hex(std::span<const std::uint8_t> bytes)
{
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 15]);
    }
    return out;
}

}  // namespace semcomm::codec
