#include "semcomm/codec/codec.h"

#include <cmath>
#include <limits>

#include "semcomm/core/errors.h"

namespace semcomm::codec {

Tensor image_to_tensor(const ImageFrame& image)
{
    return images_to_batch(std::span<const ImageFrame>(&image, 1));
}

Tensor images_to_batch(std::span<const ImageFrame> images)
{
    if (images.empty()) throw ConfigError("empty image batch");
    const auto& first = images.front();
    const std::size_t c = static_cast<std::size_t>(first.channels);
    const std::size_t h = static_cast<std::size_t>(first.height);
    const std::size_t w = static_cast<std::size_t>(first.width);
    Tensor t({images.size(), c, h, w});
    for (std::size_t n = 0; n < images.size(); ++n) {
        const auto& img = images[n];
        if (!img.same_shape(first)) throw ConfigError("image batch has mixed dimensions");
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                for (std::size_t ch = 0; ch < c; ++ch) {
                    t.at(n, ch, y, x) = img.at(static_cast<int>(y), static_cast<int>(x), static_cast<int>(ch));
                }
            }
        }
    }
    return t;
}

ImageFrame tensor_to_image(const Tensor& t, std::size_t batch_index, std::int64_t timestamp_us)
{
    const int c = static_cast<int>(t.dim(1)), h = static_cast<int>(t.dim(2)), w = static_cast<int>(t.dim(3));
    ImageFrame img(h, w, c, timestamp_us);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < c; ++ch) {
                img.at(y, x, ch) = t.at(batch_index, static_cast<std::size_t>(ch), static_cast<std::size_t>(y),
                                        static_cast<std::size_t>(x));
            }
        }
    }
    return img;
}

std::vector<double> attention_weights(double snr_db, const LayerParams& fc, double divisor)
{
    const Tensor input({1}, std::vector<double>{snr_db / divisor});
    const Tensor pre = nn::dense(input, fc);
    const Tensor w = nn::activation(pre, nn::Activation::sigmoid);
    return w.values();
}

Tensor scale_channels(const Tensor& z, std::span<const double> weights)
{
    if (z.dim(1) != weights.size()) {
        throw ConfigError("attention gate maps to " + std::to_string(weights.size()) +
                          " channels, features have " + std::to_string(z.dim(1)));
    }
    Tensor out(z.shape());
    const std::size_t n = z.dim(0), c = z.dim(1), plane = z.dim(2) * z.dim(3);
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t base = (b * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) out[base + i] = weights[ch] * z[base + i];
        }
    }
    return out;
}

Tensor attention_gate(const Tensor& z, double snr_db, const LayerParams& fc, double divisor)
{
    const auto w = attention_weights(snr_db, fc, divisor);
    return scale_channels(z, w);
}

std::size_t nearest_codeword(std::span<const double> v, const Codebook& codebook)
{
    const std::size_t k = codebook.size(), d = codebook.dim();
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < k; ++n) {
        const auto e = codebook.row(n);
        double dist = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = v[j] - e[j];
            dist += diff * diff;
        }
        if (dist < best_dist) {
            best_dist = dist;
            best = n;
        }
    }
    return best;
}

Quantized quantize(const Tensor& z, const Codebook& codebook)
{
    const std::size_t n = z.dim(0), d = z.dim(1), h = z.dim(2), w = z.dim(3);
    if (d != codebook.dim()) {
        throw ConfigError("quantize: features have " + std::to_string(d) + " channels, codebook dim is " +
                          std::to_string(codebook.dim()));
    }
    Quantized q;
    q.indices.resize(n * h * w);
    q.z_q = Tensor(z.shape());
    std::vector<double> cell(d);
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t j = 0; j < w; ++j) {
                for (std::size_t c = 0; c < d; ++c) cell[c] = z.at(b, c, i, j);
                const std::size_t idx = nearest_codeword(cell, codebook);
                q.indices[(b * h + i) * w + j] = static_cast<std::uint32_t>(idx);
                const auto e = codebook.row(idx);
                for (std::size_t c = 0; c < d; ++c) q.z_q.at(b, c, i, j) = e[c];
            }
        }
    }
    return q;
}

Tensor lookup(std::span<const std::uint32_t> indices, std::size_t batch, std::size_t grid_h,
              std::size_t grid_w, const Codebook& codebook)
{
    const std::size_t d = codebook.dim();
    if (indices.size() != batch * grid_h * grid_w) {
        throw ProtocolError("index count " + std::to_string(indices.size()) + " does not match grid " +
                            std::to_string(grid_h) + "x" + std::to_string(grid_w));
    }
    Tensor z({batch, d, grid_h, grid_w});
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < grid_h; ++i) {
            for (std::size_t j = 0; j < grid_w; ++j) {
                const std::uint32_t idx = indices[(b * grid_h + i) * grid_w + j];
                if (idx >= codebook.size()) {
                    throw ProtocolError("codeword index " + std::to_string(idx) + " out of range (K=" +
                                        std::to_string(codebook.size()) + ")");
                }
                const auto e = codebook.row(idx);
                for (std::size_t c = 0; c < d; ++c) z.at(b, c, i, j) = e[c];
            }
        }
    }
    return z;
}

channel::ChannelSymbols channel_encode(const Tensor& z_q, const LayerParams& channel_enc)
{
    if (z_q.dim(0) != 1) throw ConfigError("channel_encode expects a single latent");
    const Tensor u = nn::conv2d(z_q, channel_enc, 1, 0);
    const std::size_t dc = u.dim(1), h = u.dim(2), w = u.dim(3);
    std::vector<double> flat(dc * h * w);
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            for (std::size_t c = 0; c < dc; ++c) flat[(i * w + j) * dc + c] = u.at(0, c, i, j);
        }
    }
    return channel::power_normalize(flat);
}

Tensor channel_decode(const channel::ChannelSymbols& y, std::size_t grid_h, std::size_t grid_w,
                      const LayerParams& channel_dec, const Codebook& codebook)
{
    const std::size_t dc = channel_dec.weight.dim(1);
    if (y.symbols.size() != grid_h * grid_w * dc) {
        throw ProtocolError("analog payload has " + std::to_string(y.symbols.size()) + " symbols, expected " +
                            std::to_string(grid_h * grid_w * dc));
    }
    Tensor v({1, dc, grid_h, grid_w});
    for (std::size_t i = 0; i < grid_h; ++i) {
        for (std::size_t j = 0; j < grid_w; ++j) {
            for (std::size_t c = 0; c < dc; ++c) v.at(0, c, i, j) = y.symbols[(i * grid_w + j) * dc + c] * y.scale;
        }
    }
    const Tensor r = nn::conv2d(v, channel_dec, 1, 0);
    return quantize(r, codebook).z_q;
}

Tensor channel_decode(const SemanticPayload& payload, const CodecModel& model)
{
    const std::size_t h = payload.grid_h, w = payload.grid_w;
    if (payload.mode == TransmissionMode::digital) {
        std::vector<std::uint32_t> idx(payload.indices.begin(), payload.indices.end());
        return lookup(idx, 1, h, w, model.codebook);
    }
    channel::ChannelSymbols y;
    y.symbols.assign(payload.symbols.begin(), payload.symbols.end());
    y.scale = payload.scale;
    return channel_decode(y, h, w, model.channel_dec, model.codebook);
}

Tensor encode_features(const Tensor& images, const CodecModel& model)
{
    Tensor h = model.enc_down[0].forward_eval(images);
    h = model.enc_down[1].forward_eval(h);
    h = model.enc_res[0].forward_eval(h);
    return model.enc_res[1].forward_eval(h);
}

EncodeResult encode(const ImageFrame& image, double snr_db, const CodecModel& model)
{
    const auto& cfg = model.config;
    if (image.height != cfg.height || image.width != cfg.width || image.channels != 3) {
        throw ConfigError("encode: image is " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                          "x" + std::to_string(image.channels) + ", codec expects " + std::to_string(cfg.width) +
                          "x" + std::to_string(cfg.height) + "x3");
    }
    EncodeResult r;
    Tensor z = encode_features(image_to_tensor(image), model);
    if (cfg.attention) z = attention_gate(z, snr_db, model.tx_gate, cfg.snr_divisor_db);
    auto q = quantize(z, model.codebook);
    r.z_e = std::move(z);
    r.z_q = std::move(q.z_q);
    r.indices = std::move(q.indices);

    auto& p = r.payload;
    p.grid_h = static_cast<std::uint16_t>(cfg.grid_h());
    p.grid_w = static_cast<std::uint16_t>(cfg.grid_w());
    p.mode = cfg.mode;
    p.snr_db = static_cast<float>(snr_db);
    if (cfg.mode == TransmissionMode::digital) {
        p.indices.assign(r.indices.begin(), r.indices.end());
    } else {
        const auto x = channel_encode(r.z_q, model.channel_enc);
        p.channel_dim = static_cast<std::uint16_t>(cfg.channel_dim);
        p.scale = static_cast<float>(x.scale);
        p.symbols.assign(x.symbols.begin(), x.symbols.end());
    }
    return r;
}

ImageFrame decode(const Tensor& z_q, double snr_db, const CodecModel& model, std::int64_t timestamp_us)
{
    const auto& cfg = model.config;
    if (z_q.dim(1) != static_cast<std::size_t>(cfg.embedding_dim())) {
        throw ConfigError("decode: latent has " + std::to_string(z_q.dim(1)) + " channels, expected " +
                          std::to_string(cfg.embedding_dim()));
    }
    Tensor h = cfg.attention ? attention_gate(z_q, snr_db, model.rx_gate, cfg.snr_divisor_db) : z_q;
    h = model.dec_res[0].forward_eval(h);
    h = model.dec_res[1].forward_eval(h);
    h = model.dec_up.forward_eval(h);
    h = model.dec_out.forward_eval(h);
    return tensor_to_image(h, 0, timestamp_us);
}

ImageFrame reconstruct(const SemanticPayload& payload, const CodecModel& model, std::int64_t timestamp_us)
{
    return decode(channel_decode(payload, model), payload.snr_db, model, timestamp_us);
}

void apply_channel(SemanticPayload& payload, const channel::AwgnConfig& awgn)
{
    if (payload.mode != TransmissionMode::analog) return;
    channel::ChannelSymbols x;
    x.symbols.assign(payload.symbols.begin(), payload.symbols.end());
    const auto y = channel::awgn_apply(x, awgn);
    payload.symbols.assign(y.symbols.begin(), y.symbols.end());
}

}  // namespace semcomm::codec
