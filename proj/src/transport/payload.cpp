#include "semcomm/transport/payload.h"

#include <algorithm>
#include <cmath>

#include "semcomm/core/bytes.h"
#include "semcomm/core/errors.h"

namespace semcomm::transport {

std::vector<std::uint8_t> pack_indices(std::span<const std::uint16_t> indices, int bits)
{
    if (bits < 1 || bits > 16) throw ConfigError("bits per index must lie in [1, 16]");
    std::vector<std::uint8_t> out((indices.size() * static_cast<std::size_t>(bits) + 7) / 8, 0);
    std::size_t pos = 0;
    for (const auto idx : indices) {
        if (bits < 16 && (idx >> bits) != 0) {
            throw ConfigError("index " + std::to_string(idx) + " does not fit in " + std::to_string(bits) + " bits");
        }
        for (int b = 0; b < bits; ++b, ++pos) {
            if ((idx >> b) & 1u) out[pos / 8] |= static_cast<std::uint8_t>(1u << (pos % 8));
        }
    }
    return out;
}

std::vector<std::uint16_t> unpack_indices(std::span<const std::uint8_t> bytes, std::size_t count, int bits)
{
    if (bits < 1 || bits > 16) throw ProtocolError("bits per index must lie in [1, 16]");
    if (bytes.size() * 8 < count * static_cast<std::size_t>(bits)) throw ProtocolError("index data truncated");
    std::vector<std::uint16_t> out(count, 0);
    std::size_t pos = 0;
    for (auto& idx : out) {
        for (int b = 0; b < bits; ++b, ++pos) {
            if ((bytes[pos / 8] >> (pos % 8)) & 1u) idx = static_cast<std::uint16_t>(idx | (1u << b));
        }
    }
    return out;
}

std::vector<std::uint8_t> encode_semantic(const codec::SemanticPayload& p, int bits_per_index)
{
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(p.mode));
    w.u16(p.grid_h);
    w.u16(p.grid_w);
    w.f32(p.snr_db);
    const std::size_t cells = static_cast<std::size_t>(p.grid_h) * p.grid_w;
    if (p.mode == codec::TransmissionMode::digital) {
        if (p.indices.size() != cells) throw ConfigError("digital payload index count does not match its grid");
        w.u8(static_cast<std::uint8_t>(bits_per_index));
        w.bytes(pack_indices(p.indices, bits_per_index));
    } else {
        if (p.symbols.size() != cells * p.channel_dim) {
            throw ConfigError("analog payload symbol count does not match its grid");
        }
        w.u16(p.channel_dim);
        w.f32(p.scale);
        for (float s : p.symbols) w.f32(s);
    }
    return w.take();
}

codec::SemanticPayload decode_semantic(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes, "semantic payload truncated");
    codec::SemanticPayload p;
    const auto mode = r.u8();
    if (mode > 1) throw ProtocolError("unknown transmission mode " + std::to_string(mode));
    p.mode = static_cast<codec::TransmissionMode>(mode);
    p.grid_h = r.u16();
    p.grid_w = r.u16();
    p.snr_db = r.f32();
    const std::size_t cells = static_cast<std::size_t>(p.grid_h) * p.grid_w;
    if (p.mode == codec::TransmissionMode::digital) {
        const int bits = r.u8();
        const std::size_t nbytes = (cells * static_cast<std::size_t>(bits) + 7) / 8;
        p.indices = unpack_indices(r.bytes(nbytes), cells, bits);
    } else {
        p.channel_dim = r.u16();
        p.scale = r.f32();
        const std::size_t n = cells * p.channel_dim;
        if (r.remaining() < n * 4) throw ProtocolError("semantic payload truncated");
        p.symbols.resize(n);
        for (auto& s : p.symbols) s = r.f32();
    }
    if (!r.at_end()) throw ProtocolError("trailing bytes in semantic payload");
    return p;
}

std::vector<std::uint8_t> encode_depth(const ImageFrame& depth, double depth_scale)
{
    if (depth.channels != 1) throw ConfigError("depth frame must have one channel");
    if (depth.height > 0xffff || depth.width > 0xffff) throw ConfigError("depth frame too large for the wire");
    ByteWriter w;
    w.u16(static_cast<std::uint16_t>(depth.height));
    w.u16(static_cast<std::uint16_t>(depth.width));
    w.f32(static_cast<float>(depth_scale));
    for (double v : depth.data) w.u16(static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 65535.0))));
    return w.take();
}

DepthPayload decode_depth(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes, "depth payload truncated");
    const int h = r.u16(), w = r.u16();
    DepthPayload out;
    out.depth_scale = r.f32();
    const std::size_t n = static_cast<std::size_t>(h) * w;
    if (r.remaining() != n * 2) throw ProtocolError("depth payload length does not match " + std::to_string(w) + "x" +
                                                    std::to_string(h));
    out.depth = ImageFrame(h, w, 1);
    for (auto& v : out.depth.data) v = r.u16();
    return out;
}

ModelHash decode_sync(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() != 32) throw ProtocolError("codebook-sync payload must be 32 bytes");
    ModelHash h{};
    std::copy(bytes.begin(), bytes.end(), h.begin());
    return h;
}

}  // namespace semcomm::transport
