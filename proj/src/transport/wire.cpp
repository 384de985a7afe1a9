#include "semcomm/transport/wire.h"

#include <algorithm>

#include "semcomm/core/bytes.h"
#include "semcomm/core/errors.h"
#include "semcomm/transport/stream.h"

namespace semcomm::transport {

std::string to_string(FrameType type)
{
    switch (type) {
        case FrameType::semantic: return "semantic";
        case FrameType::depth: return "depth";
        case FrameType::codebook_sync: return "codebook-sync";
        case FrameType::end_of_stream: return "end-of-stream";
    }
    return "unknown";
}

std::vector<std::uint8_t> encode_frame(const WireFrame& frame)
{
    if (frame.payload.size() > 0xffffffffu) throw ProtocolError("frame payload exceeds 4 GiB");
    ByteWriter w;
    w.bytes(kMagic);
    w.u8(kWireVersion);
    w.u8(static_cast<std::uint8_t>(frame.type));
    w.u64(frame.timestamp_us);
    w.u32(static_cast<std::uint32_t>(frame.payload.size()));
    w.bytes(frame.payload);
    return w.take();
}

FrameHeader decode_header(std::span<const std::uint8_t> header)
{
    if (header.size() < kFrameHeaderSize) throw ProtocolError("incomplete frame");
    if (!std::equal(kMagic.begin(), kMagic.end(), header.begin())) throw ProtocolError("not a SCM stream");
    ByteReader r(header.subspan(4), "incomplete frame");
    const auto version = r.u8();
    if (version != kWireVersion) {
        throw ProtocolError("unsupported wire version " + std::to_string(version));
    }
    const auto type = r.u8();
    if (type > static_cast<std::uint8_t>(FrameType::end_of_stream)) {
        throw ProtocolError("unknown frame type " + std::to_string(type));
    }
    FrameHeader h;
    h.type = static_cast<FrameType>(type);
    h.timestamp_us = r.u64();
    h.payload_len = r.u32();
    return h;
}

WireFrame decode_frame(std::span<const std::uint8_t> bytes)
{
    const FrameHeader h = decode_header(bytes);
    if (bytes.size() - kFrameHeaderSize < h.payload_len) throw ProtocolError("incomplete frame");
    if (bytes.size() - kFrameHeaderSize > h.payload_len) throw ProtocolError("trailing bytes after frame");
    WireFrame f;
    f.type = h.type;
    f.timestamp_us = h.timestamp_us;
    f.payload.assign(bytes.begin() + kFrameHeaderSize, bytes.end());
    return f;
}

void write_frame(ByteSink& sink, const WireFrame& frame)
{
    sink.write(encode_frame(frame));
}

std::optional<WireFrame> read_frame(ByteSource& source, std::uint32_t max_payload)
{
    std::array<std::uint8_t, kFrameHeaderSize> header{};
    const std::size_t got = read_fully(source, header);
    if (got == 0) return std::nullopt;
    if (got < header.size()) throw ProtocolError("incomplete frame");
    const FrameHeader h = decode_header(header);
    if (h.payload_len > max_payload) {
        throw ProtocolError("frame payload of " + std::to_string(h.payload_len) + " bytes exceeds limit");
    }
    WireFrame f;
    f.type = h.type;
    f.timestamp_us = h.timestamp_us;
    f.payload.resize(h.payload_len);
    if (read_fully(source, f.payload) < h.payload_len) throw ProtocolError("incomplete frame");
    return f;
}

}  // namespace semcomm::transport
