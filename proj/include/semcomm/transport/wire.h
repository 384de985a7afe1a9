#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace semcomm::transport {

class ByteSink;
class ByteSource;

enum class FrameType : std::uint8_t { semantic = 0, depth = 1, codebook_sync = 2, end_of_stream = 3 };

std::string to_string(FrameType type);

inline constexpr std::array<std::uint8_t, 4> kMagic{'S', 'C', 'M', '1'};
inline constexpr std::uint8_t kWireVersion = 1;
// magic 4 + version 1 + type 1 + timestamp 8 + payload length 4
inline constexpr std::size_t kFrameHeaderSize = 18;

struct WireFrame {
    FrameType type = FrameType::end_of_stream;
    std::uint64_t timestamp_us = 0;
    std::vector<std::uint8_t> payload;

    std::size_t wire_size() const { return kFrameHeaderSize + payload.size(); }
    bool operator==(const WireFrame&) const = default;
};

struct FrameHeader {
    FrameType type = FrameType::end_of_stream;
    std::uint64_t timestamp_us = 0;
    std::uint32_t payload_len = 0;
};

std::vector<std::uint8_t> encode_frame(const WireFrame& frame);

// Validates magic ("not a SCM stream"), version and frame type
// (ProtocolError).
FrameHeader decode_header(std::span<const std::uint8_t> header);

// Exactly one frame. Short input raises ProtocolError("incomplete frame"),
// as do trailing bytes.
WireFrame decode_frame(std::span<const std::uint8_t> bytes);

// Frames larger than this are refused when reading from a stream.
inline constexpr std::uint32_t kDefaultMaxPayload = 256u << 20;

void write_frame(ByteSink& sink, const WireFrame& frame);
// nullopt on a clean end of data before the first header byte.
std::optional<WireFrame> read_frame(ByteSource& source, std::uint32_t max_payload = kDefaultMaxPayload);

}  // namespace semcomm::transport
