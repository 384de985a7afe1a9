#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "semcomm/codec/codec.h"
#include "semcomm/core/image.h"

namespace semcomm::transport {

// Semantic payload bytes:
//   mode u8 | grid_h u16 | grid_w u16 | snr_db f32 | body
//   digital body: bits_per_index u8 | indices packed LSB-first, padded to a byte
//   analog body:  channel_dim u16 | scale f32 | symbols f32 (cell-major)
inline constexpr std::size_t kSemanticHeaderSize = 9;
inline constexpr std::size_t kDigitalBodyHeaderSize = 1;
inline constexpr std::size_t kAnalogBodyHeaderSize = 6;

std::vector<std::uint8_t> encode_semantic(const codec::SemanticPayload& payload, int bits_per_index);
codec::SemanticPayload decode_semantic(std::span<const std::uint8_t> bytes);

// LSB-first fixed-width bit packing.
std::vector<std::uint8_t> pack_indices(std::span<const std::uint16_t> indices, int bits);
std::vector<std::uint16_t> unpack_indices(std::span<const std::uint8_t> bytes, std::size_t count, int bits);

// Depth payload: h u16 | w u16 | depth_scale f32 | raw u16 values row-major.
// Values are rounded and clamped to [0, 65535].
std::vector<std::uint8_t> encode_depth(const ImageFrame& depth, double depth_scale);
struct DepthPayload {
    ImageFrame depth;  // raw sensor units, one channel
    float depth_scale = 0.0f;
};
DepthPayload decode_depth(std::span<const std::uint8_t> bytes);

using ModelHash = std::array<std::uint8_t, 32>;
ModelHash decode_sync(std::span<const std::uint8_t> bytes);

}  // namespace semcomm::transport
