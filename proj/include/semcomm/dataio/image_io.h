#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "semcomm/core/image.h"

namespace semcomm::dataio {

// Binary PPM (P6, maxval 255) -> 3-channel frame with values in [0, 1].
// Binary PGM (P5, maxval <= 65535, 16-bit samples big-endian) -> 1-channel
// frame holding the raw sample values. Anything else raises IoError
// "unsupported format, convert to PPM/PGM".
ImageFrame decode_image(std::span<const std::uint8_t> bytes, const std::string& name = "image");
ImageFrame image_read(const std::filesystem::path& path);

// RGB frames are requantized to 8 bits (round to nearest, clamped); depth
// frames are written as 16-bit PGM with values rounded and clamped to
// [0, 65535].
std::vector<std::uint8_t> encode_image(const ImageFrame& frame);
void image_write(const std::filesystem::path& path, const ImageFrame& frame);

// Round-to-nearest 8-bit code of a [0, 1] value.
std::uint8_t quantize_unit(double v);

// Bilinear resampling with pixel-center alignment; same size is a copy.
ImageFrame resize_image(const ImageFrame& frame, int height, int width);

}  // namespace semcomm::dataio
