#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semcomm/nn/adam.h"

namespace semcomm::nn {

// Binary parameter container:
//   "SLNN" | version u16 | records...
//   record = name_len u16 | UTF-8 name | ndims u8 | dims u32 x ndims | f64 payload
// All integers and floats little-endian. Records run to the end of the data.
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

std::vector<std::uint8_t> encode_checkpoint(std::span<const ParamRef> params);
std::vector<NamedTensor> decode_checkpoint(std::span<const std::uint8_t> bytes);

// Copies decoded values into the matching parameters by name. Throws
// ConfigError on a missing name or a shape mismatch.
void load_into(std::span<const NamedTensor> stored, std::span<const ParamRef> params);

}  // namespace semcomm::nn
