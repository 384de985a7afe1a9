#include "semcomm/nn/checkpoint.h"

#include <limits>
#include <unordered_map>

#include "semcomm/core/bytes.h"
#include "semcomm/core/errors.h"

namespace semcomm::nn {

std::vector<std::uint8_t> encode_checkpoint(std::span<const ParamRef> params)
{
    ByteWriter w;
    w.text("SLNN");
    w.u16(kCheckpointVersion);
    for (const auto& p : params) {
        if (p.name.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw ConfigError("checkpoint: parameter name too long");
        }
        const Shape& shape = p.tensor->shape();
        if (shape.size() > 255) throw ConfigError("checkpoint: too many dimensions in '" + p.name + "'");
        w.u16(static_cast<std::uint16_t>(p.name.size()));
        w.text(p.name);
        w.u8(static_cast<std::uint8_t>(shape.size()));
        for (auto d : shape) w.u32(static_cast<std::uint32_t>(d));
        for (double v : p.tensor->data()) w.f64(v);
    }
    return w.take();
}

std::vector<NamedTensor> decode_checkpoint(std::span<const std::uint8_t> bytes)
{
    ByteReader<IoError> r(bytes, "checkpoint: truncated data");
    if (r.text(4) != "SLNN") throw IoError("checkpoint: bad magic (expected SLNN)");
    const auto version = r.u16();
    if (version != kCheckpointVersion) {
        throw IoError("checkpoint: unsupported version " + std::to_string(version));
    }
    std::vector<NamedTensor> out;
    while (!r.at_end()) {
        NamedTensor nt;
        nt.name = r.text(r.u16());
        const auto ndims = r.u8();
        Shape shape(ndims);
        for (auto& d : shape) d = r.u32();
        std::vector<double> values(shape_numel(shape));
        for (auto& v : values) v = r.f64();
        nt.tensor = Tensor(std::move(shape), std::move(values));
        out.push_back(std::move(nt));
    }
    return out;
}

void load_into(std::span<const NamedTensor> stored, std::span<const ParamRef> params)
{
    std::unordered_map<std::string, const Tensor*> by_name;
    for (const auto& s : stored) by_name[s.name] = &s.tensor;
    for (const auto& p : params) {
        auto it = by_name.find(p.name);
        if (it == by_name.end()) throw ConfigError("checkpoint: missing parameter '" + p.name + "'");
        if (it->second->shape() != p.tensor->shape()) {
            throw ConfigError("checkpoint: parameter '" + p.name + "' has shape " +
                              shape_string(it->second->shape()) + ", model expects " +
                              shape_string(p.tensor->shape()));
        }
        *p.tensor = *it->second;
    }
}

}  // namespace semcomm::nn
