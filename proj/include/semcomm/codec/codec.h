#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "semcomm/channel/awgn.h"
#include "semcomm/codec/model.h"
#include "semcomm/core/image.h"

namespace semcomm::codec {

// What the transmitter puts on the channel for one RGB frame.
struct SemanticPayload {
    std::uint16_t grid_h = 0;
    std::uint16_t grid_w = 0;
    TransmissionMode mode = TransmissionMode::digital;
    float snr_db = 0.0f;
    // digital: one index per latent cell, row-major
    std::vector<std::uint16_t> indices;
    // analog: grid_h * grid_w * channel_dim symbols, cell-major
    std::uint16_t channel_dim = 0;
    float scale = 1.0f;
    std::vector<float> symbols;

    bool operator==(const SemanticPayload&) const = default;
};

// [1, C, H, W] from an interleaved H x W x C frame, and back.
Tensor image_to_tensor(const ImageFrame& image);
Tensor images_to_batch(std::span<const ImageFrame> images);
ImageFrame tensor_to_image(const Tensor& t, std::size_t batch_index = 0, std::int64_t timestamp_us = 0);

// Per-channel gate weights sigmoid(fc(snr_db / divisor)), each in (0, 1).
std::vector<double> attention_weights(double snr_db, const LayerParams& fc, double divisor);
// out[n, c, i, j] = w[c] * z[n, c, i, j].
Tensor attention_gate(const Tensor& z, double snr_db, const LayerParams& fc, double divisor);
Tensor scale_channels(const Tensor& z, std::span<const double> weights);

// Index of the codeword nearest to v in Euclidean distance; ties go to the
// lowest index.
std::size_t nearest_codeword(std::span<const double> v, const Codebook& codebook);

struct Quantized {
    std::vector<std::uint32_t> indices;  // per (n, i, j), row-major
    Tensor z_q;                          // codewords substituted, same shape as z
};

// z is [N, D, h, w] with D == codebook dim.
Quantized quantize(const Tensor& z, const Codebook& codebook);
// [N, D, h, w] tensor of codewords for the given indices.
Tensor lookup(std::span<const std::uint32_t> indices, std::size_t batch, std::size_t grid_h,
              std::size_t grid_w, const Codebook& codebook);

// 1x1 conv D -> Dc, then unit-power normalization. Symbols come out
// cell-major (all Dc values of cell 0, then cell 1, ...).
channel::ChannelSymbols channel_encode(const Tensor& z_q, const LayerParams& channel_enc);

// Undoes the normalization scale, applies the 1x1 conv Dc -> D and snaps
// every cell to its nearest codeword.
Tensor channel_decode(const channel::ChannelSymbols& y, std::size_t grid_h, std::size_t grid_w,
                      const LayerParams& channel_dec, const Codebook& codebook);
// Mode dispatch over a received payload. Digital indices >= K raise
// ProtocolError.
Tensor channel_decode(const SemanticPayload& payload, const CodecModel& model);

// Encoder stack only (eval mode). [N, 3, H, W] -> [N, D, H/16, W/16].
Tensor encode_features(const Tensor& images, const CodecModel& model);

struct EncodeResult {
    Tensor z_e;  // gated, pre-quantization features
    Tensor z_q;
    std::vector<std::uint32_t> indices;
    SemanticPayload payload;  // analog symbols are noise-free here
};

EncodeResult encode(const ImageFrame& image, double snr_db, const CodecModel& model);

// Receiver gate, then the up-sampling stack. Output values lie in [0, 1].
ImageFrame decode(const Tensor& z_q, double snr_db, const CodecModel& model,
                  std::int64_t timestamp_us = 0);

// Payload -> reconstructed image in one call.
ImageFrame reconstruct(const SemanticPayload& payload, const CodecModel& model,
                       std::int64_t timestamp_us = 0);

// Adds channel noise to an analog payload in place; digital payloads are
// left untouched.
void apply_channel(SemanticPayload& payload, const channel::AwgnConfig& awgn);

}  // namespace semcomm::codec
