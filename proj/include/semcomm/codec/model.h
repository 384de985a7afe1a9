#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "semcomm/codec/blocks.h"
#include "semcomm/codec/config.h"

namespace semcomm::codec {

// K x D embedding table shared bit-identically by both endpoints.
struct Codebook {
    Tensor embeddings;  // [K, D]
    Tensor usage;       // [K] selection counts accumulated during training

    std::size_t size() const { return embeddings.dim(0); }
    std::size_t dim() const { return embeddings.dim(1); }
    std::span<const double> row(std::size_t k) const
    {
        return embeddings.data().subspan(k * dim(), dim());
    }
};

// Every trainable tensor of the codec plus batchnorm running statistics.
// Immutable during inference; safe to share read-only between threads.
struct CodecModel {
    CodecConfig config;

    std::array<DownStage, 2> enc_down;
    std::array<ResidualBlock, 2> enc_res;
    LayerParams tx_gate;       // dense 1 -> D
    Codebook codebook;
    LayerParams channel_enc;   // 1x1 conv D -> Dc
    LayerParams channel_dec;   // 1x1 conv Dc -> D
    LayerParams rx_gate;       // dense 1 -> D
    std::array<UpResidualStage, 2> dec_res;
    UpStage dec_up;
    UpStage dec_out;

    // Fresh model: Kaiming-uniform layers, codebook ~ U(-1/K, 1/K), channel
    // coder pair initialized to the identity (zero-padded when D != Dc).
    static CodecModel create(const CodecConfig& config, std::uint64_t seed);

    // Trainable tensors in a fixed order. Attention gates are excluded when
    // the config disables attention.
    std::vector<nn::ParamRef> trainable();
    // Everything that is checkpointed.
    std::vector<nn::ParamRef> state();

    // Marks all batchnorm running stats usable (mean 0, var 1) so an
    // untrained model can run in eval mode.
    void seed_running_stats();

    void zero_grad();

    // Checkpoint = u32 LE header length | codec config JSON | SLNN container.
    std::vector<std::uint8_t> serialize() const;
    static CodecModel deserialize(std::span<const std::uint8_t> bytes);
    void save(const std::filesystem::path& path) const;
    static CodecModel load(const std::filesystem::path& path);

    // SHA-256 of serialize().
    std::array<std::uint8_t, 32> digest() const;
    std::string digest_hex() const;

private:
    void for_each_batchnorm(const std::function<void(LayerParams&)>& fn);
};

std::string hex(std::span<const std::uint8_t> bytes);

}  // namespace semcomm::codec
