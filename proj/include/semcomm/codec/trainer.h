#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "semcomm/codec/codec.h"
#include "semcomm/nn/adam.h"

namespace semcomm::codec {

struct LossTerms {
    double total = 0.0;
    double recon_mse = 0.0;
    double codebook = 0.0;
    double commit = 0.0;
};

// Value and gradients of
//   L = MSE(s, s_hat) + mean|sg(z_e) - e|^2 + beta * mean|z_e - sg(e)|^2
// where e holds the selected codewords. The codebook receives gradient only
// from the middle term, the encoder side only from the last one here (the
// reconstruction path reaches it straight through the quantizer).
struct VqLoss {
    LossTerms terms;
    Tensor grad_recon;     // dL/ds_hat
    Tensor grad_features;  // dL/dz_e, commitment term only
    Tensor grad_codewords; // dL/de per cell, same shape as z_e
};

// z_e_sg and e_sg are the stop-gradient copies; pass the same tensors as
// z_e / e outside of gradient checking.
VqLoss vq_loss(const Tensor& s, const Tensor& s_hat, const Tensor& z_e, const Tensor& e,
               double commitment, const Tensor* z_e_sg = nullptr, const Tensor* e_sg = nullptr);

// Quantities a forward pass treats as constants: codeword selections on both
// sides of the channel and the stop-gradient operands of the loss. Replaying
// a forward pass with a frozen snapshot turns the loss into a smooth function
// of the parameters whose derivative is the straight-through gradient, which
// is what finite differences can check.
struct FrozenSelection {
    std::vector<std::uint32_t> tx_indices;
    Tensor tx_offset;  // e_sel - z_e
    std::vector<std::uint32_t> rx_indices;
    Tensor rx_offset;  // e_sel - r (analog receiver snap)
    Tensor z_e;        // stop-gradient copy for the codebook term
    Tensor e;          // stop-gradient copy for the commitment term
};

struct ForwardOptions {
    double snr_db = 20.0;
    std::uint64_t noise_seed = 0;
    const FrozenSelection* frozen = nullptr;
};

// Train-mode forward/backward over a batch with every cache needed by the
// analytic backward pass. Owns no parameters; writes gradients into the model.
class TrainingGraph {
public:
    explicit TrainingGraph(CodecModel& model) : model_(model) {}

    LossTerms forward(const Tensor& images, const ForwardOptions& options);
    // Accumulates into the model's gradient buffers (call model.zero_grad()
    // first).
    void backward();

    const Tensor& reconstruction() const { return s_hat_; }
    const std::vector<std::uint32_t>& tx_indices() const { return tx_indices_; }
    FrozenSelection freeze() const;

private:
    CodecModel& model_;
    bool analog_ = false;
    double snr_db_ = 0.0;

    Tensor images_;
    std::array<DownStage::Cache, 2> down_;
    std::array<ResidualBlock::Cache, 2> res_;
    Tensor z_enc_;
    Tensor snr_input_;
    Tensor tx_w_;
    Tensor z_e_;
    std::vector<std::uint32_t> tx_indices_;
    Tensor e_sel_;
    Tensor z_q_;
    // analog channel
    Tensor u_;
    std::vector<double> scale_;
    Tensor noise_;
    Tensor v_;
    Tensor r_;
    std::vector<std::uint32_t> rx_indices_;
    Tensor z_r_;
    Tensor rx_w_;
    std::array<UpResidualStage::Cache, 2> up_res_;
    UpStage::Cache up_;
    UpStage::Cache out_;
    Tensor s_hat_;
    VqLoss loss_;
};

struct TrainConfig {
    int epochs = 10;
    int batch_size = 8;
    double snr_lo_db = 0.0;
    double snr_hi_db = 20.0;
    std::uint64_t seed = 0;
    nn::AdamConfig adam{};
};

struct EpochLog {
    int epoch = 0;
    double loss = 0.0;
    double recon_mse = 0.0;
    double codebook_loss = 0.0;
    double commit_loss = 0.0;
    double psnr = 0.0;
};

struct TrainResult {
    CodecModel model;
    std::vector<EpochLog> log;
    std::uint64_t steps = 0;
};

// SNR and noise seed used at a given global training step.
struct StepDraw {
    double snr_db = 0.0;
    std::uint64_t noise_seed = 0;
};
StepDraw training_draw(std::uint64_t seed, std::uint64_t step, double snr_lo_db, double snr_hi_db);

// Order in which an epoch visits the dataset.
std::vector<std::size_t> epoch_order(std::uint64_t seed, int epoch, std::size_t dataset_size);

using EpochCallback = std::function<void(const EpochLog&)>;

// Deterministic for a fixed seed. Throws TrainingError with the step index
// when the loss stops being finite.
TrainResult train(std::span<const ImageFrame> dataset, const CodecConfig& config, const TrainConfig& train_config,
                  const EpochCallback& on_epoch = {});

// CSV: epoch,loss,recon_mse,codebook_loss,commit_loss,psnr
void write_training_csv(std::ostream& out, std::span<const EpochLog> log);

}  // namespace semcomm::codec
