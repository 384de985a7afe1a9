#include "semcomm/codec/trainer.h"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "semcomm/core/errors.h"
#include "semcomm/core/rng.h"

namespace semcomm::codec {
namespace {

double mean_squared_diff(const Tensor& a, const Tensor& b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

// dL/dw for out = w[c] * z.
std::vector<double> channel_weight_grad(const Tensor& z, const Tensor& grad_out)
{
    const std::size_t n = z.dim(0), c = z.dim(1), plane = z.dim(2) * z.dim(3);
    std::vector<double> g(c, 0.0);
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t base = (b * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) g[ch] += grad_out[base + i] * z[base + i];
        }
    }
    return g;
}

// Backward through w = sigmoid(fc(s)) given dL/dw.
void gate_backward(LayerParams& fc, const Tensor& snr_input, const Tensor& weights, std::span<const double> grad_w)
{
    Tensor g_pre({weights.size()});
    for (std::size_t c = 0; c < weights.size(); ++c) g_pre[c] = grad_w[c] * weights[c] * (1.0 - weights[c]);
    nn::dense_backward(snr_input, fc, g_pre);
}

void accumulate_codebook_grad(Codebook& codebook, std::span<const std::uint32_t> indices, const Tensor& grad_cells)
{
    if (!codebook.embeddings.has_grad()) return;
    const std::size_t n = grad_cells.dim(0), d = grad_cells.dim(1), h = grad_cells.dim(2), w = grad_cells.dim(3);
    auto g = codebook.embeddings.grad();
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t j = 0; j < w; ++j) {
                const std::size_t k = indices[(b * h + i) * w + j];
                for (std::size_t c = 0; c < d; ++c) g[k * d + c] += grad_cells.at(b, c, i, j);
            }
        }
    }
}

Tensor subtract(const Tensor& a, const Tensor& b)
{
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

}  // namespace

VqLoss vq_loss(const Tensor& s, const Tensor& s_hat, const Tensor& z_e, const Tensor& e, double commitment,
               const Tensor* z_e_sg, const Tensor* e_sg)
{
    if (s.shape() != s_hat.shape()) {
        throw ConfigError("vq_loss: image shapes differ " + nn::shape_string(s.shape()) + " vs " +
                          nn::shape_string(s_hat.shape()));
    }
    if (z_e.shape() != e.shape()) {
        throw ConfigError("vq_loss: feature shapes differ " + nn::shape_string(z_e.shape()) + " vs " +
                          nn::shape_string(e.shape()));
    }
    const Tensor& ze_const = z_e_sg ? *z_e_sg : z_e;
    const Tensor& e_const = e_sg ? *e_sg : e;

    VqLoss out;
    out.terms.recon_mse = mean_squared_diff(s_hat, s);
    out.terms.codebook = mean_squared_diff(ze_const, e);
    out.terms.commit = mean_squared_diff(z_e, e_const);
    out.terms.total = out.terms.recon_mse + out.terms.codebook + commitment * out.terms.commit;

    const double nx = static_cast<double>(s.size());
    const double nz = static_cast<double>(z_e.size());
    out.grad_recon = Tensor(s.shape());
    for (std::size_t i = 0; i < s.size(); ++i) out.grad_recon[i] = 2.0 * (s_hat[i] - s[i]) / nx;
    out.grad_features = Tensor(z_e.shape());
    out.grad_codewords = Tensor(z_e.shape());
    for (std::size_t i = 0; i < z_e.size(); ++i) {
        out.grad_features[i] = 2.0 * commitment * (z_e[i] - e_const[i]) / nz;
        out.grad_codewords[i] = 2.0 * (e[i] - ze_const[i]) / nz;
    }
    return out;
}

LossTerms TrainingGraph::forward(const Tensor& images, const ForwardOptions& options)
{
    auto& m = model_;
    const auto& cfg = m.config;
    const FrozenSelection* frozen = options.frozen;
    analog_ = cfg.mode == TransmissionMode::analog;
    snr_db_ = options.snr_db;
    images_ = images;
    snr_input_ = Tensor({1}, std::vector<double>{options.snr_db / cfg.snr_divisor_db});

    // Encoder.
    Tensor h = m.enc_down[0].forward_train(images, down_[0]);
    h = m.enc_down[1].forward_train(h, down_[1]);
    h = m.enc_res[0].forward_train(h, res_[0]);
    z_enc_ = m.enc_res[1].forward_train(h, res_[1]);

    if (cfg.attention) {
        tx_w_ = nn::activation(nn::dense(snr_input_, m.tx_gate), nn::Activation::sigmoid);
        z_e_ = scale_channels(z_enc_, tx_w_.values());
    } else {
        z_e_ = z_enc_;
    }

    // Quantizer (straight-through).
    const std::size_t n = z_e_.dim(0), gh = z_e_.dim(2), gw = z_e_.dim(3);
    if (frozen) {
        tx_indices_ = frozen->tx_indices;
        e_sel_ = lookup(tx_indices_, n, gh, gw, m.codebook);
        z_q_ = add(z_e_, frozen->tx_offset);
    } else {
        auto q = quantize(z_e_, m.codebook);
        tx_indices_ = std::move(q.indices);
        e_sel_ = std::move(q.z_q);
        z_q_ = e_sel_;
    }

    // Channel.
    if (analog_) {
        u_ = nn::conv2d(z_q_, m.channel_enc, 1, 0);
        const std::size_t per_image = u_.size() / n;
        noise_ = Tensor(u_.shape(), channel::awgn_noise(u_.size(), {options.snr_db, options.noise_seed}));
        scale_.assign(n, 0.0);
        v_ = u_;
        for (std::size_t b = 0; b < n; ++b) {
            double p = 0.0;
            for (std::size_t i = 0; i < per_image; ++i) p += u_[b * per_image + i] * u_[b * per_image + i];
            p /= static_cast<double>(per_image);
            if (!(p > 0.0)) throw NumericError("zero-power signal cannot be normalized");
            scale_[b] = std::sqrt(p);
            for (std::size_t i = 0; i < per_image; ++i) v_[b * per_image + i] += scale_[b] * noise_[b * per_image + i];
        }
        r_ = nn::conv2d(v_, m.channel_dec, 1, 0);
        if (frozen) {
            rx_indices_ = frozen->rx_indices;
            z_r_ = add(r_, frozen->rx_offset);
        } else {
            auto q = quantize(r_, m.codebook);
            rx_indices_ = std::move(q.indices);
            z_r_ = std::move(q.z_q);
        }
    } else {
        z_r_ = z_q_;
    }

    // Decoder.
    Tensor d = z_r_;
    if (cfg.attention) {
        rx_w_ = nn::activation(nn::dense(snr_input_, m.rx_gate), nn::Activation::sigmoid);
        d = scale_channels(z_r_, rx_w_.values());
    }
    d = m.dec_res[0].forward_train(d, up_res_[0]);
    d = m.dec_res[1].forward_train(d, up_res_[1]);
    d = m.dec_up.forward_train(d, up_);
    s_hat_ = m.dec_out.forward_train(d, out_);

    loss_ = vq_loss(images, s_hat_, z_e_, e_sel_, cfg.commitment, frozen ? &frozen->z_e : nullptr,
                    frozen ? &frozen->e : nullptr);
    return loss_.terms;
}

void TrainingGraph::backward()
{
    auto& m = model_;
    const auto& cfg = m.config;

    Tensor g = m.dec_out.backward(out_, loss_.grad_recon);
    g = m.dec_up.backward(up_, g);
    g = m.dec_res[1].backward(up_res_[1], g);
    g = m.dec_res[0].backward(up_res_[0], g);

    Tensor g_zr = g;
    if (cfg.attention) {
        gate_backward(m.rx_gate, snr_input_, rx_w_, channel_weight_grad(z_r_, g));
        g_zr = scale_channels(g, rx_w_.values());
    }

    Tensor g_zq;
    if (analog_) {
        // Straight through the receiver snap.
        Tensor g_v = nn::conv2d_backward(v_, m.channel_dec, g_zr, 1, 0);
        const std::size_t n = u_.dim(0), per_image = u_.size() / n;
        Tensor g_u = g_v;
        for (std::size_t b = 0; b < n; ++b) {
            double gn = 0.0;
            for (std::size_t i = 0; i < per_image; ++i) gn += g_v[b * per_image + i] * noise_[b * per_image + i];
            const double k = gn / (static_cast<double>(per_image) * scale_[b]);
            for (std::size_t i = 0; i < per_image; ++i) g_u[b * per_image + i] += k * u_[b * per_image + i];
        }
        g_zq = nn::conv2d_backward(z_q_, m.channel_enc, g_u, 1, 0);
    } else {
        g_zq = g_zr;
    }

    // Straight through the transmitter quantizer, plus the commitment term.
    Tensor g_ze = add(g_zq, loss_.grad_features);
    accumulate_codebook_grad(m.codebook, tx_indices_, loss_.grad_codewords);

    Tensor g_enc = g_ze;
    if (cfg.attention) {
        gate_backward(m.tx_gate, snr_input_, tx_w_, channel_weight_grad(z_enc_, g_ze));
        g_enc = scale_channels(g_ze, tx_w_.values());
    }

    g = m.enc_res[1].backward(res_[1], g_enc);
    g = m.enc_res[0].backward(res_[0], g);
    g = m.enc_down[1].backward(down_[1], g);
    m.enc_down[0].backward(down_[0], g);
}

FrozenSelection TrainingGraph::freeze() const
{
    FrozenSelection f;
    f.tx_indices = tx_indices_;
    f.tx_offset = subtract(e_sel_, z_e_);
    if (analog_) {
        f.rx_indices = rx_indices_;
        f.rx_offset = subtract(z_r_, r_);
    }
    f.z_e = z_e_;
    f.e = e_sel_;
    return f;
}

StepDraw training_draw(std::uint64_t seed, std::uint64_t step, double snr_lo_db, double snr_hi_db)
{
    Rng rng(mix_seed(seed, step));
    StepDraw d;
    d.snr_db = rng.uniform(snr_lo_db, snr_hi_db);
    d.noise_seed = rng.next_u64();
    return d;
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, int epoch, std::size_t dataset_size)
{
    std::vector<std::size_t> order(dataset_size);
    for (std::size_t i = 0; i < dataset_size; ++i) order[i] = i;
    Rng rng(mix_seed(seed ^ 0x5EED0F0E90C4ULL, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = dataset_size; i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

TrainResult train(std::span<const ImageFrame> dataset, const CodecConfig& config, const TrainConfig& tc,
                  const EpochCallback& on_epoch)
{
    if (dataset.empty()) throw ConfigError("training dataset is empty");
    if (tc.snr_lo_db > tc.snr_hi_db) throw ConfigError("snr range lower bound exceeds upper bound");
    if (tc.batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (tc.epochs < 1) throw ConfigError("epochs must be >= 1");
    for (const auto& img : dataset) {
        if (img.height != config.height || img.width != config.width || img.channels != 3) {
            throw ConfigError("training image size does not match codec config");
        }
    }

    TrainResult result{CodecModel::create(config, tc.seed), {}, 0};
    CodecModel& model = result.model;
    auto params = model.trainable();
    nn::Adam adam(tc.adam);
    TrainingGraph graph(model);

    const std::size_t batch = static_cast<std::size_t>(tc.batch_size);
    std::uint64_t step = 0;
    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        const auto order = epoch_order(tc.seed, epoch, dataset.size());
        LossTerms sum;
        int steps = 0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            std::vector<ImageFrame> images;
            for (std::size_t i = start; i < std::min(order.size(), start + batch); ++i) {
                images.push_back(dataset[order[i]]);
            }
            const auto draw = training_draw(tc.seed, step, tc.snr_lo_db, tc.snr_hi_db);
            model.zero_grad();
            const LossTerms terms = graph.forward(images_to_batch(images), {draw.snr_db, draw.noise_seed, nullptr});
            if (!std::isfinite(terms.total)) {
                std::ostringstream msg;
                msg << "training diverged at step " << step << " (epoch " << epoch << "): loss=" << terms.total
                    << " recon=" << terms.recon_mse << " codebook=" << terms.codebook << " commit=" << terms.commit;
                throw TrainingError(msg.str());
            }
            graph.backward();
            try {
                adam.step(params);
            } catch (const NumericError& e) {
                throw TrainingError("training diverged at step " + std::to_string(step) + ": " + e.what());
            }
            for (auto k : graph.tx_indices()) model.codebook.usage[k] += 1.0;
            sum.total += terms.total;
            sum.recon_mse += terms.recon_mse;
            sum.codebook += terms.codebook;
            sum.commit += terms.commit;
            ++steps;
            ++step;
        }
        EpochLog rec;
        rec.epoch = epoch;
        rec.loss = sum.total / steps;
        rec.recon_mse = sum.recon_mse / steps;
        rec.codebook_loss = sum.codebook / steps;
        rec.commit_loss = sum.commit / steps;
        rec.psnr = rec.recon_mse > 0.0 ? 10.0 * std::log10(1.0 / rec.recon_mse)
                                       : std::numeric_limits<double>::infinity();
        result.log.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    for (auto& p : params) p.tensor->drop_grad();
    result.steps = step;
    return result;
}

void write_training_csv(std::ostream& out, std::span<const EpochLog> log)
{
    out << "epoch,loss,recon_mse,codebook_loss,commit_loss,psnr\n";
    const auto old = out.precision(17);
    for (const auto& r : log) {
        out << r.epoch << ',' << r.loss << ',' << r.recon_mse << ',' << r.codebook_loss << ',' << r.commit_loss
            << ',' << r.psnr << '\n';
    }
    out.precision(old);
}

}  // namespace semcomm::codec
