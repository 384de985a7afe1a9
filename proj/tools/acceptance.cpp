// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "semcomm/channel/awgn.h"
#include "semcomm/cli/commands.h"
#include "semcomm/codec/codec.h"
#include "semcomm/codec/trainer.h"
#include "semcomm/core/errors.h"
#include "semcomm/core/files.h"
#include "semcomm/core/logging.h"
#include "semcomm/core/rng.h"
#include "semcomm/metrics/image_metrics.h"
#include "semcomm/metrics/trajectory.h"
#include "semcomm/nn/grad_check.h"
#include "semcomm/nn/layers.h"
#include "semcomm/transport/payload.h"
#include "semcomm/transport/stream.h"
#include "semcomm/transport/wire.h"
#include "test_helpers.h"

using namespace semcomm;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and run sizes.
constexpr double kGradTol = 1e-4;
constexpr double kCodecStep = 1e-5;
constexpr std::size_t kGradSamples = 40;
constexpr int kVqCases = 1000;
constexpr std::size_t kChannelSymbols = 1'000'000;
constexpr double kVarianceTol = 0.01;
constexpr double kRhoTol = 0.01;
constexpr int kSanitySteps = 500;
constexpr double kSanityPsnr = 20.0;
constexpr int kTrendImages = 200;
constexpr int kTrendEpochs = 10;
constexpr int kTrendEvalImages = 50;
constexpr double kTrendSlackDb = 0.5;
constexpr double kRigidTol = 1e-9;
constexpr double kFixtureTol = 1e-12;
constexpr int kSceneFrames = 10;
constexpr int kMappingTrainFrames = 40;
constexpr int kMappingEpochs = 100;
constexpr double kMappingLr = 1e-3;
constexpr double kLabelAgreement = 0.95;
constexpr double kProbSumTol = 1e-9;
constexpr double kLatencyLimitMs = 1000.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v, int precision = 4)
{
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

struct Context {
    fs::path work;
    fs::path mapping_ckpt;  // trained 64x48 digital codec shared by 7 and 8
    nlohmann::json simulate_report;
};


struct ScreenedCheck {
    double max_rel_error = 0.0;
    std::string worst;
    std::size_t coordinates = 0;
    std::size_t kinks = 0;
};

double rel_error(double a, double b) { return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b)); }

// Central differences on sampled coordinates. When a coordinate misses the
// tolerance and its differences at h and h/10 disagree, the step straddles a
// ReLU kink; that coordinate is re-measured at h/10 and counted.
ScreenedCheck screened_grad_check(const std::function<double()>& loss, std::span<const nn::ParamRef> params,
                                  double step, std::size_t samples, std::uint64_t seed)
{
    std::vector<std::size_t> offsets;
    std::size_t total = 0;
    for (const auto& p : params) {
        offsets.push_back(total);
        total += p.tensor->size();
    }
    Rng rng(seed);
    ScreenedCheck out;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t flat = rng.below(total);
        const auto it = std::upper_bound(offsets.begin(), offsets.end(), flat) - 1;
        const std::size_t pi = std::size_t(it - offsets.begin()), idx = flat - *it;
        nn::Tensor& t = *params[pi].tensor;
        const double original = t[idx];
        auto central = [&](double h) {
            t[idx] = original + h;
            const double plus = loss();
            t[idx] = original - h;
            const double minus = loss();
            t[idx] = original;
            return (plus - minus) / (2.0 * h);
        };
        const double analytic = t.grad()[idx];
        const double coarse = central(step);
        double err = rel_error(analytic, coarse);
        if (err > kGradTol) {
            const double fine = central(step / 10);
            if (rel_error(coarse, fine) > kGradTol) {
                ++out.kinks;
                err = rel_error(analytic, fine);
            }
        }
        ++out.coordinates;
        if (err > out.max_rel_error || out.worst.empty()) {
            out.max_rel_error = err;
            out.worst = params[pi].name + "[" + std::to_string(idx) + "]";
        }
    }
    return out;
}

// Criterion 1.
double projection_check(nn::LayerParams& p, nn::Tensor& input,
                        const std::function<nn::Tensor(const nn::Tensor&)>& fwd,
                        const std::function<nn::Tensor(const nn::Tensor&, const nn::Tensor&)>& bwd, Rng& rng)
{
    const nn::Tensor out = fwd(input);
    const nn::Tensor r = testing::random_tensor(out.shape(), rng);
    p.zero_grad();
    input.zero_grad();
    const nn::Tensor gin = bwd(input, r);
    for (std::size_t i = 0; i < gin.size(); ++i) input.grad()[i] = gin[i];
    std::vector<nn::ParamRef> params{{"weight", &p.weight}, {"input", &input}};
    if (!p.bias.empty()) params.push_back({"bias", &p.bias});
    return nn::grad_check([&] { return nn::dot(r, fwd(input)); }, params).max_rel_error;
}

Outcome gradients(Context&)
{
    Rng rng(101);
    double worst = 0.0;
    std::string worst_name;
    auto note = [&](double e, const std::string& name) {
        if (e > worst) {
            worst = e;
            worst_name = name;
        }
    };
    {
        auto p = nn::LayerParams::conv(2, 3, 3);
        testing::randomize(p.weight, rng);
        testing::randomize(p.bias, rng);
        nn::Tensor x = testing::random_tensor({2, 2, 5, 5}, rng);
        note(projection_check(
                 p, x, [&](const nn::Tensor& in) { return nn::conv2d(in, p, 2, 1); },
                 [&](const nn::Tensor& in, const nn::Tensor& g) { return nn::conv2d_backward(in, p, g, 2, 1); }, rng),
             "conv2d");
    }
    {
        auto p = nn::LayerParams::conv_transpose(3, 2, 4);
        testing::randomize(p.weight, rng);
        testing::randomize(p.bias, rng);
        nn::Tensor x = testing::random_tensor({2, 3, 3, 3}, rng);
        note(projection_check(
                 p, x, [&](const nn::Tensor& in) { return nn::conv_transpose2d(in, p, 2, 1); },
                 [&](const nn::Tensor& in, const nn::Tensor& g) {
                     return nn::conv_transpose2d_backward(in, p, g, 2, 1);
                 },
                 rng),
             "conv_transpose2d");
    }
    {
        auto p = nn::LayerParams::batchnorm(3);
        testing::randomize(p.weight, rng, 0.5, 2.0);
        testing::randomize(p.bias, rng);
        nn::Tensor x = testing::random_tensor({3, 3, 2, 2}, rng);
        nn::BatchNormCache cache;
        note(projection_check(
                 p, x, [&](const nn::Tensor& in) { return nn::batchnorm(in, p, nn::BatchNormMode::train, &cache); },
                 [&](const nn::Tensor& in, const nn::Tensor& g) {
                     nn::batchnorm(in, p, nn::BatchNormMode::train, &cache);
                     return nn::batchnorm_backward(cache, p, g);
                 },
                 rng),
             "batchnorm");
    }
    {
        auto p = nn::LayerParams::dense(4, 3);
        testing::randomize(p.weight, rng);
        testing::randomize(p.bias, rng);
        nn::Tensor x = testing::random_tensor({2, 4}, rng);
        note(projection_check(
                 p, x, [&](const nn::Tensor& in) { return nn::dense(in, p); },
                 [&](const nn::Tensor& in, const nn::Tensor& g) { return nn::dense_backward(in, p, g); }, rng),
             "dense");
    }
    for (auto kind : {nn::Activation::relu, nn::Activation::sigmoid, nn::Activation::tanh}) {
        nn::Tensor x = testing::random_tensor({24}, rng, 0.05, 1.0);
        for (std::size_t i = 0; i < x.size(); i += 2) x[i] = -x[i];
        const nn::Tensor r = testing::random_tensor({24}, rng);
        x.zero_grad();
        const nn::Tensor g = nn::activation_backward(nn::activation(x, kind), r, kind);
        for (std::size_t i = 0; i < g.size(); ++i) x.grad()[i] = g[i];
        std::vector<nn::ParamRef> params{{"x", &x}};
        note(nn::grad_check([&] { return nn::dot(r, nn::activation(x, kind)); }, params).max_rel_error,
             "activation");
    }

    std::size_t e2e_coords = 0, kinks = 0;
    for (auto [mode, attention] : {std::pair{codec::TransmissionMode::digital, true},
                                   std::pair{codec::TransmissionMode::analog, true},
                                   std::pair{codec::TransmissionMode::analog, false}}) {
        codec::CodecConfig c;
        c.height = 16;
        c.width = 32;
        c.channel_plan = {3, 4, 6, 6, 5};
        c.codebook_size = 8;
        c.channel_dim = 4;
        c.mode = mode;
        c.attention = attention;
        auto model = codec::CodecModel::create(c, 21);
        Rng rng(22);
        for (auto& v : model.codebook.embeddings.values()) v = rng.uniform(-1.0, 1.0);
        std::vector<ImageFrame> imgs{testing::random_image(16, 32, rng), testing::random_image(16, 32, rng)};
        const nn::Tensor batch = codec::images_to_batch(imgs);
        codec::TrainingGraph graph(model);
        graph.forward(batch, {7.0, 99, nullptr});
        const auto frozen = graph.freeze();
        model.zero_grad();
        graph.forward(batch, {7.0, 99, &frozen});
        graph.backward();
        auto params = model.trainable();
        const auto res = screened_grad_check([&] { return graph.forward(batch, {7.0, 99, &frozen}).total; },
                                             params, kCodecStep, kGradSamples, 5);
        e2e_coords += res.coordinates;
        kinks += res.kinks;
        note(res.max_rel_error, "codec/" + codec::to_string(mode) + (attention ? "" : "/no-attention") + ":" +
                                    res.worst);
    }
    return {worst <= kGradTol, "max rel err " + num(worst) + " (" + worst_name + ") <= " + num(kGradTol) + ", " +
                                   std::to_string(e2e_coords) + " end-to-end coords (" +
                                   std::to_string(kinks) + " straddling a kink, re-measured at h/10)"};
}

// Criterion 2.
Outcome vq_oracle(Context&)
{
    Rng rng(202);
    int mismatches = 0, ties = 0;
    for (int t = 0; t < kVqCases; ++t) {
        const std::size_t k = 2 + rng.below(63), d = 1 + rng.below(8);
        codec::Codebook book;
        book.embeddings = testing::random_tensor({k, d}, rng);
        book.usage = nn::Tensor({k});
        const std::size_t src = rng.below(k), dst = rng.below(k);
        for (std::size_t c = 0; c < d; ++c) book.embeddings[dst * d + c] = book.embeddings[src * d + c];
        nn::Tensor z = testing::random_tensor({1, d, 2, 2}, rng);
        // Cells 0 and 3 sit exactly on the duplicated codeword.
        for (std::size_t c = 0; c < d; ++c) {
            z.at(0, c, 0, 0) = book.embeddings[src * d + c];
            z.at(0, c, 1, 1) = book.embeddings[src * d + c];
        }
        ties += src != dst;
        const auto q = codec::quantize(z, book);
        for (std::size_t cell = 0; cell < 4; ++cell) {
            std::vector<double> v(d);
            for (std::size_t c = 0; c < d; ++c) v[c] = z.at(0, c, cell / 2, cell % 2);
            if (q.indices[cell] != testing::brute_force_nearest(v, book.embeddings)) ++mismatches;
        }
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatches over " + std::to_string(kVqCases) +
                                 " cases (" + std::to_string(ties) + " with planted ties)"};
}

// Criterion 3.
Outcome channel_statistics(Context&)
{
    Rng rng(303);
    std::vector<double> raw(kChannelSymbols);
    for (auto& v : raw) v = rng.uniform(-1.0, 1.0);
    const auto x = channel::power_normalize(raw);
    const auto y = channel::awgn_apply(x, {10.0, 7});
    double mn = 0.0, mx = 0.0;
    std::vector<double> n(kChannelSymbols);
    for (std::size_t i = 0; i < n.size(); ++i) {
        n[i] = y.symbols[i] - x.symbols[i];
        mn += n[i];
        mx += x.symbols[i];
    }
    mn /= double(n.size());
    mx /= double(n.size());
    double vn = 0.0, vx = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        vn += (n[i] - mn) * (n[i] - mn);
        vx += (x.symbols[i] - mx) * (x.symbols[i] - mx);
        cov += (n[i] - mn) * (x.symbols[i] - mx);
    }
    const double var = vn / double(n.size());
    const double rho = cov / std::sqrt(vn * vx);
    const double rel = std::abs(var - 0.1) / 0.1;
    return {rel <= kVarianceTol && std::abs(rho) < kRhoTol,
            "noise var " + num(var, 6) + " (rel dev " + num(rel, 3) + " <= " + num(kVarianceTol) + "), |rho| " +
                num(std::abs(rho), 3) + " < " + num(kRhoTol)};
}

// Criterion 4.
Outcome training_sanity(Context&)
{
    Rng rng(404);
    std::vector<ImageFrame> data;
    for (int i = 0; i < 8; ++i) {
        ImageFrame img(32, 32, 3);
        const double rgb[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
        for (std::size_t p = 0; p < img.pixel_count(); ++p)
            for (int c = 0; c < 3; ++c) img.data[p * 3 + c] = rgb[c];
        data.push_back(std::move(img));
    }
    codec::CodecConfig c;
    codec::TrainConfig tc;
    tc.epochs = kSanitySteps;
    tc.batch_size = 8;
    tc.snr_lo_db = tc.snr_hi_db = 20.0;
    tc.seed = 1;
    const auto start = std::chrono::steady_clock::now();
    const auto a = codec::train(data, c, tc);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto b = codec::train(data, c, tc);
    const double psnr = a.log.back().psnr;
    const bool same = a.model.digest() == b.model.digest();
    return {psnr >= kSanityPsnr && same && secs < 600.0 && a.steps == std::uint64_t(kSanitySteps),
            "train psnr " + num(psnr) + " dB >= " + num(kSanityPsnr) + " after " + std::to_string(a.steps) +
                " steps in " + num(secs, 3) + " s, rerun " + (same ? "identical" : "DIFFERS")};
}

// Criterion 5.
Outcome snr_trend(Context& ctx)
{
    const auto dir = ctx.work / "trend";
    std::vector<std::string> att, base;
    for (int seed = 1; seed <= 3; ++seed) {
        for (bool attention : {true, false}) {
            cli::RunConfig c;
            c.subcommand = "train";
            c.width = c.height = 32;
            c.frames = kTrendImages;
            c.epochs = kTrendEpochs;
            c.lr = kMappingLr;
            c.snr_lo_db = 0.0;
            c.snr_hi_db = 20.0;
            c.attention = attention;
            c.seed = std::uint64_t(seed);
            c.out = (dir / ((attention ? "att_" : "base_") + std::to_string(seed))).string();
            c.checkpoint = c.out + "/model.ckpt";
            cli::cmd_train(c);
            (attention ? att : base).push_back(c.checkpoint);
        }
    }
    cli::RunConfig a;
    a.subcommand = "ablate-snr";
    a.attention_checkpoints = att;
    a.baseline_checkpoints = base;
    a.frames = kTrendEvalImages;
    a.eval_seeds = 3;
    a.seed = 5;
    a.out = (dir / "ablation").string();
    const auto report = cli::cmd_ablate_snr(a);

    std::map<std::string, std::map<double, nlohmann::json>> rows;
    for (const auto& r : report["rows"]) rows[r["variant"]][r["snr_db"].get<double>()] = r;
    const double att0 = rows["attention"][0.0]["psnr_median"], base0 = rows["no_attention"][0.0]["psnr_median"];
    bool monotone = true;
    double prev = -1e9;
    std::string curve;
    for (const auto& [snr, r] : rows["attention"]) {
        const double m = r["psnr_mean"];
        monotone = monotone && m >= prev - kTrendSlackDb;
        prev = std::max(prev, m);
        curve += (curve.empty() ? "" : " ") + num(m);
    }
    return {att0 >= base0 && monotone && report["rows"].size() == 10,
            "0 dB median psnr attention " + num(att0) + " vs no-attention " + num(base0) +
                "; attention means [" + curve + "] nondecreasing within " + num(kTrendSlackDb) + " dB"};
}

// Criterion 6.
Outcome trajectory_oracle(Context&)
{
    Rng rng(606);
    double worst_rigid = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Trajectory ref;
        Eigen::Vector3d p = Eigen::Vector3d::Zero();
        for (int i = 0; i < 50; ++i) {
            p += Eigen::Vector3d(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.1, 0.1));
            Pose pose;
            pose.timestamp = 0.1 * i;
            pose.translation = p;
            pose.rotation = Eigen::Quaterniond(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian())
                                .normalized();
            ref.push_back(pose);
        }
        Eigen::Isometry3d G = Eigen::Isometry3d::Identity();
        G.linear() = Eigen::Quaterniond(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian())
                         .normalized()
                         .toRotationMatrix();
        G.translation() = Eigen::Vector3d(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10));
        Trajectory moved;
        for (const auto& q : ref.poses()) moved.push_back(Pose::from_transform(q.timestamp, G * q.transform()));
        worst_rigid = std::max(worst_rigid, metrics::ate(moved, ref).rmse);
    }

    auto pose = [](double t, Eigen::Vector3d xyz, double yaw) {
        Pose p;
        p.timestamp = t;
        p.translation = xyz;
        p.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()));
        return p;
    };
    // ATE: estimate = reference scaled by 1.1 about its centroid (1, 1, 0), so
    // the residuals are 0.1 |r_i - c| = 0.1 {sqrt2, sqrt5, sqrt5}.
    const Trajectory ate_ref({pose(0, {0, 0, 0}, 0), pose(1, {3, 0, 0}, 0), pose(2, {0, 3, 0}, 0)});
    Trajectory ate_est;
    for (const auto& p : ate_ref.poses()) {
        ate_est.push_back(pose(p.timestamp, Eigen::Vector3d(1, 1, 0) + 1.1 * (p.translation - Eigen::Vector3d(1, 1, 0)), 0));
    }
    const auto a = metrics::ate(ate_est, ate_ref);
    double dev = std::abs(a.rmse - 0.2);
    dev = std::max(dev, std::abs(a.mean - 0.1 * (std::sqrt(2.0) + 2 * std::sqrt(5.0)) / 3.0));
    dev = std::max(dev, std::abs(a.max - 0.1 * std::sqrt(5.0)));
    // RPE: relative errors (0.1, 0, 0) and (0, -0.2, 0) by hand.
    const double q = M_PI / 2;
    const Trajectory rpe_ref({pose(0, {0, 0, 0}, 0), pose(1, {1, 0, 0}, q), pose(2, {1, 1, 0}, q)});
    const Trajectory rpe_est({pose(0, {0, 0, 0}, 0), pose(1, {1, 0.1, 0}, q), pose(2, {1.2, 1.1, 0}, q)});
    const auto r = metrics::rpe(rpe_est, rpe_ref, 1);
    dev = std::max(dev, std::abs(r.rmse - std::sqrt(0.025)));
    dev = std::max(dev, std::abs(r.mean - 0.15));
    dev = std::max(dev, std::abs(r.max - 0.2));
    return {worst_rigid <= kRigidTol && dev <= kFixtureTol,
            "rigid-copy ate " + num(worst_rigid, 3) + " <= " + num(kRigidTol) + ", fixture deviation " + num(dev, 3) +
                " <= " + num(kFixtureTol)};
}

cli::RunConfig mapping_run(const Context& ctx, const std::string& sub, const std::string& out)
{
    cli::RunConfig c;
    c.subcommand = sub;
    c.checkpoint = ctx.mapping_ckpt.string();
    c.frames = kSceneFrames;
    c.mode = "digital";
    c.snr_db = 20.0;
    c.seed = 7;
    c.stride = 4;
    c.out = (ctx.work / out).string();
    return c;
}

void train_mapping_codec(Context& ctx)
{
    if (!ctx.mapping_ckpt.empty()) return;
    cli::RunConfig c;
    c.subcommand = "train";
    c.width = 64;
    c.height = 48;
    c.frames = kMappingTrainFrames;
    c.epochs = kMappingEpochs;
    c.lr = kMappingLr;
    c.snr_lo_db = 10.0;
    c.snr_hi_db = 20.0;
    c.seed = 1;
    c.out = (ctx.work / "mapping_codec").string();
    c.checkpoint = c.out + "/model.ckpt";
    cli::cmd_train(c);
    ctx.mapping_ckpt = c.checkpoint;
}

// Criterion 7.
Outcome transport_equivalence(Context& ctx)
{
    train_mapping_codec(ctx);
    ctx.simulate_report = cli::cmd_simulate(mapping_run(ctx, "simulate", "sim"));

    std::uint16_t port = 0;
    {
        transport::TcpListener probe("127.0.0.1", 0);
        port = probe.port();
    }
    const std::string target = "tcp:127.0.0.1:" + std::to_string(port);
    auto cloud_cfg = mapping_run(ctx, "cloud", "cloud");
    cloud_cfg.target = target;
    auto edge_cfg = mapping_run(ctx, "edge", "edge");
    edge_cfg.target = target;
    std::string cloud_error;
    nlohmann::json cloud_report;
    std::thread cloud([&] {
        try {
            cloud_report = cli::cmd_cloud(cloud_cfg);
        } catch (const std::exception& e) {
            cloud_error = e.what();
        }
    });
    const auto edge_report = cli::cmd_edge(edge_cfg);
    cloud.join();
    if (!cloud_error.empty()) return {false, "cloud failed: " + cloud_error};

    const auto same_file = [&](const std::string& name) {
        return read_file(ctx.work / "sim" / name) == read_file(ctx.work / "cloud" / name);
    };
    const bool recon = same_file("reconstructions.bin");
    const bool map = same_file("map.ply");
    const std::size_t frames = cli::read_reconstructions(ctx.work / "cloud" / "reconstructions.bin").size();
    const bool bytes = edge_report["edge"]["bytes_sent"] == cloud_report["cloud"]["bytes_received"];
    return {recon && map && bytes && frames == std::size_t(kSceneFrames),
            std::string("reconstructions ") + (recon ? "identical" : "DIFFER") + " (" + std::to_string(frames) +
                " frames), map.ply " + (map ? "identical" : "DIFFERS") + ", bytes sent == received: " +
                (bytes ? "yes" : "no")};
}

// Criterion 8.
Outcome mapping_accuracy(Context& ctx)
{
    if (ctx.simulate_report.is_null()) {
        train_mapping_codec(ctx);
        ctx.simulate_report = cli::cmd_simulate(mapping_run(ctx, "simulate", "sim"));
    }
    const auto& r = ctx.simulate_report;
    const double frac = r["oracle"]["fraction"];
    const double sum_err = r["map"]["probability_sum_error"];
    const std::size_t pairs = r["cloud"]["pairs"];
    return {frac >= kLabelAgreement && sum_err <= kProbSumTol && pairs == std::size_t(kSceneFrames),
            std::to_string(r["oracle"]["matching"].get<std::size_t>()) + "/" +
                std::to_string(r["oracle"]["voxels"].get<std::size_t>()) + " voxels = " + num(frac) +
                " >= " + num(kLabelAgreement) + ", max |sum p - 1| " + num(sum_err, 3) + ", psnr " +
                num(r["psnr_mean_db"].get<double>()) + " dB"};
}

// Criterion 9.
Outcome mapping_latency(Context& ctx)
{
    const auto dir = ctx.work / "latency";
    fs::create_directories(dir);
    // The codec needs multiples of 16; rgb is resampled to 160x128 and the
    // labels back onto the 160x120 depth grid.
    codec::CodecConfig cc;
    cc.width = 160;
    cc.height = 128;
    cc.mode = codec::TransmissionMode::digital;
    auto model = codec::CodecModel::create(cc, 9);
    model.seed_running_stats();
    model.save(dir / "model.ckpt");
    {
        std::ofstream scene(dir / "scene.json");
        scene << nlohmann::json{{"width", 160}, {"height", 120}}.dump() << '\n';
    }
    cli::RunConfig c;
    c.subcommand = "simulate";
    c.checkpoint = (dir / "model.ckpt").string();
    c.scene = (dir / "scene.json").string();
    c.frames = kSceneFrames;
    c.stride = 4;
    c.out = (dir / "out").string();
    const auto r = cli::cmd_simulate(c);
    const auto& t = r["cloud"]["timing"];
    const double p95 = t["map_update"]["p95_ms"];
    const double pair_p95 = t["pair_latency"]["p95_ms"];
    return {p95 < kLatencyLimitMs && t["map_update"]["count"] == kSceneFrames,
            "map update p95 " + num(p95) + " ms < " + num(kLatencyLimitMs) + " ms over " +
                std::to_string(t["map_update"]["count"].get<int>()) + " pairs at 160x120 stride 4 (receipt-to-map p95 " +
                num(pair_p95) + " ms)"};
}

// Criterion 10.
Outcome compression(Context&)
{
    codec::CodecConfig cc;
    cc.width = 640;
    cc.height = 480;
    cc.codebook_size = 512;
    cc.mode = codec::TransmissionMode::digital;
    auto model = codec::CodecModel::create(cc, 10);
    model.seed_running_stats();
    const auto scene = dataio::make_room_scene(640, 480);
    const auto frame = dataio::synth_generate(scene, 1, 0).frames[0].rgb;
    const auto payload = codec::encode(frame, 20.0, model).payload;
    const auto wire = transport::encode_frame(
        {transport::FrameType::semantic, 0, transport::encode_semantic(payload, cc.index_bits())});
    const std::size_t header_bits = 8 * (transport::kFrameHeaderSize + transport::kSemanticHeaderSize +
                                         transport::kDigitalBodyHeaderSize);
    const std::size_t want_bits = 1200 * 9 + header_bits;
    const auto acc = metrics::compression_ratio(cc, payload);
    const double hand_ratio = 640.0 * 480 * 3 * 8 / (1200.0 * 9);
    const bool ok = wire.size() * 8 == want_bits && payload.indices.size() == 1200 &&
                    std::abs(acc.ratio - hand_ratio) <= 1e-9 && std::abs(acc.ratio - 682.7) < 0.05;
    return {ok, "wire bits " + std::to_string(wire.size() * 8) + " == 1200*9 + " + std::to_string(header_bits) +
                    ", ratio " + num(acc.ratio, 7) + " (hand " + num(hand_ratio, 7) + ")"};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    std::string work = (fs::temp_directory_path() / "semcomm_acceptance").string();
    std::vector<int> only;
    app.add_option("--workdir", work, "Scratch directory for checkpoints and outputs");
    app.add_option("--only", only, "Run only these criteria");
    CLI11_PARSE(app, argc, argv);
    init_logging();

    Context ctx;
    ctx.work = work;
    fs::remove_all(ctx.work);
    fs::create_directories(ctx.work);

    const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
        {"gradient correctness", gradients},
        {"vq oracle", vq_oracle},
        {"channel statistics", channel_statistics},
        {"codec training sanity", training_sanity},
        {"snr trend attention vs no-attention", snr_trend},
        {"trajectory metrics oracle", trajectory_oracle},
        {"transport equivalence", transport_equivalence},
        {"end-to-end mapping accuracy", mapping_accuracy},
        {"mapping update latency", mapping_latency},
        {"compression accounting", compression},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = int(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second(ctx);
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first
                  << "): " << o.detail << " [" << num(secs, 3) << " s]" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
