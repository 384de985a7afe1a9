#include "semcomm/cli/commands.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "semcomm/codec/codec.h"
#include "semcomm/codec/trainer.h"
#include "semcomm/core/errors.h"
#include "semcomm/core/files.h"
#include "semcomm/core/rng.h"
#include "semcomm/dataio/image_io.h"
#include "semcomm/dataio/tum.h"
#include "semcomm/mapping/export.h"
#include "semcomm/metrics/image_metrics.h"
#include "semcomm/metrics/trajectory.h"
#include "semcomm/transport/wire.h"

namespace semcomm::cli {
namespace {

using Clock = std::chrono::steady_clock;

std::filesystem::path out_dir(const RunConfig& config)
{
    std::filesystem::path dir(config.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value)
{
    const auto bits = static_cast<std::uint64_t>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t& pos)
{
    if (pos + sizeof(T) > bytes.size()) throw IoError("reconstruction dump is truncated");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{bytes[pos + i]} << (8 * i);
    pos += sizeof(T);
    return static_cast<T>(v);
}

mapping::MapConfig map_config(const RunConfig& config, const InputFrames& input)
{
    mapping::MapConfig m;
    m.resolution = config.resolution;
    m.label_count = input.palette.size();
    m.hit_prob = config.hit_prob;
    return m;
}

transport::CloudConfig cloud_config(const RunConfig& config, const InputFrames& input)
{
    transport::CloudConfig c;
    c.map = map_config(config, input);
    c.intrinsics = input.intrinsics;
    c.palette = input.palette;
    c.stride = config.stride;
    c.align_tol_us = config.align_tol_us;
    c.poses = input.poses;
    c.pose_tol_s = config.pose_tol_s;
    c.require_sync = config.sync;
    c.keep_reconstructions = true;
    return c;
}

transport::EdgeConfig edge_config(const RunConfig& config, const InputFrames& input,
                                  const codec::CodecModel& model)
{
    transport::EdgeConfig e;
    e.channel.snr_db = config.snr_db;
    e.channel.seed = config.seed;
    e.depth_scale = input.intrinsics.depth_scale;
    if (config.sync) e.model_hash = model.digest();
    return e;
}

nlohmann::json edge_json(const transport::EdgeStats& s)
{
    return {{"frames_sent", s.frames_sent},
            {"semantic_frames", s.semantic_frames},
            {"depth_frames", s.depth_frames},
            {"bytes_sent", s.bytes_sent},
            {"semantic_payload_bytes", s.semantic_payload_bytes},
            {"raw_rgb_bytes", s.raw_rgb_bytes},
            {"completed", s.completed},
            {"error", s.error},
            {"timing", metrics::to_json(s.timing.report())}};
}

nlohmann::json compression_json(const codec::CodecModel& model, const InputFrames& input, double snr_db)
{
    if (input.rgb.empty()) return nullptr;
    const auto payload = codec::encode(input.rgb.front(), snr_db, model).payload;
    const auto acc = metrics::compression_ratio(model.config, payload);
    const auto wire_bits =
        8 * (transport::kFrameHeaderSize + transport::encode_semantic(payload, model.config.index_bits()).size());
    return {{"raw_bits_per_frame", acc.raw_bits},
            {"payload_bits_per_frame", acc.payload_bits},
            {"wire_bits_per_frame", wire_bits},
            {"ratio", acc.ratio},
            {"wire_ratio", static_cast<double>(acc.raw_bits) / static_cast<double>(wire_bits)}};
}

// Map, reconstructions and the cloud half of the report.
nlohmann::json cloud_outputs(const RunConfig& config, const InputFrames& input, const transport::CloudResult& r,
                             const std::filesystem::path& dir)
{
    const auto map_path = dir / "map.ply";
    mapping::export_map(r.map, input.palette, map_path);
    write_reconstructions(dir / "reconstructions.bin", r.reconstructions);

    std::map<std::int64_t, const ImageFrame*> originals;
    for (const auto& f : input.rgb) originals[f.timestamp_us] = &f;
    std::map<std::int64_t, double> psnr_by_ts;
    double psnr_sum = 0.0;
    std::size_t psnr_count = 0;
    for (const auto& rec : r.reconstructions) {
        const auto it = originals.find(rec.timestamp_us);
        if (it == originals.end() || !it->second->same_shape(rec)) continue;
        const double p = metrics::psnr(*it->second, rec);
        psnr_by_ts[rec.timestamp_us] = p;
        psnr_sum += p;
        ++psnr_count;
    }

    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : r.frames) {
        nlohmann::json j{{"timestamp_us", f.timestamp_us},
                         {"decode_ms", f.decode_ms},
                         {"map_update_ms", f.map_update_ms},
                         {"latency_ms", f.latency_ms},
                         {"points", f.points}};
        const auto it = psnr_by_ts.find(f.timestamp_us);
        j["psnr_db"] = it == psnr_by_ts.end() ? nlohmann::json(nullptr) : nlohmann::json(it->second);
        frames.push_back(std::move(j));
    }

    nlohmann::json j{{"map",
                      {{"path", map_path.string()},
                       {"voxels", r.map.size()},
                       {"resolution", config.resolution},
                       {"probability_sum_error", probability_sum_error(r.map)}}},
                     {"frames", frames},
                     {"psnr_mean_db", psnr_count ? nlohmann::json(psnr_sum / double(psnr_count)) : nullptr},
                     {"cloud",
                      {{"semantic_frames", r.semantic_frames},
                       {"depth_frames", r.depth_frames},
                       {"pairs", r.pairs},
                       {"dropped_rgb", r.dropped_rgb},
                       {"dropped_depth", r.dropped_depth},
                       {"skipped_no_pose", r.skipped_no_pose},
                       {"bytes_received", r.bytes_received},
                       {"sync_verified", r.sync_verified},
                       {"end_of_stream", r.end_of_stream},
                       {"queue_high_water", r.queue_high_water},
                       {"error", r.error},
                       {"timing", metrics::to_json(r.timing.report())}}}};
    if (input.sequence && input.scene) {
        const auto oracle = dataio::oracle_map(*input.sequence, *input.scene, r.map.config(), config.stride);
        const auto agree = oracle_agreement(r.map, oracle);
        j["oracle"] = {{"voxels", agree.voxels}, {"matching", agree.matching}, {"fraction", agree.fraction}};
    }
    return j;
}

std::vector<ImageFrame> training_images(const RunConfig& config, int height, int width)
{
    return load_input(config, height, width).rgb;
}

transport::Endpoint endpoint_of(const RunConfig& config)
{
    return transport::parse_endpoint(config.target);
}

}  // namespace

std::vector<transport::SourceFrame> InputFrames::source_frames() const
{
    std::vector<transport::SourceFrame> out;
    for (const auto& f : rgb) out.push_back({transport::SourceFrame::Kind::rgb, f});
    for (const auto& f : depth) out.push_back({transport::SourceFrame::Kind::depth, f});
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.frame.timestamp_us < b.frame.timestamp_us;
    });
    return out;
}

InputFrames load_input(const RunConfig& config, int codec_height, int codec_width)
{
    InputFrames in;
    if (!config.dataset.empty()) {
        const auto seq = dataio::tum_load(config.dataset);
        if (seq.rgb.empty()) throw ConfigError("dataset has no rgb frames: " + config.dataset);
        const std::size_t n = std::min<std::size_t>(config.frames, seq.rgb.size());
        for (std::size_t i = 0; i < n; ++i) {
            in.rgb.push_back(dataio::resize_image(seq.load(seq.rgb[i]), codec_height, codec_width));
        }
        const std::int64_t last = in.rgb.back().timestamp_us + config.align_tol_us;
        for (const auto& e : seq.depth) {
            if (seconds_to_us(e.timestamp) > last) break;
            in.depth.push_back(seq.load(e));
        }
        in.poses = seq.groundtruth;
        in.palette = mapping::LabelPalette::make_default(8);
        if (!in.depth.empty()) {
            in.intrinsics = in.intrinsics.scaled(in.depth.front().width / 640.0, in.depth.front().height / 480.0);
        }
    } else {
        dataio::SyntheticScene scene = dataio::make_room_scene(codec_width, codec_height);
        if (!config.scene.empty()) {
            std::ifstream f(config.scene);
            if (!f) throw ConfigError("scene file not found: " + config.scene);
            nlohmann::json j;
            try {
                f >> j;
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("scene file " + config.scene + ": " + e.what());
            }
            if (!j.contains("width")) j["width"] = codec_width;
            if (!j.contains("height")) j["height"] = codec_height;
            scene = dataio::scene_from_json(j);
        }
        auto seq = dataio::synth_generate(scene, config.frames, config.seed);
        for (const auto& f : seq.frames) {
            in.rgb.push_back(dataio::resize_image(f.rgb, codec_height, codec_width));
            in.depth.push_back(f.depth);
        }
        in.poses = seq.groundtruth;
        in.intrinsics = scene.intrinsics;
        in.palette = scene.palette;
        in.scene = std::move(scene);
        in.sequence = std::move(seq);
    }
    if (!config.poses.empty()) in.poses = metrics::read_tum_trajectory(config.poses, false);
    return in;
}

codec::CodecModel load_model(const RunConfig& config, const std::string& path)
{
    if (!std::filesystem::exists(path)) throw ConfigError("checkpoint not found: " + path);
    auto model = codec::CodecModel::load(path);
    if (!config.mode.empty()) model.config.mode = codec::parse_mode(config.mode);
    return model;
}

void write_reconstructions(const std::filesystem::path& path, const std::vector<ImageFrame>& frames)
{
    std::vector<std::uint8_t> out;
    for (const auto& f : frames) {
        put_le(out, static_cast<std::uint64_t>(f.timestamp_us));
        put_le(out, static_cast<std::uint32_t>(f.height));
        put_le(out, static_cast<std::uint32_t>(f.width));
        put_le(out, static_cast<std::uint32_t>(f.channels));
        for (double v : f.data) put_le(out, std::bit_cast<std::uint64_t>(v));
    }
    write_file(path, out);
}

std::vector<ImageFrame> read_reconstructions(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    std::vector<ImageFrame> out;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        const auto ts = static_cast<std::int64_t>(get_le<std::uint64_t>(bytes, pos));
        const auto h = get_le<std::uint32_t>(bytes, pos);
        const auto w = get_le<std::uint32_t>(bytes, pos);
        const auto c = get_le<std::uint32_t>(bytes, pos);
        ImageFrame f(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c), ts);
        for (auto& v : f.data) v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
        out.push_back(std::move(f));
    }
    return out;
}

OracleAgreement oracle_agreement(const mapping::SemanticOctree& map,
                                 const std::map<mapping::VoxelKey, std::uint16_t>& oracle)
{
    OracleAgreement a;
    for (const auto& [key, voxel] : map.voxels()) {
        ++a.voxels;
        const auto it = oracle.find(key);
        if (it != oracle.end() && it->second == voxel.best_label()) ++a.matching;
    }
    a.fraction = a.voxels ? static_cast<double>(a.matching) / static_cast<double>(a.voxels) : 0.0;
    return a;
}

double probability_sum_error(const mapping::SemanticOctree& map)
{
    double worst = 0.0;
    for (const auto& [key, voxel] : map.voxels()) {
        double sum = 0.0;
        for (double p : voxel.prob) sum += p;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

nlohmann::json cmd_train(const RunConfig& config)
{
    validate(config);
    codec::CodecConfig cc;
    cc.height = config.height;
    cc.width = config.width;
    cc.channel_plan = config.channel_plan;
    cc.codebook_size = config.codebook_size;
    cc.channel_dim = config.channel_dim;
    cc.mode = codec::parse_mode(config.mode.empty() ? "analog" : config.mode);
    cc.attention = config.attention;
    cc.validate();

    const auto dir = out_dir(config);
    const auto images = training_images(config, cc.height, cc.width);
    codec::TrainConfig tc;
    tc.epochs = config.epochs;
    tc.batch_size = config.batch_size;
    tc.snr_lo_db = config.snr_lo_db;
    tc.snr_hi_db = config.snr_hi_db;
    tc.seed = config.seed;
    tc.adam.lr = config.lr;

    const auto start = Clock::now();
    auto result = codec::train(images, cc, tc, [](const codec::EpochLog& e) {
        spdlog::info("epoch {}: loss {:.5f} mse {:.5f} psnr {:.2f} dB", e.epoch, e.loss, e.recon_mse, e.psnr);
    });
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();

    const std::filesystem::path ckpt = config.checkpoint.empty() ? dir / "model.ckpt" : std::filesystem::path(config.checkpoint);
    result.model.save(ckpt);
    {
        std::ofstream csv(dir / "train.csv");
        if (!csv) throw IoError("cannot write " + (dir / "train.csv").string());
        codec::write_training_csv(csv, result.log);
    }
    const auto& last = result.log.back();
    nlohmann::json report{{"checkpoint", ckpt.string()},
                          {"model_digest", result.model.digest_hex()},
                          {"codec", codec::to_json(cc)},
                          {"images", images.size()},
                          {"epochs", config.epochs},
                          {"steps", result.steps},
                          {"final",
                           {{"loss", last.loss},
                            {"recon_mse", last.recon_mse},
                            {"codebook_loss", last.codebook_loss},
                            {"commit_loss", last.commit_loss},
                            {"psnr_db", last.psnr}}},
                          {"seconds", seconds}};
    write_json(dir / "train.json", report);
    return report;
}

nlohmann::json cmd_simulate(const RunConfig& config)
{
    validate(config);
    const auto model = load_model(config, config.checkpoint);
    const auto input = load_input(config, model.config.height, model.config.width);
    const auto dir = out_dir(config);

    transport::MemoryPipe pipe;
    transport::EdgeStats edge;
    const auto edge_cfg = edge_config(config, input, model);
    std::thread tx([&] {
        edge = transport::edge_session(transport::vector_source(input.source_frames()), model, edge_cfg, pipe.sink());
    });
    auto result = transport::cloud_session(pipe.source(), model, cloud_config(config, input));
    pipe.close_read();
    tx.join();

    auto report = cloud_outputs(config, input, result, dir);
    report["model_digest"] = model.digest_hex();
    report["mode"] = codec::to_string(model.config.mode);
    report["snr_db"] = config.snr_db;
    report["seed"] = config.seed;
    report["edge"] = edge_json(edge);
    report["compression"] = compression_json(model, input, config.snr_db);
    write_json(dir / "metrics.json", report);
    if (!result.error.empty()) throw Error("simulation failed: " + result.error);
    if (!edge.error.empty()) throw Error("simulation failed: " + edge.error);
    return report;
}

nlohmann::json cmd_ablate_snr(const RunConfig& config)
{
    validate(config);
    const auto dir = out_dir(config);
    struct Variant {
        std::string name;
        std::vector<codec::CodecModel> models;
    };
    std::vector<Variant> variants{{"attention", {}}, {"no_attention", {}}};
    for (const auto& p : config.attention_checkpoints) variants[0].models.push_back(load_model(config, p));
    for (const auto& p : config.baseline_checkpoints) variants[1].models.push_back(load_model(config, p));
    const auto& ref = variants[0].models.front().config;
    for (auto& v : variants) {
        for (auto& m : v.models) {
            if (m.config.height != ref.height || m.config.width != ref.width) {
                throw ConfigError("ablation checkpoints must share one image size");
            }
            m.config.mode = codec::TransmissionMode::analog;
        }
    }
    // Odd samples of a path twice as dense fall between the training views.
    RunConfig eval = config;
    eval.seed = mix_seed(config.seed, 0xE7A1);
    eval.frames = 2 * config.frames;
    const auto dense = load_input(eval, ref.height, ref.width).rgb;
    std::vector<ImageFrame> images;
    for (std::size_t i = 1; i < dense.size(); i += 2) images.push_back(dense[i]);

    nlohmann::json rows = nlohmann::json::array();
    std::ofstream csv(dir / "ablation.csv");
    if (!csv) throw IoError("cannot write " + (dir / "ablation.csv").string());
    csv << "variant,snr_db,psnr_mean,psnr_std,psnr_median,models,samples\n";
    csv.precision(10);
    for (const auto& v : variants) {
        for (double snr : config.snr_grid) {
            std::vector<double> all, per_model;
            for (const auto& model : v.models) {
                double model_sum = 0.0;
                std::size_t model_n = 0;
                for (int s = 0; s < config.eval_seeds; ++s) {
                    for (std::size_t i = 0; i < images.size(); ++i) {
                        auto payload = codec::encode(images[i], snr, model).payload;
                        codec::apply_channel(payload, {snr, mix_seed(mix_seed(config.seed, std::uint64_t(s)), i)});
                        const double p = metrics::psnr(images[i], codec::reconstruct(payload, model));
                        all.push_back(p);
                        model_sum += p;
                        ++model_n;
                    }
                }
                per_model.push_back(model_sum / double(model_n));
            }
            double mean = 0.0;
            for (double p : all) mean += p;
            mean /= double(all.size());
            double var = 0.0;
            for (double p : all) var += (p - mean) * (p - mean);
            const double stddev = all.size() > 1 ? std::sqrt(var / double(all.size() - 1)) : 0.0;
            std::sort(per_model.begin(), per_model.end());
            const std::size_t m = per_model.size();
            const double median = m % 2 ? per_model[m / 2] : 0.5 * (per_model[m / 2 - 1] + per_model[m / 2]);
            csv << v.name << ',' << snr << ',' << mean << ',' << stddev << ',' << median << ',' << m << ','
                << all.size() << '\n';
            rows.push_back({{"variant", v.name},
                            {"snr_db", snr},
                            {"psnr_mean", mean},
                            {"psnr_std", stddev},
                            {"psnr_median", median},
                            {"models", m},
                            {"samples", all.size()}});
        }
    }
    if (!csv) throw IoError("failed writing " + (dir / "ablation.csv").string());
    return {{"csv", (dir / "ablation.csv").string()}, {"rows", rows}};
}

nlohmann::json cmd_eval_traj(const RunConfig& config)
{
    validate(config);
    const auto est = metrics::read_tum_trajectory(config.est);
    const auto ref = metrics::read_tum_trajectory(config.ref);
    return {{"ate", metrics::to_json(metrics::ate(est, ref, config.traj_tol_s))},
            {"rpe", metrics::to_json(metrics::rpe(est, ref, config.delta, config.traj_tol_s))}};
}

nlohmann::json cmd_edge(const RunConfig& config)
{
    validate(config);
    const auto endpoint = endpoint_of(config);
    const auto model = load_model(config, config.checkpoint);
    const auto input = load_input(config, model.config.height, model.config.width);
    const auto dir = out_dir(config);

    std::unique_ptr<transport::FdStream> sink;
    if (endpoint.kind == transport::Endpoint::Kind::tcp) {
        sink = transport::tcp_connect(endpoint.host, endpoint.port,
                                      {config.retries, std::chrono::milliseconds(config.retry_delay_ms)});
    } else {
        sink = transport::open_file_sink(endpoint.path);
    }
    const auto stats = transport::edge_session(transport::vector_source(input.source_frames()), model,
                                               edge_config(config, input, model), *sink);
    sink.reset();
    nlohmann::json report{{"model_digest", model.digest_hex()},
                          {"mode", codec::to_string(model.config.mode)},
                          {"snr_db", config.snr_db},
                          {"seed", config.seed},
                          {"target", config.target},
                          {"edge", edge_json(stats)},
                          {"compression", compression_json(model, input, config.snr_db)}};
    write_json(dir / "edge_stats.json", report);
    if (!stats.error.empty()) throw IoError("edge session failed: " + stats.error);
    return report;
}

nlohmann::json cmd_cloud(const RunConfig& config)
{
    validate(config);
    const auto endpoint = endpoint_of(config);
    const auto model = load_model(config, config.checkpoint);
    const auto input = load_input(config, model.config.height, model.config.width);
    const auto dir = out_dir(config);

    std::unique_ptr<transport::FdStream> source;
    if (endpoint.kind == transport::Endpoint::Kind::tcp) {
        transport::TcpListener listener(endpoint.host, endpoint.port);
        spdlog::info("cloud listening on {}:{}", endpoint.host, listener.port());
        const std::chrono::milliseconds timeout(config.timeout_ms);
        source = listener.accept(timeout, timeout);
    } else {
        source = transport::open_file_source(endpoint.path);
    }
    const auto result = transport::cloud_session(*source, model, cloud_config(config, input));
    source.reset();

    auto report = cloud_outputs(config, input, result, dir);
    report["model_digest"] = model.digest_hex();
    report["mode"] = codec::to_string(model.config.mode);
    report["target"] = config.target;
    write_json(dir / "cloud_stats.json", report);
    if (!result.error.empty()) throw Error("cloud session failed: " + result.error);
    return report;
}

}  // namespace semcomm::cli
