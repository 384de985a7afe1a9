#include "semcomm/transport/session.h"

#include <chrono>
#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "semcomm/codec/codec.h"
#include "semcomm/core/errors.h"
#include "semcomm/core/rng.h"
#include "semcomm/transport/wire.h"

namespace semcomm::transport {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t wire_timestamp(std::int64_t ts)
{
    if (ts < 0) throw ConfigError("negative frame timestamp " + std::to_string(ts));
    return static_cast<std::uint64_t>(ts);
}

struct DecodedEvent {
    bool is_rgb = false;
    ImageFrame frame;
    Clock::time_point received;
    double decode_ms = 0.0;
};

struct PairEvent {
    AlignedPair pair;
    Clock::time_point received;
    double decode_ms = 0.0;
};

// First error wins; every queue is closed so all stages wind down.
class ErrorLatch {
public:
    template <typename... Queues>
    void set(const std::string& message, Queues&... queues)
    {
        {
            std::lock_guard lock(mutex_);
            if (message_.empty()) message_ = message;
        }
        (queues.close(), ...);
    }
    std::string get() const
    {
        std::lock_guard lock(mutex_);
        return message_;
    }

private:
    mutable std::mutex mutex_;
    std::string message_;
};

}  // namespace

FrameSource vector_source(std::vector<SourceFrame> frames)
{
    auto state = std::make_shared<std::pair<std::vector<SourceFrame>, std::size_t>>(std::move(frames), 0);
    return [state]() -> std::optional<SourceFrame> {
        if (state->second >= state->first.size()) return std::nullopt;
        return state->first[state->second++];
    };
}

EdgeStats edge_session(const FrameSource& source, const codec::CodecModel& model, const EdgeConfig& config,
                       ByteSink& sink)
{
    EdgeStats stats;
    const int bits = model.config.index_bits();
    auto send = [&](const WireFrame& f) {
        metrics::TimingScope scope(stats.timing, "send");
        write_frame(sink, f);
        stats.bytes_sent += f.wire_size();
        ++stats.frames_sent;
    };
    try {
        if (config.model_hash) {
            send({FrameType::codebook_sync, 0, {config.model_hash->begin(), config.model_hash->end()}});
        }
        std::uint64_t rgb_index = 0;
        while (auto item = source()) {
            WireFrame f;
            f.timestamp_us = wire_timestamp(item->frame.timestamp_us);
            if (item->kind == SourceFrame::Kind::rgb) {
                codec::SemanticPayload payload;
                {
                    metrics::TimingScope scope(stats.timing, "encode");
                    payload = codec::encode(item->frame, config.channel.snr_db, model).payload;
                }
                if (payload.mode == codec::TransmissionMode::analog) {
                    metrics::TimingScope scope(stats.timing, "channel");
                    codec::apply_channel(payload, {config.channel.snr_db, mix_seed(config.channel.seed, rgb_index)});
                }
                f.type = FrameType::semantic;
                f.payload = encode_semantic(payload, bits);
                stats.semantic_payload_bytes += f.payload.size();
                stats.raw_rgb_bytes += item->frame.pixel_count() * 3;
                ++rgb_index;
                send(f);
                ++stats.semantic_frames;
            } else {
                f.type = FrameType::depth;
                f.payload = encode_depth(item->frame, config.depth_scale);
                send(f);
                ++stats.depth_frames;
            }
        }
        send({FrameType::end_of_stream, 0, {}});
        sink.close();
        stats.completed = true;
    } catch (const Error& e) {
        stats.error = e.what();
        spdlog::error("edge session aborted: {}", e.what());
    }
    return stats;
}

LabelImage resize_labels(const LabelImage& labels, int height, int width)
{
    if (labels.height == height && labels.width == width) return labels;
    LabelImage out(height, width);
    for (int y = 0; y < height; ++y) {
        const int sy = std::min(labels.height - 1, static_cast<int>((y + 0.5) * labels.height / height));
        for (int x = 0; x < width; ++x) {
            const int sx = std::min(labels.width - 1, static_cast<int>((x + 0.5) * labels.width / width));
            out.at(y, x) = labels.at(sy, sx);
        }
    }
    return out;
}

CloudResult cloud_session(ByteSource& source, const codec::CodecModel& model, const CloudConfig& config)
{
    config.map.validate();
    config.intrinsics.validate();
    if (config.palette.size() != config.map.label_count) {
        throw ConfigError("palette has " + std::to_string(config.palette.size()) + " labels but the map expects " +
                          std::to_string(config.map.label_count));
    }
    CloudResult result(config.map);
    const mapping::PaletteSegmenter segmenter(config.palette);
    const ModelHash expected_hash = model.digest();

    BoundedQueue<DecodedEvent> decoded(config.queue_capacity);
    BoundedQueue<PairEvent> aligned(config.queue_capacity);
    ErrorLatch latch;

    // Stage 1: read and decode. Owns the receive-side counters until joined.
    std::size_t semantic_frames = 0, depth_frames = 0;
    std::uint64_t bytes_received = 0;
    bool sync_verified = false, end_of_stream = false;
    std::vector<ImageFrame> reconstructions;
    std::vector<std::vector<std::uint16_t>> indices;
    std::thread reader([&] {
        try {
            while (true) {
                auto frame = read_frame(source);
                if (!frame) throw ProtocolError("stream closed before end-of-stream");
                bytes_received += frame->wire_size();
                const auto received = Clock::now();
                if (frame->type == FrameType::end_of_stream) {
                    end_of_stream = true;
                    break;
                }
                if (frame->type == FrameType::codebook_sync) {
                    if (decode_sync(frame->payload) != expected_hash) {
                        throw ProtocolError("codebook hash mismatch: receiver model differs from the transmitter's");
                    }
                    sync_verified = true;
                    continue;
                }
                DecodedEvent ev;
                ev.received = received;
                const auto ts = static_cast<std::int64_t>(frame->timestamp_us);
                if (frame->type == FrameType::semantic) {
                    if (config.require_sync && !sync_verified) {
                        throw ProtocolError("semantic frame before codebook sync");
                    }
                    metrics::TimingScope scope(result.timing, "decode");
                    const auto payload = decode_semantic(frame->payload);
                    if (payload.grid_h != model.config.grid_h() || payload.grid_w != model.config.grid_w()) {
                        throw ProtocolError("semantic frame grid " + std::to_string(payload.grid_w) + "x" +
                                            std::to_string(payload.grid_h) + " does not match the codec");
                    }
                    if (payload.mode != model.config.mode) throw ProtocolError("semantic frame mode differs from codec");
                    ev.is_rgb = true;
                    ev.frame = codec::reconstruct(payload, model, ts);
                    ev.decode_ms = scope.elapsed_ms();
                    if (config.keep_reconstructions) {
                        reconstructions.push_back(ev.frame);
                        indices.push_back(payload.indices);
                    }
                    ++semantic_frames;
                } else {
                    auto d = decode_depth(frame->payload);
                    if (d.depth_scale > 0.0f && std::abs(d.depth_scale - config.intrinsics.depth_scale) > 1e-3) {
                        const double k = config.intrinsics.depth_scale / d.depth_scale;
                        for (auto& v : d.depth.data) v *= k;
                    }
                    ev.frame = std::move(d.depth);
                    ev.frame.timestamp_us = ts;
                    ++depth_frames;
                }
                if (!decoded.push(std::move(ev))) break;
            }
        } catch (const Error& e) {
            latch.set(e.what());
        }
        decoded.close();
    });

    // Stage 2: timestamp alignment.
    std::size_t dropped_rgb = 0, dropped_depth = 0;
    std::thread aligner_thread([&] {
        std::deque<std::pair<Clock::time_point, double>> rgb_meta;
        bool open = true;
        StreamingAligner aligner(
            config.align_tol_us,
            [&](AlignedPair&& p) {
                PairEvent ev{std::move(p), rgb_meta.front().first, rgb_meta.front().second};
                rgb_meta.pop_front();
                if (open && !aligned.push(std::move(ev))) open = false;
            },
            [&](const DroppedFrame& d) {
                if (d.kind == DroppedFrame::Kind::rgb) {
                    rgb_meta.pop_front();
                    ++dropped_rgb;
                } else {
                    ++dropped_depth;
                }
            });
        try {
            while (open) {
                auto ev = decoded.pop();
                if (!ev) break;
                metrics::TimingScope scope(result.timing, "align");
                if (ev->is_rgb) {
                    rgb_meta.emplace_back(ev->received, ev->decode_ms);
                    aligner.push_rgb(std::move(ev->frame));
                } else {
                    aligner.push_depth(std::move(ev->frame));
                }
            }
            if (open) aligner.finish();
        } catch (const Error& e) {
            latch.set(e.what(), decoded);
        }
        if (!open) decoded.close();
        aligned.close();
    });

    // Stage 3: segmentation and map integration, the map's single writer.
    try {
        while (auto ev = aligned.pop()) {
            ++result.pairs;
            const auto& rgb = ev->pair.rgb;
            const auto& depth = ev->pair.depth;
            const auto pose = config.poses.nearest(us_to_seconds(rgb.timestamp_us), config.pose_tol_s);
            if (!pose) {
                ++result.skipped_no_pose;
                spdlog::warn("no pose within {} s of frame at {} us; pair skipped", config.pose_tol_s,
                             rgb.timestamp_us);
                continue;
            }
            const auto start = Clock::now();
            LabelImage labels;
            {
                metrics::TimingScope scope(result.timing, "segment");
                labels = resize_labels(segmenter.segment(rgb), depth.height, depth.width);
            }
            const auto stats = mapping::integrate(result.map, depth, labels, *pose, config.intrinsics, config.stride);
            const double update_ms = ms_since(start);
            result.timing.record("map_update", update_ms);
            FrameRecord rec;
            rec.timestamp_us = rgb.timestamp_us;
            rec.decode_ms = ev->decode_ms;
            rec.map_update_ms = update_ms;
            rec.latency_ms = ms_since(ev->received);
            rec.points = stats.points;
            result.timing.record("pair_latency", rec.latency_ms);
            result.frames.push_back(rec);
        }
    } catch (const Error& e) {
        latch.set(e.what(), aligned, decoded);
    }
    aligned.close();
    decoded.close();
    aligner_thread.join();
    reader.join();

    result.semantic_frames = semantic_frames;
    result.depth_frames = depth_frames;
    result.bytes_received = bytes_received;
    result.sync_verified = sync_verified;
    result.end_of_stream = end_of_stream;
    result.reconstructions = std::move(reconstructions);
    result.received_indices = std::move(indices);
    result.dropped_rgb = dropped_rgb;
    result.dropped_depth = dropped_depth;
    result.queue_high_water = std::max(decoded.high_water(), aligned.high_water());
    result.error = latch.get();
    if (!result.error.empty()) spdlog::error("cloud session ended early: {}", result.error);
    return result;
}

}  // namespace semcomm::transport
