#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "semcomm/channel/awgn.h"
#include "semcomm/codec/model.h"
#include "semcomm/mapping/octree.h"
#include "semcomm/mapping/segmenter.h"
#include "semcomm/metrics/timing.h"
#include "semcomm/transport/align.h"
#include "semcomm/transport/payload.h"
#include "semcomm/transport/stream.h"

namespace semcomm::transport {

// Fixed-capacity FIFO connecting pipeline stages. push blocks while full;
// pop blocks while empty and returns nullopt once closed and drained.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

    // False when the queue was closed before the item could be added.
    bool push(T item)
    {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
        if (closed_) return false;
        items_.push_back(std::move(item));
        high_water_ = std::max(high_water_, items_.size());
        not_empty_.notify_one();
        return true;
    }

    std::optional<T> pop()
    {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
        if (items_.empty()) return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return item;
    }

    void close()
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
        not_empty_.notify_all();
        not_full_.notify_all();
    }

    std::size_t high_water() const
    {
        std::lock_guard lock(mutex_);
        return high_water_;
    }

private:
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::condition_variable not_empty_;
    std::condition_variable not_full_;
    std::deque<T> items_;
    std::size_t high_water_ = 0;
    bool closed_ = false;
};

// One captured frame on the edge device.
struct SourceFrame {
    enum class Kind { rgb, depth } kind = Kind::rgb;
    ImageFrame frame;  // timestamp_us is the capture time
};

// Yields frames in capture order; nullopt ends the stream.
using FrameSource = std::function<std::optional<SourceFrame>()>;
FrameSource vector_source(std::vector<SourceFrame> frames);

struct EdgeConfig {
    // snr_db is presented to the codec and, in analog mode, drives the AWGN
    // draw; seed is mixed with the rgb frame index per frame.
    channel::AwgnConfig channel;
    double depth_scale = 5000.0;
    // Leads the stream with a codebook-sync frame carrying this digest.
    std::optional<ModelHash> model_hash;
};

struct EdgeStats {
    std::size_t frames_sent = 0;
    std::size_t semantic_frames = 0;
    std::size_t depth_frames = 0;
    std::uint64_t bytes_sent = 0;
    std::uint64_t semantic_payload_bytes = 0;
    std::uint64_t raw_rgb_bytes = 0;
    metrics::TimingRecorder timing;  // encode, channel, send
    bool completed = false;
    std::string error;
};

// Encodes every rgb frame (plus AWGN in analog mode) into a semantic frame,
// forwards depth frames raw, and ends with an end-of-stream frame. A sink
// failure stops the session and is reported in the stats.
EdgeStats edge_session(const FrameSource& source, const codec::CodecModel& model, const EdgeConfig& config,
                       ByteSink& sink);

struct CloudConfig {
    mapping::MapConfig map;
    mapping::CameraIntrinsics intrinsics;
    mapping::LabelPalette palette = mapping::LabelPalette::make_default(2);
    int stride = 4;
    std::int64_t align_tol_us = kDefaultAlignTolUs;
    Trajectory poses;
    double pose_tol_s = 0.02;
    std::size_t queue_capacity = 8;
    // Refuse semantic frames until a matching codebook-sync frame arrived.
    bool require_sync = false;
    bool keep_reconstructions = false;
};

struct FrameRecord {
    std::int64_t timestamp_us = 0;
    double decode_ms = 0.0;
    double map_update_ms = 0.0;
    // From receipt of the semantic frame to the end of its map update.
    double latency_ms = 0.0;
    std::size_t points = 0;
};

struct CloudResult {
    mapping::SemanticOctree map;
    std::vector<ImageFrame> reconstructions;
    std::vector<std::vector<std::uint16_t>> received_indices;
    std::vector<FrameRecord> frames;
    metrics::TimingRecorder timing;  // decode, align, segment, map_update
    std::size_t semantic_frames = 0;
    std::size_t depth_frames = 0;
    std::size_t pairs = 0;
    std::size_t dropped_rgb = 0;
    std::size_t dropped_depth = 0;
    std::size_t skipped_no_pose = 0;
    std::uint64_t bytes_received = 0;
    bool sync_verified = false;
    bool end_of_stream = false;
    std::size_t queue_high_water = 0;
    std::string error;

    explicit CloudResult(const mapping::MapConfig& config) : map(config) {}
};

// Three concurrent stages over bounded queues: (1) read and decode frames,
// (2) align rgb with depth, (3) segment and integrate into the map. Protocol
// and I/O errors end the session; whatever was mapped so far is returned
// with the error message set.
CloudResult cloud_session(ByteSource& source, const codec::CodecModel& model, const CloudConfig& config);

// Nearest-neighbour resampling of a label image to another size.
LabelImage resize_labels(const LabelImage& labels, int height, int width);

}  // namespace semcomm::transport
