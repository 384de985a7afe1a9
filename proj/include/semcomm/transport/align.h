#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "semcomm/core/image.h"

namespace semcomm::transport {

inline constexpr std::int64_t kDefaultAlignTolUs = 20'000;

struct AlignedPair {
    ImageFrame rgb;
    ImageFrame depth;
    std::int64_t skew_us = 0;  // depth - rgb
};

struct DroppedFrame {
    enum class Kind { rgb, depth } kind = Kind::rgb;
    std::int64_t timestamp_us = 0;
};

struct AlignResult {
    std::vector<AlignedPair> pairs;
    std::vector<DroppedFrame> dropped;
};

// Greedy nearest-timestamp matching: rgb frames are taken in time order, each
// against the unconsumed depth frame with the smallest |dt| (ties to the
// earlier depth). A match farther than tol drops the rgb frame and leaves the
// depth unconsumed. Depth frames never consumed are dropped at the end. Both
// inputs must be nondecreasing in time.
AlignResult align_frames(std::vector<ImageFrame> rgb, std::vector<ImageFrame> depth,
                         std::int64_t tol_us = kDefaultAlignTolUs);

// Incremental form of align_frames with identical output. An rgb frame is
// resolved as soon as a depth frame at or after its timestamp has arrived
// (later depth frames cannot be closer), or at finish().
class StreamingAligner {
public:
    using PairFn = std::function<void(AlignedPair&&)>;
    using DropFn = std::function<void(const DroppedFrame&)>;

    StreamingAligner(std::int64_t tol_us, PairFn on_pair, DropFn on_drop = {});

    void push_rgb(ImageFrame frame);
    void push_depth(ImageFrame frame);
    void finish();

    std::size_t pending() const { return rgb_.size() + depth_.size(); }

private:
    void resolve(bool final);
    void drop(DroppedFrame::Kind kind, std::int64_t ts);

    std::int64_t tol_us_;
    PairFn on_pair_;
    DropFn on_drop_;
    std::deque<ImageFrame> rgb_;
    std::deque<ImageFrame> depth_;  // unconsumed, in time order
    std::int64_t last_depth_us_ = 0;
    bool have_depth_ = false;
};

}  // namespace semcomm::transport
