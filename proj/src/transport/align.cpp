#include "semcomm/transport/align.h"

#include <cstdlib>

#include <spdlog/spdlog.h>

#include "semcomm/core/errors.h"

namespace semcomm::transport {

AlignResult align_frames(std::vector<ImageFrame> rgb, std::vector<ImageFrame> depth, std::int64_t tol_us)
{
    AlignResult out;
    StreamingAligner aligner(
        tol_us, [&](AlignedPair&& p) { out.pairs.push_back(std::move(p)); },
        [&](const DroppedFrame& d) { out.dropped.push_back(d); });
    for (auto& d : depth) aligner.push_depth(std::move(d));
    for (auto& r : rgb) aligner.push_rgb(std::move(r));
    aligner.finish();
    return out;
}

StreamingAligner::StreamingAligner(std::int64_t tol_us, PairFn on_pair, DropFn on_drop)
    : tol_us_(tol_us), on_pair_(std::move(on_pair)), on_drop_(std::move(on_drop))
{
    if (tol_us < 0) throw ConfigError("alignment tolerance must be nonnegative");
}

void StreamingAligner::push_rgb(ImageFrame frame)
{
    if (!rgb_.empty() && frame.timestamp_us < rgb_.back().timestamp_us) {
        throw ProtocolError("rgb timestamps went backwards");
    }
    rgb_.push_back(std::move(frame));
    resolve(false);
}

void StreamingAligner::push_depth(ImageFrame frame)
{
    if (have_depth_ && frame.timestamp_us < last_depth_us_) throw ProtocolError("depth timestamps went backwards");
    have_depth_ = true;
    last_depth_us_ = frame.timestamp_us;
    depth_.push_back(std::move(frame));
    resolve(false);
}

void StreamingAligner::finish()
{
    resolve(true);
    while (!depth_.empty()) {
        drop(DroppedFrame::Kind::depth, depth_.front().timestamp_us);
        depth_.pop_front();
    }
}

void StreamingAligner::drop(DroppedFrame::Kind kind, std::int64_t ts)
{
    spdlog::debug("alignment dropped {} frame at {} us", kind == DroppedFrame::Kind::rgb ? "rgb" : "depth", ts);
    if (on_drop_) on_drop_({kind, ts});
}

void StreamingAligner::resolve(bool final)
{
    while (!rgb_.empty()) {
        const std::int64_t t = rgb_.front().timestamp_us;
        if (!final && !(have_depth_ && last_depth_us_ >= t)) return;

        // Depth frames too old for this rgb are too old for every later one.
        while (!depth_.empty() && depth_.front().timestamp_us < t - tol_us_) {
            drop(DroppedFrame::Kind::depth, depth_.front().timestamp_us);
            depth_.pop_front();
        }
        std::size_t best = depth_.size();
        std::int64_t best_dt = 0;
        for (std::size_t i = 0; i < depth_.size(); ++i) {
            const std::int64_t dt = std::llabs(depth_[i].timestamp_us - t);
            if (best == depth_.size() || dt < best_dt) {
                best = i;
                best_dt = dt;
            }
            if (depth_[i].timestamp_us >= t) break;
        }
        ImageFrame rgb = std::move(rgb_.front());
        rgb_.pop_front();
        if (best == depth_.size() || best_dt > tol_us_) {
            drop(DroppedFrame::Kind::rgb, t);
            continue;
        }
        AlignedPair pair;
        pair.skew_us = depth_[best].timestamp_us - t;
        pair.depth = std::move(depth_[best]);
        pair.rgb = std::move(rgb);
        depth_.erase(depth_.begin() + static_cast<std::ptrdiff_t>(best));
        on_pair_(std::move(pair));
    }
}

}  // namespace semcomm::transport
