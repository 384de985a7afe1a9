#include "semcomm/mapping/octree.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "semcomm/core/errors.h"

namespace semcomm::mapping {
namespace {

std::uint64_t spread_bits(std::uint64_t v)
{
    v &= 0x1fffff;
    v = (v | v << 32) & 0x1f00000000ffffULL;
    v = (v | v << 16) & 0x1f0000ff0000ffULL;
    v = (v | v << 8) & 0x100f00f00f00f00fULL;
    v = (v | v << 4) & 0x10c30c30c30c30c3ULL;
    v = (v | v << 2) & 0x1249249249249249ULL;
    return v;
}

std::uint64_t compact_bits(std::uint64_t v)
{
    v &= 0x1249249249249249ULL;
    v = (v ^ (v >> 2)) & 0x10c30c30c30c30c3ULL;
    v = (v ^ (v >> 4)) & 0x100f00f00f00f00fULL;
    v = (v ^ (v >> 8)) & 0x1f0000ff0000ffULL;
    v = (v ^ (v >> 16)) & 0x1f00000000ffffULL;
    v = (v ^ (v >> 32)) & 0x1fffff;
    return v;
}

}  // namespace

VoxelKey morton_encode(std::int64_t ix, std::int64_t iy, std::int64_t iz)
{
    for (auto c : {ix, iy, iz}) {
        if (c < -kVoxelBias || c >= kVoxelBias) throw ConfigError("voxel coordinate out of map range");
    }
    return spread_bits(static_cast<std::uint64_t>(ix + kVoxelBias)) |
           spread_bits(static_cast<std::uint64_t>(iy + kVoxelBias)) << 1 |
           spread_bits(static_cast<std::uint64_t>(iz + kVoxelBias)) << 2;
}

std::array<std::int64_t, 3> morton_decode(VoxelKey key)
{
    return {static_cast<std::int64_t>(compact_bits(key)) - kVoxelBias,
            static_cast<std::int64_t>(compact_bits(key >> 1)) - kVoxelBias,
            static_cast<std::int64_t>(compact_bits(key >> 2)) - kVoxelBias};
}

void MapConfig::validate() const
{
    if (!(resolution > 0.0)) throw ConfigError("map resolution must be positive");
    if (label_count < 2) throw ConfigError("map needs at least 2 labels");
    if (!(hit_prob > 0.5 && hit_prob < 1.0)) throw ConfigError("hit probability must lie in (0.5, 1)");
}

std::size_t Voxel::best_label() const
{
    return static_cast<std::size_t>(std::max_element(prob.begin(), prob.end()) - prob.begin());
}

SemanticOctree::SemanticOctree(MapConfig config) : config_(config)
{
    config_.validate();
}

VoxelKey SemanticOctree::key_of(const Eigen::Vector3d& position) const
{
    if (!position.allFinite()) throw NumericError("non-finite point position");
    const double r = config_.resolution;
    return morton_encode(static_cast<std::int64_t>(std::floor(position.x() / r)),
                         static_cast<std::int64_t>(std::floor(position.y() / r)),
                         static_cast<std::int64_t>(std::floor(position.z() / r)));
}

Eigen::Vector3d SemanticOctree::center(VoxelKey key) const
{
    const auto c = morton_decode(key);
    const double r = config_.resolution;
    return {(static_cast<double>(c[0]) + 0.5) * r, (static_cast<double>(c[1]) + 0.5) * r,
            (static_cast<double>(c[2]) + 0.5) * r};
}

bool SemanticOctree::fuse(const LabeledPoint& point)
{
    const std::size_t L = config_.label_count;
    if (point.label >= L) {
        throw ConfigError("label " + std::to_string(point.label) + " outside map label count " + std::to_string(L));
    }
    const VoxelKey key = key_of(point.position);
    auto [it, created] = voxels_.try_emplace(key);
    auto& prob = it->second.prob;
    if (created) prob.assign(L, 1.0 / static_cast<double>(L));

    const double hit = config_.hit_prob;
    const double miss = (1.0 - hit) / static_cast<double>(L - 1);
    double total = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        prob[l] *= (l == point.label) ? hit : miss;
        total += prob[l];
    }
    for (auto& v : prob) v /= total;
    return created;
}

const Voxel* SemanticOctree::find(VoxelKey key) const
{
    auto it = voxels_.find(key);
    return it == voxels_.end() ? nullptr : &it->second;
}

std::vector<VoxelKey> SemanticOctree::sorted_keys() const
{
    std::vector<VoxelKey> keys;
    keys.reserve(voxels_.size());
    for (const auto& [k, v] : voxels_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    return keys;
}

IntegrationStats integrate(SemanticOctree& map, const ImageFrame& depth, const LabelImage& labels,
                           const Pose& pose, const CameraIntrinsics& intr, int stride)
{
    const auto start = std::chrono::steady_clock::now();
    if (!pose.valid()) throw ConfigError("pose rotation is not a unit quaternion");
    auto points = backproject(depth, labels, intr, stride);
    transform_to_world(points, pose);
    IntegrationStats stats;
    stats.points = points.size();
    for (const auto& p : points) stats.new_voxels += map.fuse(p) ? 1 : 0;
    stats.duration_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return stats;
}

}  // namespace semcomm::mapping
