#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "semcomm/mapping/camera.h"

namespace semcomm::mapping {

// Integer voxel coordinates packed into a 63-bit Morton code (21 bits per
// axis, biased by 2^20), so iteration in key order follows octree order.
using VoxelKey = std::uint64_t;

inline constexpr std::int64_t kVoxelBias = std::int64_t{1} << 20;

VoxelKey morton_encode(std::int64_t ix, std::int64_t iy, std::int64_t iz);
std::array<std::int64_t, 3> morton_decode(VoxelKey key);

struct MapConfig {
    double resolution = 0.05;
    std::size_t label_count = 2;
    double hit_prob = 0.9;

    // Throws ConfigError unless resolution > 0, L >= 2, 0.5 < p < 1.
    void validate() const;
};

struct Voxel {
    std::vector<double> prob;  // length L, sums to 1

    std::size_t best_label() const;
};

// Sparse semantic voxel map with per-voxel Bayesian label fusion. Single
// writer; const access may run between integrations.
class SemanticOctree {
public:
    explicit SemanticOctree(MapConfig config);

    const MapConfig& config() const { return config_; }
    std::size_t size() const { return voxels_.size(); }
    bool empty() const { return voxels_.empty(); }

    VoxelKey key_of(const Eigen::Vector3d& position) const;
    Eigen::Vector3d center(VoxelKey key) const;

    // Bayes step on the voxel containing the point: posterior(l) ~ prior(l)
    // * like(l), like(observed) = p, like(other) = (1 - p) / (L - 1). New
    // voxels start uniform. Returns true when the voxel was created.
    bool fuse(const LabeledPoint& point);

    const Voxel* find(VoxelKey key) const;
    const std::unordered_map<VoxelKey, Voxel>& voxels() const { return voxels_; }
    // Keys in ascending Morton order.
    std::vector<VoxelKey> sorted_keys() const;

private:
    MapConfig config_;
    std::unordered_map<VoxelKey, Voxel> voxels_;
};

struct IntegrationStats {
    std::size_t points = 0;
    std::size_t new_voxels = 0;
    double duration_ms = 0.0;
};

// Backprojects, moves into the world frame and fuses every point.
IntegrationStats integrate(SemanticOctree& map, const ImageFrame& depth, const LabelImage& labels,
                           const Pose& pose, const CameraIntrinsics& intr, int stride = 4);

}  // namespace semcomm::mapping
