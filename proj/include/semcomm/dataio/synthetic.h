#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <json.hpp>

#include "semcomm/core/image.h"
#include "semcomm/core/pose.h"
#include "semcomm/mapping/camera.h"
#include "semcomm/mapping/octree.h"
#include "semcomm/mapping/segmenter.h"

namespace semcomm::dataio {

// Infinite plane n . x = offset.
struct Plane {
    Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
    double offset = 0.0;
    std::uint16_t label = 0;
};

// Axis-aligned solid box.
struct Box {
    Eigen::Vector3d min = Eigen::Vector3d::Zero();
    Eigen::Vector3d max = Eigen::Vector3d::Zero();
    std::uint16_t label = 0;
};

// Straight camera sweep from `start` to `end`, always looking at `target`,
// world z up. Frames are spaced 1/fps apart.
struct CameraPath {
    Eigen::Vector3d start{0.0, 0.0, 1.2};
    Eigen::Vector3d end{0.0, 0.0, 1.2};
    Eigen::Vector3d target{2.0, 0.0, 1.0};
    double fps = 30.0;
};

struct SyntheticScene {
    std::vector<Plane> planes;
    std::vector<Box> boxes;
    // Camera must stay strictly inside these bounds.
    Eigen::Vector3d bounds_min{-3.0, -3.0, 0.0};
    Eigen::Vector3d bounds_max{3.0, 3.0, 2.5};
    CameraPath path;
    int width = 64;
    int height = 48;
    mapping::CameraIntrinsics intrinsics;
    mapping::LabelPalette palette;
    // Gaussian noise sigma added to RGB values (then clamped to [0, 1]).
    double rgb_noise = 0.0;
    // Round depth to integer sensor units, as a 16-bit sensor would.
    bool quantize_depth = true;
    std::int64_t start_us = 1'000'000;
    // Depth capture lags RGB capture by this much.
    std::int64_t depth_offset_us = 2'000;

    std::size_t label_count() const { return palette.size(); }
};

// A 6 x 6 x 2.5 m room (floor 0, ceiling 1, walls 2 and 3 alternating) with
// a cabinet box (label 4). Intrinsics follow the TUM camera scaled to the
// requested size.
SyntheticScene make_room_scene(int width = 64, int height = 48);

nlohmann::json to_json(const SyntheticScene& scene);
SyntheticScene scene_from_json(const nlohmann::json& j);

struct SyntheticFrame {
    ImageFrame rgb;
    ImageFrame depth;
    LabelImage labels;
    Pose pose;
};

struct SyntheticSequence {
    std::vector<SyntheticFrame> frames;
    Trajectory groundtruth;
};

// Camera-to-world pose looking from eye toward target.
Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double timestamp);

// Depth (sensor units) and label of the nearest surface along each pixel's
// ray. Pixels that hit nothing get depth 0.
void render_view(const SyntheticScene& scene, const Pose& pose, ImageFrame& depth, LabelImage& labels);

// Renders n_frames along the camera path. Throws ConfigError for
// n_frames < 1, a camera outside the bounds, or an eye on its target.
SyntheticSequence synth_generate(const SyntheticScene& scene, int n_frames, std::uint64_t seed);

// Voxel -> label the geometry implies: every stride-th pixel of the rendered
// depth with its true label, majority vote per voxel, ties to the lower id.
std::map<mapping::VoxelKey, std::uint16_t> oracle_map(const SyntheticSequence& seq, const SyntheticScene& scene,
                                                      const mapping::MapConfig& config, int stride);

}  // namespace semcomm::dataio
