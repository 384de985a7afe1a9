#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "semcomm/core/image.h"
#include "semcomm/core/pose.h"

namespace semcomm::mapping {

struct CameraIntrinsics {
    double fx = 525.0;
    double fy = 525.0;
    double cx = 319.5;
    double cy = 239.5;
    // raw depth units per meter
    double depth_scale = 5000.0;

    // Throws ConfigError unless fx, fy, depth_scale > 0.
    void validate() const;
    // Same camera at a different image size (focal lengths and principal
    // point scale with the resolution).
    CameraIntrinsics scaled(double sx, double sy) const;

    bool operator==(const CameraIntrinsics&) const = default;
};

nlohmann::json to_json(const CameraIntrinsics& intr);
CameraIntrinsics intrinsics_from_json(const nlohmann::json& j);

struct LabeledPoint {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    std::uint16_t label = 0;
    float confidence = 1.0f;
};

// Pinhole backprojection of every stride-th pixel with nonzero depth:
// z = d / depth_scale, x = (u - cx) z / fx, y = (v - cy) z / fy.
std::vector<LabeledPoint> backproject(const ImageFrame& depth, const LabelImage& labels,
                                      const CameraIntrinsics& intr, int stride = 4);

// p_w = R p_c + t, in place.
void transform_to_world(std::vector<LabeledPoint>& points, const Pose& pose);

}  // namespace semcomm::mapping
