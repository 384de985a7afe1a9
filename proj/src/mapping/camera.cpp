#include "semcomm/mapping/camera.h"

#include "semcomm/core/errors.h"

namespace semcomm::mapping {

void CameraIntrinsics::validate() const
{
    if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigError("camera focal lengths must be positive");
    if (!(depth_scale > 0.0)) throw ConfigError("depth_scale must be positive");
}

CameraIntrinsics CameraIntrinsics::scaled(double sx, double sy) const
{
    CameraIntrinsics out = *this;
    out.fx *= sx;
    out.fy *= sy;
    out.cx = (cx + 0.5) * sx - 0.5;
    out.cy = (cy + 0.5) * sy - 0.5;
    return out;
}

nlohmann::json to_json(const CameraIntrinsics& intr)
{
    return {{"fx", intr.fx}, {"fy", intr.fy}, {"cx", intr.cx}, {"cy", intr.cy}, {"depth_scale", intr.depth_scale}};
}

CameraIntrinsics intrinsics_from_json(const nlohmann::json& j)
{
    CameraIntrinsics intr;
    try {
        intr.fx = j.at("fx").get<double>();
        intr.fy = j.at("fy").get<double>();
        intr.cx = j.at("cx").get<double>();
        intr.cy = j.at("cy").get<double>();
        intr.depth_scale = j.value("depth_scale", intr.depth_scale);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("intrinsics: ") + e.what());
    }
    intr.validate();
    return intr;
}

std::vector<LabeledPoint> backproject(const ImageFrame& depth, const LabelImage& labels,
                                      const CameraIntrinsics& intr, int stride)
{
    if (depth.channels != 1) throw ConfigError("depth image must have one channel");
    if (depth.height != labels.height || depth.width != labels.width) {
        throw ConfigError("depth " + std::to_string(depth.width) + "x" + std::to_string(depth.height) +
                          " and label image " + std::to_string(labels.width) + "x" + std::to_string(labels.height) +
                          " differ in size");
    }
    if (stride < 1) throw ConfigError("backprojection stride must be >= 1");
    intr.validate();

    std::vector<LabeledPoint> points;
    for (int v = 0; v < depth.height; v += stride) {
        for (int u = 0; u < depth.width; u += stride) {
            const double d = depth.at(v, u);
            if (!(d > 0.0)) continue;
            LabeledPoint p;
            const double z = d / intr.depth_scale;
            p.position = {(u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z};
            p.label = labels.at(v, u);
            points.push_back(p);
        }
    }
    return points;
}

void transform_to_world(std::vector<LabeledPoint>& points, const Pose& pose)
{
    const Eigen::Matrix3d R = pose.rotation.toRotationMatrix();
    for (auto& p : points) p.position = R * p.position + pose.translation;
}

}  // namespace semcomm::mapping
