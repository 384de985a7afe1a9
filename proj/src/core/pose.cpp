#include "semcomm/core/pose.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "semcomm/core/errors.h"

namespace semcomm {

Eigen::Isometry3d Pose::transform() const
{
    Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
    T.linear() = rotation.toRotationMatrix();
    T.translation() = translation;
    return T;
}

Pose Pose::from_transform(double timestamp, const Eigen::Isometry3d& T)
{
    Pose p;
    p.timestamp = timestamp;
    p.translation = T.translation();
    p.rotation = Eigen::Quaterniond(T.linear()).normalized();
    return p;
}

bool Pose::valid() const
{
    return std::abs(rotation.norm() - 1.0) <= 1e-6 && translation.allFinite();
}

Trajectory::Trajectory(std::vector<Pose> poses)
{
    poses_.reserve(poses.size());
    for (const auto& p : poses) push_back(p);
}

void Trajectory::push_back(const Pose& pose)
{
    if (!poses_.empty() && !(pose.timestamp > poses_.back().timestamp)) {
        throw ConfigError("trajectory timestamps must be strictly increasing (" +
                          std::to_string(pose.timestamp) + " after " +
                          std::to_string(poses_.back().timestamp) + ")");
    }
    poses_.push_back(pose);
}

std::optional<Pose> Trajectory::nearest(double t, double tol) const
{
    if (poses_.empty()) return std::nullopt;
    auto it = std::lower_bound(poses_.begin(), poses_.end(), t,
                               [](const Pose& p, double v) { return p.timestamp < v; });
    const Pose* best = nullptr;
    double best_dt = 0.0;
    auto consider = [&](const Pose& p) {
        const double dt = std::abs(p.timestamp - t);
        if (!best || dt < best_dt) {
            best = &p;
            best_dt = dt;
        }
    };
    if (it != poses_.begin()) consider(*std::prev(it));
    if (it != poses_.end()) consider(*it);
    if (!best || best_dt > tol) return std::nullopt;
    return *best;
}

}  // namespace semcomm
