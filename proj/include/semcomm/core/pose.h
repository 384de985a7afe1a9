#pragma once

#include <Eigen/Geometry>
#include <optional>
#include <vector>

namespace semcomm {

// Camera-to-world rigid transform with a capture time in seconds.
struct Pose {
    double timestamp = 0.0;
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

    Eigen::Isometry3d transform() const;
    static Pose from_transform(double timestamp, const Eigen::Isometry3d& T);

    // |q| == 1 within 1e-6.
    bool valid() const;
};

// Ordered poses with strictly increasing timestamps.
class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(std::vector<Pose> poses);

    const std::vector<Pose>& poses() const { return poses_; }
    std::size_t size() const { return poses_.size(); }
    bool empty() const { return poses_.empty(); }
    const Pose& operator[](std::size_t i) const { return poses_[i]; }

    // Appends; throws ConfigError if the timestamp does not increase.
    void push_back(const Pose& pose);

    // Pose whose timestamp is nearest to t, if within tol seconds.
    std::optional<Pose> nearest(double t, double tol) const;

private:
    std::vector<Pose> poses_;
};

}  // namespace semcomm
