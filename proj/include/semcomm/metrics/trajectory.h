#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "semcomm/core/pose.h"

namespace semcomm::metrics {

struct ErrorStats {
    double rmse = 0.0;
    double mean = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

ErrorStats summarize(const std::vector<double>& errors);

// Pairs (estimated, reference) poses by nearest reference timestamp within tol.
struct PosePair {
    Pose estimated;
    Pose reference;
};
std::vector<PosePair> associate(const Trajectory& estimated, const Trajectory& reference, double tol_s = 0.02);

// Least-squares rotation + translation taking `from` onto `to` (no scale).
Eigen::Isometry3d rigid_align(const std::vector<Eigen::Vector3d>& from, const std::vector<Eigen::Vector3d>& to);

// Translational residuals after rigidly aligning estimated onto reference.
// Throws ConfigError("insufficient overlap") below three associated pairs.
ErrorStats ate(const Trajectory& estimated, const Trajectory& reference, double tol_s = 0.02);

// Translational norm of (Q_i^-1 Q_{i+d})^-1 (P_i^-1 P_{i+d}) over associated
// pairs, P estimated and Q reference.
ErrorStats rpe(const Trajectory& estimated, const Trajectory& reference, int delta = 1, double tol_s = 0.02);

// TUM trajectory text: "timestamp tx ty tz qx qy qz qw" per line, '#'
// comments. Strict mode throws ConfigError naming the source and line number
// of the first malformed line; lenient mode logs and skips it. Lenient mode
// also sorts by timestamp and drops duplicate timestamps.
Trajectory parse_tum_trajectory(std::istream& in, const std::string& source, bool strict = true);
Trajectory read_tum_trajectory(const std::filesystem::path& path, bool strict = true);
void write_tum_trajectory(std::ostream& out, const Trajectory& trajectory);

nlohmann::json to_json(const ErrorStats& stats);

}  // namespace semcomm::metrics
