#include "semcomm/metrics/trajectory.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <spdlog/spdlog.h>

#include <Eigen/SVD>

#include "semcomm/core/errors.h"

namespace semcomm::metrics {

ErrorStats summarize(const std::vector<double>& errors)
{
    ErrorStats s;
    s.count = errors.size();
    if (errors.empty()) return s;
    double sq = 0.0, sum = 0.0;
    for (double e : errors) {
        sq += e * e;
        sum += e;
        s.max = std::max(s.max, e);
    }
    s.rmse = std::sqrt(sq / static_cast<double>(errors.size()));
    s.mean = sum / static_cast<double>(errors.size());
    return s;
}

std::vector<PosePair> associate(const Trajectory& estimated, const Trajectory& reference, double tol_s)
{
    std::vector<PosePair> pairs;
    for (const auto& p : estimated.poses()) {
        if (auto q = reference.nearest(p.timestamp, tol_s)) pairs.push_back({p, *q});
    }
    return pairs;
}

Eigen::Isometry3d rigid_align(const std::vector<Eigen::Vector3d>& from, const std::vector<Eigen::Vector3d>& to)
{
    const std::size_t n = from.size();
    Eigen::Vector3d mu_from = Eigen::Vector3d::Zero(), mu_to = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        mu_from += from[i];
        mu_to += to[i];
    }
    mu_from /= static_cast<double>(n);
    mu_to /= static_cast<double>(n);

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < n; ++i) cov += (to[i] - mu_to) * (from[i] - mu_from).transpose();

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
    Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
    T.linear() = svd.matrixU() * d * svd.matrixV().transpose();
    T.translation() = mu_to - T.linear() * mu_from;
    return T;
}

ErrorStats ate(const Trajectory& estimated, const Trajectory& reference, double tol_s)
{
    const auto pairs = associate(estimated, reference, tol_s);
    if (pairs.size() < 3) {
        throw ConfigError("insufficient overlap: " + std::to_string(pairs.size()) +
                          " associated poses, need at least 3");
    }
    std::vector<Eigen::Vector3d> est, ref;
    for (const auto& p : pairs) {
        est.push_back(p.estimated.translation);
        ref.push_back(p.reference.translation);
    }
    const Eigen::Isometry3d T = rigid_align(est, ref);
    std::vector<double> errors;
    for (std::size_t i = 0; i < est.size(); ++i) errors.push_back((T * est[i] - ref[i]).norm());
    return summarize(errors);
}

ErrorStats rpe(const Trajectory& estimated, const Trajectory& reference, int delta, double tol_s)
{
    if (delta < 1) throw ConfigError("rpe delta must be >= 1");
    const auto pairs = associate(estimated, reference, tol_s);
    const auto d = static_cast<std::size_t>(delta);
    if (pairs.size() <= d) {
        throw ConfigError("insufficient overlap: " + std::to_string(pairs.size()) +
                          " associated poses for delta " + std::to_string(delta));
    }
    std::vector<double> errors;
    for (std::size_t i = 0; i + d < pairs.size(); ++i) {
        const Eigen::Isometry3d p_rel = pairs[i].estimated.transform().inverse() * pairs[i + d].estimated.transform();
        const Eigen::Isometry3d q_rel = pairs[i].reference.transform().inverse() * pairs[i + d].reference.transform();
        const Eigen::Isometry3d e = q_rel.inverse() * p_rel;
        errors.push_back(e.translation().norm());
    }
    return summarize(errors);
}

Trajectory parse_tum_trajectory(std::istream& in, const std::string& source, bool strict)
{
    std::vector<Pose> poses;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        double v[8];
        bool ok = true;
        for (double& x : v) ok = ok && static_cast<bool>(ls >> x);
        std::string extra;
        if (ok && (ls >> extra)) ok = false;
        Pose p;
        if (ok) {
            p.timestamp = v[0];
            p.translation = {v[1], v[2], v[3]};
            p.rotation = Eigen::Quaterniond(v[7], v[4], v[5], v[6]);
            const double n = p.rotation.norm();
            ok = std::isfinite(v[0]) && p.translation.allFinite() && n > 1e-9;
            if (ok) p.rotation.normalize();
        }
        if (!ok) {
            const std::string msg = source + ":" + std::to_string(lineno) + ": malformed trajectory line";
            if (strict) throw ConfigError(msg);
            spdlog::warn("{} (skipped)", msg);
            continue;
        }
        if (strict && !poses.empty() && !(p.timestamp > poses.back().timestamp)) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": timestamps must be strictly increasing");
        }
        poses.push_back(p);
    }
    if (!strict) {
        std::stable_sort(poses.begin(), poses.end(),
                         [](const Pose& a, const Pose& b) { return a.timestamp < b.timestamp; });
        auto last = std::unique(poses.begin(), poses.end(),
                                [](const Pose& a, const Pose& b) { return a.timestamp == b.timestamp; });
        if (last != poses.end()) {
            spdlog::warn("{}: dropped {} poses with duplicate timestamps", source, poses.end() - last);
            poses.erase(last, poses.end());
        }
    }
    return Trajectory(std::move(poses));
}

Trajectory read_tum_trajectory(const std::filesystem::path& path, bool strict)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trajectory file " + path.string());
    return parse_tum_trajectory(in, path.string(), strict);
}

void write_tum_trajectory(std::ostream& out, const Trajectory& trajectory)
{
    const auto old = out.precision(17);
    for (const auto& p : trajectory.poses()) {
        out << p.timestamp << ' ' << p.translation.x() << ' ' << p.translation.y() << ' ' << p.translation.z() << ' '
            << p.rotation.x() << ' ' << p.rotation.y() << ' ' << p.rotation.z() << ' ' << p.rotation.w() << '\n';
    }
    out.precision(old);
}

nlohmann::json to_json(const ErrorStats& stats)
{
    return {{"rmse", stats.rmse}, {"mean", stats.mean}, {"max", stats.max}, {"count", stats.count}};
}

}  // namespace semcomm::metrics
