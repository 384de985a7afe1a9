#include "semcomm/dataio/synthetic.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semcomm/core/errors.h"
#include "semcomm/core/rng.h"

namespace semcomm::dataio {
namespace {

nlohmann::json vec_json(const Eigen::Vector3d& v)
{
    return {v.x(), v.y(), v.z()};
}

Eigen::Vector3d json_vec(const nlohmann::json& j)
{
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("scene vectors need 3 components");
    return {v[0], v[1], v[2]};
}

// Entry distance along the ray into the box, or +inf.
double ray_box(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const Box& b)
{
    double t0 = -std::numeric_limits<double>::infinity(), t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-15) {
            if (o[a] < b.min[a] || o[a] > b.max[a]) return std::numeric_limits<double>::infinity();
            continue;
        }
        double ta = (b.min[a] - o[a]) / d[a], tb = (b.max[a] - o[a]) / d[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (t0 > t1 || t0 <= 1e-9) return std::numeric_limits<double>::infinity();
    return t0;
}

bool inside(const Eigen::Vector3d& p, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi)
{
    return (p.array() > lo.array()).all() && (p.array() < hi.array()).all();
}

}  // namespace

SyntheticScene make_room_scene(int width, int height)
{
    SyntheticScene s;
    s.width = width;
    s.height = height;
    s.planes = {
        {Eigen::Vector3d::UnitZ(), 0.0, 0},    // floor
        {Eigen::Vector3d::UnitZ(), 2.5, 1},    // ceiling
        {Eigen::Vector3d::UnitX(), 3.0, 2},    // front wall
        {Eigen::Vector3d::UnitX(), -3.0, 2},   // back wall
        {Eigen::Vector3d::UnitY(), 3.0, 3},    // left wall
        {Eigen::Vector3d::UnitY(), -3.0, 3},   // right wall
    };
    s.boxes = {{{1.6, -0.6, 0.0}, {2.4, 0.6, 0.9}, 4}};
    s.path.start = {-1.5, -1.0, 1.3};
    s.path.end = {-0.5, 1.0, 1.3};
    s.path.target = {3.0, 0.0, 0.8};
    s.intrinsics = mapping::CameraIntrinsics{}.scaled(width / 640.0, height / 480.0);
    s.palette = mapping::LabelPalette::make_default(5);
    s.palette.labels[0].name = "floor";
    s.palette.labels[1].name = "ceiling";
    s.palette.labels[2].name = "wall_x";
    s.palette.labels[3].name = "wall_y";
    s.palette.labels[4].name = "cabinet";
    return s;
}

nlohmann::json to_json(const SyntheticScene& s)
{
    nlohmann::json planes = nlohmann::json::array(), boxes = nlohmann::json::array();
    for (const auto& p : s.planes) planes.push_back({{"normal", vec_json(p.normal)}, {"offset", p.offset}, {"label", p.label}});
    for (const auto& b : s.boxes) boxes.push_back({{"min", vec_json(b.min)}, {"max", vec_json(b.max)}, {"label", b.label}});
    return {{"planes", planes},
            {"boxes", boxes},
            {"bounds_min", vec_json(s.bounds_min)},
            {"bounds_max", vec_json(s.bounds_max)},
            {"path",
             {{"start", vec_json(s.path.start)},
              {"end", vec_json(s.path.end)},
              {"target", vec_json(s.path.target)},
              {"fps", s.path.fps}}},
            {"width", s.width},
            {"height", s.height},
            {"intrinsics", mapping::to_json(s.intrinsics)},
            {"palette", mapping::to_json(s.palette)},
            {"rgb_noise", s.rgb_noise},
            {"quantize_depth", s.quantize_depth},
            {"start_us", s.start_us},
            {"depth_offset_us", s.depth_offset_us}};
}

SyntheticScene scene_from_json(const nlohmann::json& j)
{
    SyntheticScene s = make_room_scene(j.value("width", 64), j.value("height", 48));
    try {
        if (j.contains("planes")) {
            s.planes.clear();
            for (const auto& p : j.at("planes")) {
                s.planes.push_back({json_vec(p.at("normal")).normalized(), p.at("offset").get<double>(),
                                    p.at("label").get<std::uint16_t>()});
            }
        }
        if (j.contains("boxes")) {
            s.boxes.clear();
            for (const auto& b : j.at("boxes")) {
                s.boxes.push_back({json_vec(b.at("min")), json_vec(b.at("max")), b.at("label").get<std::uint16_t>()});
            }
        }
        if (j.contains("bounds_min")) s.bounds_min = json_vec(j.at("bounds_min"));
        if (j.contains("bounds_max")) s.bounds_max = json_vec(j.at("bounds_max"));
        if (j.contains("path")) {
            const auto& p = j.at("path");
            if (p.contains("start")) s.path.start = json_vec(p.at("start"));
            if (p.contains("end")) s.path.end = json_vec(p.at("end"));
            if (p.contains("target")) s.path.target = json_vec(p.at("target"));
            s.path.fps = p.value("fps", s.path.fps);
        }
        if (j.contains("intrinsics")) s.intrinsics = mapping::intrinsics_from_json(j.at("intrinsics"));
        if (j.contains("palette")) s.palette = mapping::palette_from_json(j.at("palette"));
        s.rgb_noise = j.value("rgb_noise", s.rgb_noise);
        s.quantize_depth = j.value("quantize_depth", s.quantize_depth);
        s.start_us = j.value("start_us", s.start_us);
        s.depth_offset_us = j.value("depth_offset_us", s.depth_offset_us);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scene: ") + e.what());
    }
    for (const auto& p : s.planes) {
        if (p.label >= s.label_count()) throw ConfigError("scene plane label outside palette");
    }
    for (const auto& b : s.boxes) {
        if (b.label >= s.label_count()) throw ConfigError("scene box label outside palette");
    }
    return s;
}

Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double timestamp)
{
    const Eigen::Vector3d fwd_raw = target - eye;
    if (fwd_raw.norm() < 1e-9) throw ConfigError("degenerate camera path: eye coincides with target");
    const Eigen::Vector3d fwd = fwd_raw.normalized();
    const Eigen::Vector3d right_raw = fwd.cross(Eigen::Vector3d::UnitZ());
    if (right_raw.norm() < 1e-9) throw ConfigError("degenerate camera path: looking straight up or down");
    const Eigen::Vector3d right = right_raw.normalized();
    const Eigen::Vector3d down = fwd.cross(right);
    Eigen::Matrix3d R;
    R.col(0) = right;
    R.col(1) = down;
    R.col(2) = fwd;
    Pose p;
    p.timestamp = timestamp;
    p.translation = eye;
    p.rotation = Eigen::Quaterniond(R).normalized();
    return p;
}

void render_view(const SyntheticScene& scene, const Pose& pose, ImageFrame& depth, LabelImage& labels)
{
    const auto& K = scene.intrinsics;
    depth = ImageFrame(scene.height, scene.width, 1);
    labels = LabelImage(scene.height, scene.width);
    const Eigen::Matrix3d R = pose.rotation.toRotationMatrix();
    const Eigen::Vector3d o = pose.translation;
    for (int v = 0; v < scene.height; ++v) {
        for (int u = 0; u < scene.width; ++u) {
            // Camera-frame direction with unit z, so the hit distance t is the depth.
            const Eigen::Vector3d dc((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
            const Eigen::Vector3d dw = R * dc;
            double best = std::numeric_limits<double>::infinity();
            std::uint16_t label = 0;
            for (const auto& pl : scene.planes) {
                const double denom = pl.normal.dot(dw);
                if (std::abs(denom) < 1e-12) continue;
                const double t = (pl.offset - pl.normal.dot(o)) / denom;
                if (t > 1e-9 && t < best) {
                    best = t;
                    label = pl.label;
                }
            }
            for (const auto& b : scene.boxes) {
                const double t = ray_box(o, dw, b);
                if (t < best) {
                    best = t;
                    label = b.label;
                }
            }
            if (!std::isfinite(best)) continue;
            double raw = best * K.depth_scale;
            if (scene.quantize_depth) raw = std::min(std::round(raw), 65535.0);
            depth.at(v, u) = raw;
            labels.at(v, u) = label;
        }
    }
}

SyntheticSequence synth_generate(const SyntheticScene& scene, int n_frames, std::uint64_t seed)
{
    if (n_frames < 1) throw ConfigError("synthetic sequence needs at least one frame");
    if (scene.width < 1 || scene.height < 1) throw ConfigError("synthetic image size must be positive");
    if (!(scene.path.fps > 0.0)) throw ConfigError("camera path fps must be positive");
    scene.intrinsics.validate();
    if (scene.palette.size() < 2) throw ConfigError("synthetic scene needs at least two labels");
    for (const auto& eye : {scene.path.start, scene.path.end}) {
        if (!inside(eye, scene.bounds_min, scene.bounds_max)) {
            throw ConfigError("degenerate camera path: camera leaves the scene bounds");
        }
        for (const auto& b : scene.boxes) {
            if (inside(eye, b.min, b.max)) throw ConfigError("degenerate camera path: camera inside a box");
        }
    }

    Rng rng(mix_seed(seed, 0x5CE7E));
    SyntheticSequence seq;
    const auto frame_us = static_cast<std::int64_t>(std::llround(1e6 / scene.path.fps));
    for (int i = 0; i < n_frames; ++i) {
        const double a = n_frames == 1 ? 0.0 : static_cast<double>(i) / (n_frames - 1);
        const Eigen::Vector3d eye = (1.0 - a) * scene.path.start + a * scene.path.end;
        const std::int64_t ts = scene.start_us + i * frame_us;

        SyntheticFrame f;
        f.pose = look_at(eye, scene.path.target, us_to_seconds(ts));
        render_view(scene, f.pose, f.depth, f.labels);
        f.depth.timestamp_us = ts + scene.depth_offset_us;

        f.rgb = ImageFrame(scene.height, scene.width, 3, ts);
        for (int y = 0; y < scene.height; ++y) {
            for (int x = 0; x < scene.width; ++x) {
                const auto& color = scene.palette.labels[f.labels.at(y, x)].color;
                for (int c = 0; c < 3; ++c) {
                    double val = color[c] / 255.0;
                    if (scene.rgb_noise > 0.0) val = std::clamp(val + scene.rgb_noise * rng.gaussian(), 0.0, 1.0);
                    f.rgb.at(y, x, c) = val;
                }
            }
        }
        seq.groundtruth.push_back(f.pose);
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

std::map<mapping::VoxelKey, std::uint16_t> oracle_map(const SyntheticSequence& seq, const SyntheticScene& scene,
                                                      const mapping::MapConfig& config, int stride)
{
    const mapping::SemanticOctree keys(config);
    std::map<mapping::VoxelKey, std::vector<std::size_t>> votes;
    for (const auto& f : seq.frames) {
        auto pts = mapping::backproject(f.depth, f.labels, scene.intrinsics, stride);
        mapping::transform_to_world(pts, f.pose);
        for (const auto& p : pts) {
            auto& v = votes[keys.key_of(p.position)];
            if (v.empty()) v.assign(config.label_count, 0);
            ++v.at(p.label);
        }
    }
    std::map<mapping::VoxelKey, std::uint16_t> out;
    for (const auto& [key, v] : votes) {
        out[key] = static_cast<std::uint16_t>(std::max_element(v.begin(), v.end()) - v.begin());
    }
    return out;
}

}  // namespace semcomm::dataio
