#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "semcomm/core/errors.h"
#include "semcomm/core/rng.h"
#include "semcomm/mapping/camera.h"
#include "semcomm/mapping/export.h"
#include "semcomm/mapping/octree.h"
#include "semcomm/mapping/segmenter.h"

using namespace semcomm;
using namespace semcomm::mapping;

namespace {

CameraIntrinsics small_camera()
{
    CameraIntrinsics c;
    c.fx = 4.0;
    c.fy = 5.0;
    c.cx = 2.0;
    c.cy = 1.0;
    c.depth_scale = 1000.0;
    return c;
}

LabeledPoint point_at(double x, double y, double z, std::uint16_t label)
{
    LabeledPoint p;
    p.position = {x, y, z};
    p.label = label;
    return p;
}

// Closed form after n_l observations of each label with uniform prior.
std::vector<double> bayes_oracle(const std::vector<int>& counts, double p)
{
    const double q = (1.0 - p) / double(counts.size() - 1);
    int total = 0;
    for (int c : counts) total += c;
    std::vector<double> logw;
    for (int c : counts) logw.push_back(c * std::log(p) + (total - c) * std::log(q));
    const double m = *std::max_element(logw.begin(), logw.end());
    double z = 0.0;
    for (double& w : logw) z += (w = std::exp(w - m));
    for (double& w : logw) w /= z;
    return logw;
}

std::filesystem::path temp_path(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "semcomm_mapping_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("backprojection examples")
{
    const auto intr = small_camera();
    ImageFrame depth(3, 5, 1);
    LabelImage labels(3, 5, 7);
    depth.at(1, 2) = 1000.0;
    auto pts = backproject(depth, labels, intr, 1);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].position == Eigen::Vector3d(0, 0, 1));
    CHECK(pts[0].label == 7);

    ImageFrame zeros(3, 5, 1);
    CHECK(backproject(zeros, labels, intr, 1).empty());

    CHECK_THROWS_AS(backproject(depth, LabelImage(3, 4), intr, 1), ConfigError);
    CHECK_THROWS_AS(backproject(depth, labels, intr, 0), ConfigError);
}

TEST_CASE("backprojection matches the pinhole formula")
{
    const CameraIntrinsics intr;
    Rng rng(1);
    ImageFrame depth(48, 64, 1);
    LabelImage labels(48, 64);
    for (auto& d : depth.data) d = rng.below(4) ? double(1 + rng.below(40000)) : 0.0;
    for (auto& l : labels.labels) l = static_cast<std::uint16_t>(rng.below(5));
    for (int stride : {1, 3}) {
        const auto pts = backproject(depth, labels, intr, stride);
        std::size_t k = 0;
        for (int v = 0; v < depth.height; v += stride) {
            for (int u = 0; u < depth.width; u += stride) {
                const double d = depth.at(v, u);
                if (d == 0.0) continue;
                REQUIRE(k < pts.size());
                const double z = d / intr.depth_scale;
                const Eigen::Vector3d want((u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z);
                CHECK((pts[k].position - want).norm() <= 1e-12);
                CHECK(pts[k].label == labels.at(v, u));
                ++k;
            }
        }
        CHECK(k == pts.size());
    }
}

TEST_CASE("camera to world transforms")
{
    std::vector<LabeledPoint> pts{point_at(1, 0, 0, 0), point_at(0, 2, 3, 0)};
    Pose identity;
    auto copy = pts;
    transform_to_world(copy, identity);
    CHECK(copy[0].position == pts[0].position);
    CHECK(copy[1].position == pts[1].position);

    Pose shift;
    shift.translation = {1, -2, 0.5};
    copy = pts;
    transform_to_world(copy, shift);
    CHECK((copy[1].position - Eigen::Vector3d(1, 0, 3.5)).norm() <= 1e-15);

    Pose yaw;
    yaw.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitZ()));
    copy = pts;
    transform_to_world(copy, yaw);
    CHECK((copy[0].position - Eigen::Vector3d(0, 1, 0)).norm() <= 1e-12);
}

TEST_CASE("intrinsics scaling and json")
{
    const CameraIntrinsics intr;
    const auto half = intr.scaled(0.25, 0.25);
    CHECK(half.fx == doctest::Approx(131.25));
    CHECK(intrinsics_from_json(to_json(half)) == half);
    CameraIntrinsics bad;
    bad.fx = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("morton codes round trip and order")
{
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const std::int64_t x = std::int64_t(rng.below(1 << 21)) - kVoxelBias;
        const std::int64_t y = std::int64_t(rng.below(1 << 21)) - kVoxelBias;
        const std::int64_t z = std::int64_t(rng.below(1 << 21)) - kVoxelBias;
        const auto d = morton_decode(morton_encode(x, y, z));
        CHECK(d[0] == x);
        CHECK(d[1] == y);
        CHECK(d[2] == z);
    }
    CHECK(morton_encode(-kVoxelBias, -kVoxelBias, -kVoxelBias) == 0);
    CHECK(morton_encode(1 - kVoxelBias, -kVoxelBias, -kVoxelBias) == 1);
    CHECK(morton_encode(-kVoxelBias, 1 - kVoxelBias, -kVoxelBias) == 2);
    CHECK(morton_encode(-kVoxelBias, -kVoxelBias, 1 - kVoxelBias) == 4);
    CHECK_THROWS(morton_encode(kVoxelBias, 0, 0));
}

TEST_CASE("bayes fusion examples")
{
    MapConfig cfg;
    cfg.label_count = 3;
    SemanticOctree map(cfg);
    CHECK(map.fuse(point_at(0.01, 0.01, 0.01, 1)));
    const auto key = map.key_of({0.01, 0.01, 0.01});
    const Voxel* v = map.find(key);
    REQUIRE(v);
    CHECK(v->prob[0] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(v->prob[1] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(v->prob[2] == doctest::Approx(0.05).epsilon(1e-12));

    CHECK_FALSE(map.fuse(point_at(0.02, 0.02, 0.02, 1)));
    v = map.find(key);
    CHECK(v->prob[1] == doctest::Approx(0.81 / (0.81 + 2 * 0.0025)).epsilon(1e-12));
    CHECK(v->prob[1] == doctest::Approx(0.99387).epsilon(1e-5));

    SemanticOctree tie(cfg);
    tie.fuse(point_at(0, 0, 0, 0));
    tie.fuse(point_at(0, 0, 0, 2));
    const Voxel* t = tie.find(tie.key_of({0, 0, 0}));
    CHECK(t->prob[0] == doctest::Approx(t->prob[2]).epsilon(1e-12));
    CHECK(t->best_label() == 0);

    CHECK_THROWS_AS(map.fuse(point_at(0, 0, 0, 3)), ConfigError);
    MapConfig bad;
    bad.hit_prob = 0.5;
    CHECK_THROWS_AS(SemanticOctree{bad}, ConfigError);
    bad = MapConfig{};
    bad.label_count = 1;
    CHECK_THROWS_AS(SemanticOctree{bad}, ConfigError);
}

TEST_CASE("bayes fusion agrees with the closed form and is order invariant")
{
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        MapConfig cfg;
        cfg.label_count = 2 + rng.below(5);
        cfg.hit_prob = rng.uniform(0.55, 0.95);
        std::vector<std::uint16_t> seq(1 + rng.below(30));
        std::vector<int> counts(cfg.label_count, 0);
        for (auto& l : seq) {
            l = static_cast<std::uint16_t>(rng.below(cfg.label_count));
            ++counts[l];
        }
        SemanticOctree a(cfg), b(cfg);
        for (auto l : seq) a.fuse(point_at(0.1, 0.1, 0.1, l));
        auto shuffled = seq;
        for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        for (auto l : shuffled) b.fuse(point_at(0.1, 0.1, 0.1, l));

        const auto key = a.key_of({0.1, 0.1, 0.1});
        const auto& pa = a.find(key)->prob;
        const auto& pb = b.find(key)->prob;
        const auto want = bayes_oracle(counts, cfg.hit_prob);
        double sum = 0.0;
        for (std::size_t l = 0; l < cfg.label_count; ++l) {
            CHECK(std::abs(pa[l] - pb[l]) <= 1e-12);
            CHECK(std::abs(pa[l] - want[l]) <= 1e-9);
            sum += pa[l];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("repeated observations strictly raise the posterior")
{
    MapConfig cfg;
    cfg.label_count = 4;
    SemanticOctree map(cfg);
    double prev = 0.0;
    for (int i = 0; i < 6; ++i) {
        map.fuse(point_at(1, 1, 1, 2));
        const double p = map.find(map.key_of({1, 1, 1}))->prob[2];
        CHECK(p > prev);
        prev = p;
    }
}

TEST_CASE("integrating a flat wall")
{
    // Camera looks down +z at a wall 2 m away.
    CameraIntrinsics intr;
    intr.fx = intr.fy = 50.0;
    intr.cx = 31.5;
    intr.cy = 23.5;
    ImageFrame depth(48, 64, 1, 0, 2.0 * intr.depth_scale);
    LabelImage labels(48, 64, 1);
    MapConfig cfg;
    cfg.resolution = 0.05;
    cfg.label_count = 3;
    SemanticOctree map(cfg);
    const Pose pose;
    const auto stats = integrate(map, depth, labels, pose, intr, 2);
    CHECK(stats.points == 32 * 24);
    CHECK(stats.new_voxels == map.size());
    CHECK(map.size() > 0);
    CHECK(map.size() <= stats.points);
    std::set<VoxelKey> distinct;
    for (const auto& [key, voxel] : map.voxels()) {
        const auto c = map.center(key);
        CHECK(std::abs(c.z() - 2.0) <= cfg.resolution);
        CHECK(voxel.best_label() == 1);
        distinct.insert(key);
    }
    CHECK(distinct.size() == map.size());

    std::map<VoxelKey, double> before;
    for (const auto& [key, voxel] : map.voxels()) before[key] = voxel.prob[1];
    const auto again = integrate(map, depth, labels, pose, intr, 2);
    CHECK(again.new_voxels == 0);
    CHECK(map.size() == before.size());
    for (const auto& [key, voxel] : map.voxels()) CHECK(voxel.prob[1] >= before.at(key));

    const auto none = integrate(map, ImageFrame(48, 64, 1), labels, pose, intr, 2);
    CHECK(none.points == 0);
}

TEST_CASE("voxel keys and centers")
{
    MapConfig cfg;
    cfg.resolution = 0.1;
    SemanticOctree map(cfg);
    const auto k = map.key_of({0.05, -0.05, 0.25});
    CHECK((map.center(k) - Eigen::Vector3d(0.05, -0.05, 0.25)).norm() <= 1e-12);
    CHECK(map.key_of({0.0, 0.0, 0.0}) == map.key_of({0.0999, 0.0999, 0.0999}));
    CHECK(map.key_of({0.0, 0.0, 0.0}) != map.key_of({-0.0001, 0.0, 0.0}));
}

TEST_CASE("palette segmenter")
{
    const auto palette = LabelPalette::make_default(12);
    CHECK(palette.size() == 12);
    std::set<std::array<std::uint8_t, 3>> colors;
    for (const auto& l : palette.labels) colors.insert(l.color);
    CHECK(colors.size() == 12);

    const PaletteSegmenter seg(palette);
    ImageFrame rgb(1, 12, 3);
    for (int x = 0; x < 12; ++x) {
        for (int c = 0; c < 3; ++c) rgb.at(0, x, c) = palette.labels[x].color[c] / 255.0;
    }
    const auto out = seg.segment(rgb);
    for (int x = 0; x < 12; ++x) CHECK(out.at(0, x) == x);

    LabelPalette two;
    two.labels = {{"a", {0, 0, 0}}, {"b", {255, 255, 255}}};
    ImageFrame mid(1, 1, 3, 0, 127.5 / 255.0);
    CHECK(PaletteSegmenter(two).segment(mid).at(0, 0) == 0);

    const auto back = palette_from_json(to_json(palette));
    REQUIRE(back.size() == palette.size());
    CHECK(back.labels[3].name == palette.labels[3].name);
    CHECK(back.labels[3].color == palette.labels[3].color);
}

TEST_CASE("ply export")
{
    MapConfig cfg;
    cfg.label_count = 3;
    const auto palette = LabelPalette::make_default(3);
    SemanticOctree empty(cfg);
    std::ostringstream out;
    write_ply(out, map_vertices(empty, palette));
    std::istringstream in(out.str());
    CHECK(read_ply(in).empty());
    CHECK(out.str().find("element vertex 0\n") != std::string::npos);

    SemanticOctree one(cfg);
    one.fuse(point_at(0.01, 0.02, 0.03, 2));
    const auto verts = map_vertices(one, palette);
    REQUIRE(verts.size() == 1);
    CHECK((verts[0].position - Eigen::Vector3d(0.025, 0.025, 0.025)).norm() <= 1e-12);
    CHECK(verts[0].label == 2);
    CHECK(verts[0].probability == doctest::Approx(0.9));
    CHECK(verts[0].color == palette.labels[2].color);

    Rng rng(4);
    SemanticOctree many(cfg);
    for (int i = 0; i < 500; ++i) {
        many.fuse(point_at(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 1),
                           static_cast<std::uint16_t>(rng.below(3))));
    }
    const auto path = temp_path("map.ply");
    export_map(many, palette, path);
    CHECK(std::filesystem::exists(path.string() + ".labels.json"));
    const auto back = import_map(path);
    const auto want = map_vertices(many, palette);
    REQUIRE(back.size() == want.size());
    std::size_t label_matches = 0;
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].position == want[i].position);
        CHECK(back[i].probability == want[i].probability);
        label_matches += back[i].label == want[i].label;
    }
    CHECK(label_matches == back.size());

    std::istringstream junk("not a ply\n");
    CHECK_THROWS_AS(read_ply(junk), IoError);
    CHECK_THROWS_AS(export_map(many, palette, "/nonexistent-dir/x.ply"), IoError);
}
