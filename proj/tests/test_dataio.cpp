#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "semcomm/core/errors.h"
#include "semcomm/core/rng.h"
#include "semcomm/dataio/image_io.h"
#include "semcomm/dataio/synthetic.h"
#include "semcomm/dataio/tum.h"
#include "semcomm/mapping/camera.h"

using namespace semcomm;
using namespace semcomm::dataio;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& header, std::vector<std::uint8_t> body)
{
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

std::filesystem::path fresh_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "semcomm_dataio_test" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path);
    out << text;
}

// Single wall x = 2 facing a camera at the origin height 1.2 looking along +x.
SyntheticScene wall_scene()
{
    SyntheticScene s = make_room_scene(32, 24);
    s.planes = {{Eigen::Vector3d::UnitX(), 2.0, 2}};
    s.boxes.clear();
    s.path.start = s.path.end = {0.0, 0.0, 1.2};
    s.path.target = {2.0, 0.0, 1.2};
    return s;
}

double surface_distance(const SyntheticScene& s, const Eigen::Vector3d& p)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& pl : s.planes) best = std::min(best, std::abs(pl.normal.dot(p) - pl.offset));
    for (const auto& b : s.boxes) {
        const Eigen::Vector3d clamped = p.cwiseMax(b.min).cwiseMin(b.max);
        const double outside = (p - clamped).norm();
        double to_face = std::numeric_limits<double>::infinity();
        for (int a = 0; a < 3; ++a) {
            to_face = std::min({to_face, std::abs(clamped[a] - b.min[a]), std::abs(clamped[a] - b.max[a])});
        }
        best = std::min(best, std::hypot(outside, to_face));
    }
    return best;
}

}  // namespace

TEST_CASE("ppm decoding from hand-written bytes")
{
    const auto bytes = bytes_of("P6\n# comment\n2 1\n255\n", {255, 0, 0, 0, 128, 255});
    const auto img = decode_image(bytes);
    CHECK(img.height == 1);
    CHECK(img.width == 2);
    CHECK(img.channels == 3);
    CHECK(img.at(0, 0, 0) == 1.0);
    CHECK(img.at(0, 0, 1) == 0.0);
    CHECK(img.at(0, 1, 1) == 128.0 / 255.0);
    CHECK(img.at(0, 1, 2) == 1.0);
    CHECK(encode_image(img) == bytes_of("P6\n2 1\n255\n", {255, 0, 0, 0, 128, 255}));
}

TEST_CASE("pgm 16-bit round trip")
{
    Rng rng(1);
    ImageFrame depth(7, 9, 1);
    for (auto& v : depth.data) v = double(rng.below(65536));
    const auto back = decode_image(encode_image(depth));
    CHECK(back == depth);

    const auto hand = decode_image(bytes_of("P5\n1 1\n65535\n", {0x12, 0x34}));
    CHECK(hand.at(0, 0) == double(0x1234));
    const auto eight = decode_image(bytes_of("P5\n2 1\n255\n", {7, 200}));
    CHECK(eight.at(0, 1) == 200.0);
}

TEST_CASE("image decoding errors")
{
    CHECK_THROWS_WITH_AS(decode_image(bytes_of("P6\n2 2\n255\n", {1, 2, 3}), "x.ppm"),
                         doctest::Contains("truncated image data"), IoError);
    CHECK_THROWS_WITH_AS(decode_image(bytes_of("\x89PNG\r\n", {0, 0}), "x.png"),
                         doctest::Contains("unsupported format, convert to PPM/PGM"), IoError);
    CHECK_THROWS_AS(decode_image(bytes_of("P6\n2\n", {})), IoError);
    CHECK_THROWS_AS(image_read("/nonexistent/file.ppm"), IoError);
}

TEST_CASE("rgb quantization and file round trip")
{
    CHECK(quantize_unit(0.0) == 0);
    CHECK(quantize_unit(1.0) == 255);
    CHECK(quantize_unit(1.7) == 255);
    CHECK(quantize_unit(-0.2) == 0);
    CHECK(quantize_unit(0.5) == 128);

    Rng rng(2);
    ImageFrame rgb(5, 6, 3);
    for (auto& v : rgb.data) v = double(rng.below(256)) / 255.0;
    const auto path = fresh_dir("roundtrip") / "a.ppm";
    image_write(path, rgb);
    CHECK(image_read(path) == rgb);
}

TEST_CASE("tum index parsing")
{
    std::istringstream two("# rgb\n# timestamp filename\n1.5 rgb/b.png\n1.0 rgb/a.png\n");
    const auto e = parse_tum_index(two, "rgb.txt");
    REQUIRE(e.size() == 2);
    CHECK(e[0].timestamp == 1.0);
    CHECK(e[0].path == "rgb/a.png");
    CHECK(e[1].path == "rgb/b.png");

    std::istringstream comments("# only\n# comments\n");
    CHECK(parse_tum_index(comments, "c.txt").empty());

    std::istringstream malformed("1.0 a.png\nnot-a-number b.png\n2.0 c.png extra\n3.0 d.png\n");
    CHECK(parse_tum_index(malformed, "m.txt").size() == 2);
}

TEST_CASE("tum sequence loading")
{
    const auto dir = fresh_dir("seq");
    std::filesystem::create_directories(dir / "rgb");
    std::filesystem::create_directories(dir / "depth");
    ImageFrame rgb(2, 2, 3, 0, 0.2), depth(2, 2, 1, 0, 5000.0);
    image_write(dir / "rgb/1.ppm", rgb);
    image_write(dir / "rgb/2.ppm", rgb);
    image_write(dir / "depth/1.pgm", depth);
    write_text(dir / "rgb.txt", "# rgb\n1.033 rgb/2.ppm\n1.000 rgb/1.ppm\n");
    write_text(dir / "depth.txt", "1.002 depth/1.pgm\n");
    write_text(dir / "groundtruth.txt", "# gt\n1.0 0 0 0 0 0 0 1\n1.1 0.1 0 0 0 0 0 1\n");

    const auto seq = tum_load(dir);
    REQUIRE(seq.rgb.size() == 2);
    CHECK(seq.rgb[0].path == "rgb/1.ppm");
    CHECK(seq.depth.size() == 1);
    CHECK(seq.groundtruth.size() == 2);
    const auto frame = seq.load(seq.depth[0]);
    CHECK(frame.timestamp_us == 1'002'000);
    CHECK(frame.at(1, 1) == 5000.0);

    std::filesystem::remove(dir / "groundtruth.txt");
    CHECK_THROWS_WITH_AS(tum_load(dir), doctest::Contains("groundtruth.txt"), IoError);
    write_text(dir / "groundtruth.txt", "");
    write_text(dir / "depth.txt", "1.002 depth/missing.pgm\n");
    CHECK_THROWS_WITH_AS(tum_load(dir), doctest::Contains("missing.pgm"), IoError);
}

TEST_CASE("synthetic wall renders at constant depth")
{
    const auto scene = wall_scene();
    const auto seq = synth_generate(scene, 1, 0);
    REQUIRE(seq.frames.size() == 1);
    const auto& f = seq.frames[0];
    CHECK(f.depth.height == 24);
    CHECK(f.depth.width == 32);
    for (double d : f.depth.data) CHECK(d == 2.0 * scene.intrinsics.depth_scale);
    for (auto l : f.labels.labels) CHECK(l == 2);
    CHECK(f.rgb.at(3, 3, 0) == scene.palette.labels[2].color[0] / 255.0);
    CHECK(f.rgb.timestamp_us == scene.start_us);
    CHECK(f.depth.timestamp_us == scene.start_us + scene.depth_offset_us);
}

TEST_CASE("synthetic geometry is exact under the pinhole model")
{
    auto scene = make_room_scene(40, 32);
    scene.quantize_depth = false;
    const auto seq = synth_generate(scene, 4, 3);
    std::size_t checked = 0;
    for (const auto& f : seq.frames) {
        auto pts = mapping::backproject(f.depth, f.labels, scene.intrinsics, 1);
        mapping::transform_to_world(pts, f.pose);
        for (const auto& p : pts) {
            CHECK(surface_distance(scene, p.position) <= 1e-9);
            ++checked;
        }
    }
    CHECK(checked == 4u * 40 * 32);
}

TEST_CASE("synthetic sequences are deterministic and timed")
{
    auto scene = make_room_scene();
    scene.rgb_noise = 0.02;
    const auto a = synth_generate(scene, 5, 11);
    const auto b = synth_generate(scene, 5, 11);
    const auto c = synth_generate(scene, 5, 12);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(a.frames[i].rgb == b.frames[i].rgb);
        CHECK(a.frames[i].depth == b.frames[i].depth);
        CHECK(a.frames[i].labels == b.frames[i].labels);
    }
    CHECK_FALSE(a.frames[0].rgb == c.frames[0].rgb);
    CHECK(a.frames[1].rgb.timestamp_us - a.frames[0].rgb.timestamp_us == 33'333);
    CHECK(a.groundtruth.size() == 5);
    CHECK((a.groundtruth[0].translation - scene.path.start).norm() <= 1e-12);
    CHECK((a.groundtruth[4].translation - scene.path.end).norm() <= 1e-12);

    std::set<std::uint16_t> seen;
    for (const auto& f : a.frames) seen.insert(f.labels.labels.begin(), f.labels.labels.end());
    CHECK(seen.size() == scene.label_count());
}

TEST_CASE("oracle map voxels lie on scene surfaces")
{
    const auto scene = make_room_scene();
    const auto seq = synth_generate(scene, 3, 0);
    mapping::MapConfig cfg;
    cfg.label_count = scene.label_count();
    const mapping::SemanticOctree keys(cfg);
    const auto oracle = oracle_map(seq, scene, cfg, 2);
    CHECK(oracle.size() > 100);
    for (const auto& [key, label] : oracle) {
        CHECK(surface_distance(scene, keys.center(key)) <= cfg.resolution);
        CHECK(label < scene.label_count());
    }
}

TEST_CASE("synthetic scene validation and json")
{
    auto scene = make_room_scene();
    CHECK_THROWS_AS(synth_generate(scene, 0, 0), ConfigError);
    auto outside = scene;
    outside.path.end = {5.0, 0.0, 1.0};
    CHECK_THROWS_WITH_AS(synth_generate(outside, 3, 0), doctest::Contains("degenerate camera path"), ConfigError);
    auto on_target = scene;
    on_target.path.start = on_target.path.target = {0.0, 0.0, 1.0};
    CHECK_THROWS_AS(synth_generate(on_target, 3, 0), ConfigError);
    auto in_box = scene;
    in_box.path.start = {2.0, 0.0, 0.5};
    CHECK_THROWS_AS(synth_generate(in_box, 3, 0), ConfigError);

    const auto back = scene_from_json(to_json(scene));
    CHECK(back.planes.size() == scene.planes.size());
    CHECK(back.boxes.size() == 1);
    CHECK(back.intrinsics == scene.intrinsics);
    CHECK(back.path.target == scene.path.target);
    CHECK(synth_generate(back, 2, 5).frames[1].depth == synth_generate(scene, 2, 5).frames[1].depth);

    auto bad = to_json(scene);
    bad["boxes"][0]["label"] = 9;
    CHECK_THROWS_AS(scene_from_json(bad), ConfigError);
}

TEST_CASE("bilinear resize")
{
    ImageFrame img(2, 2, 1);
    img.at(0, 0) = 0.0;
    img.at(0, 1) = 1.0;
    img.at(1, 0) = 2.0;
    img.at(1, 1) = 3.0;
    const auto big = resize_image(img, 4, 4);
    CHECK(big.at(0, 0) == 0.0);
    CHECK(big.at(0, 1) == doctest::Approx(0.25));
    CHECK(big.at(1, 1) == doctest::Approx(0.75));
    CHECK(big.at(3, 3) == 3.0);

    ImageFrame flat(6, 8, 3, 77, 0.4);
    const auto small = resize_image(flat, 3, 4);
    CHECK(small.timestamp_us == 77);
    for (double v : small.data) CHECK(v == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(resize_image(img, 2, 2) == img);
    CHECK_THROWS_AS(resize_image(img, 0, 2), ConfigError);
}
