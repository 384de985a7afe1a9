#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "semcomm/cli/commands.h"
#include "semcomm/core/errors.h"
#include "semcomm/core/files.h"
#include "semcomm/metrics/trajectory.h"
#include "semcomm/codec/model.h"

using namespace semcomm;
using namespace semcomm::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "semcomm_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(std::vector<std::string> args)
{
    args.insert(args.begin(), "semcomm");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(int(argv.size()), argv.data());
}

fs::path small_checkpoint(const fs::path& dir)
{
    codec::CodecConfig c;
    c.height = 32;
    c.width = 48;
    c.channel_plan = {3, 4, 6, 6, 5};
    c.codebook_size = 8;
    c.channel_dim = 4;
    c.mode = codec::TransmissionMode::digital;
    auto model = codec::CodecModel::create(c, 3);
    model.seed_running_stats();
    const auto path = dir / "model.ckpt";
    model.save(path);
    return path;
}

Trajectory square_path()
{
    Trajectory t;
    for (int i = 0; i < 8; ++i) {
        Pose p;
        p.timestamp = 0.5 * i;
        p.translation = Eigen::Vector3d(std::cos(0.7 * i), std::sin(0.7 * i), 0.1 * i);
        p.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(0.3 * i, Eigen::Vector3d::UnitZ()));
        t.push_back(p);
    }
    return t;
}

}  // namespace

TEST_CASE("config json sets known keys and rejects the rest")
{
    RunConfig c;
    apply_json(c, {{"snr_db", 7.5}, {"frames", 3}, {"mode", "analog"}, {"channel_plan", {3, 8, 8, 8, 8}},
                   {"sync", false}, {"align_tol_us", 1500}});
    CHECK(c.snr_db == 7.5);
    CHECK(c.frames == 3);
    CHECK(c.mode == "analog");
    CHECK(c.channel_plan == std::vector<int>{3, 8, 8, 8, 8});
    CHECK_FALSE(c.sync);
    CHECK(c.align_tol_us == 1500);

    CHECK_THROWS_AS(apply_json(c, {{"snr", 3.0}}), ConfigError);
    CHECK_THROWS_AS(apply_json(c, {{"frames", "ten"}}), ConfigError);
    CHECK_THROWS_AS(apply_json(c, nlohmann::json::array()), ConfigError);

    RunConfig back;
    apply_json(back, to_json(c));
    CHECK(to_json(back) == to_json(c));
}

TEST_CASE("config file round trip and errors")
{
    const auto dir = scratch("config");
    {
        std::ofstream f(dir / "run.json");
        f << R"({"seed": 11, "resolution": 0.1})";
    }
    const auto c = load_config_file((dir / "run.json").string());
    CHECK(c.seed == 11);
    CHECK(c.resolution == 0.1);
    {
        std::ofstream f(dir / "broken.json");
        f << "{\"seed\": ";
    }
    CHECK_THROWS_AS(load_config_file((dir / "broken.json").string()), ConfigError);
    CHECK_THROWS(load_config_file((dir / "absent.json").string()));
}

TEST_CASE("validate names the missing flag")
{
    RunConfig c;
    c.subcommand = "simulate";
    CHECK_THROWS_AS(validate(c), ConfigError);
    c.subcommand = "eval-traj";
    CHECK_THROWS_AS(validate(c), ConfigError);
    c.subcommand = "edge";
    c.checkpoint = "x.ckpt";
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("exit codes")
{
    const auto dir = scratch("exit");
    CHECK(run({"--help"}) == 0);
    CHECK(run({"simulate", "--bogus-flag"}) == 2);
    CHECK(run({"simulate", "--checkpoint", (dir / "missing.ckpt").string(), "--out", dir.string()}) == 2);
    CHECK(run({"eval-traj", "--est", (dir / "missing.txt").string(), "--ref", (dir / "missing.txt").string()}) != 0);
    {
        std::ofstream f(dir / "unknown.json");
        f << R"({"not_a_flag": 1})";
    }
    CHECK(run({"simulate", "--config", (dir / "unknown.json").string()}) == 2);
}

TEST_CASE("eval-traj on a rigidly moved copy")
{
    const auto dir = scratch("traj");
    const auto ref = square_path();
    Eigen::Isometry3d g = Eigen::Isometry3d::Identity();
    g.linear() = Eigen::AngleAxisd(1.1, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    g.translation() = Eigen::Vector3d(4, -2, 1);
    Trajectory est;
    for (const auto& p : ref.poses()) est.push_back(Pose::from_transform(p.timestamp, g * p.transform()));
    {
        std::ofstream r(dir / "ref.txt"), e(dir / "est.txt");
        metrics::write_tum_trajectory(r, ref);
        metrics::write_tum_trajectory(e, est);
    }
    RunConfig c;
    c.subcommand = "eval-traj";
    c.est = (dir / "est.txt").string();
    c.ref = (dir / "ref.txt").string();
    c.out = dir.string();
    const auto report = cmd_eval_traj(c);
    CHECK(report["ate"]["rmse"].get<double>() < 1e-6);
    CHECK(report["rpe"]["rmse"].get<double>() < 1e-6);
    CHECK(run({"eval-traj", "--est", c.est, "--ref", c.ref}) == 0);
}

TEST_CASE("edge to cloud through a file matches simulate")
{
    const auto dir = scratch("file_transport");
    const auto ckpt = small_checkpoint(dir);
    auto base = [&](const std::string& sub, const std::string& out) {
        RunConfig c;
        c.subcommand = sub;
        c.checkpoint = ckpt.string();
        c.frames = 4;
        c.seed = 5;
        c.out = (dir / out).string();
        c.target = "file:" + (dir / "stream.bin").string();
        return c;
    };
    const auto sim = cmd_simulate(base("simulate", "sim"));
    const auto edge = cmd_edge(base("edge", "edge"));
    const auto cloud = cmd_cloud(base("cloud", "cloud"));

    CHECK(edge["edge"]["bytes_sent"] == cloud["cloud"]["bytes_received"]);
    CHECK(fs::file_size(dir / "stream.bin") == edge["edge"]["bytes_sent"].get<std::uintmax_t>());
    CHECK(cloud["cloud"]["sync_verified"].get<bool>());
    CHECK(cloud["cloud"]["pairs"] == 4);
    CHECK(read_file(dir / "sim" / "reconstructions.bin") == read_file(dir / "cloud" / "reconstructions.bin"));
    CHECK(read_file(dir / "sim" / "map.ply") == read_file(dir / "cloud" / "map.ply"));
    CHECK(sim["map"]["probability_sum_error"].get<double>() <= 1e-9);
    CHECK(read_reconstructions(dir / "sim" / "reconstructions.bin").size() == 4);
    CHECK(fs::exists(dir / "edge" / "edge_stats.json"));
    CHECK(fs::exists(dir / "cloud" / "cloud_stats.json"));
    CHECK(fs::exists(dir / "sim" / "metrics.json"));
}

TEST_CASE("reconstruction dump round trip")
{
    const auto dir = scratch("recon");
    ImageFrame a(2, 3, 3), b(1, 1, 1);
    a.timestamp_us = -5;
    b.timestamp_us = 1'000'000'000'000;
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] = 0.1 * double(i) - 0.3;
    b.data[0] = 0.25;
    write_reconstructions(dir / "r.bin", {a, b});
    const auto back = read_reconstructions(dir / "r.bin");
    REQUIRE(back.size() == 2);
    CHECK(back[0].timestamp_us == -5);
    CHECK(back[0].data == a.data);
    CHECK(back[1].timestamp_us == b.timestamp_us);
    CHECK(back[1].channels == 1);

    auto bytes = read_file(dir / "r.bin");
    bytes.resize(bytes.size() - 3);
    write_file(dir / "short.bin", bytes);
    CHECK_THROWS(read_reconstructions(dir / "short.bin"));
}
