#include <cstring>
#include <iostream>

#include <CLI11.hpp>

#include "semcomm/cli/commands.h"
#include "semcomm/core/errors.h"
#include "semcomm/core/logging.h"

namespace semcomm::cli {
namespace {

// The config file supplies defaults, so it is read before the flags bind.
std::string config_path(int argc, char** argv)
{
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) return argv[i + 1];
        if (std::strncmp(argv[i], "--config=", 9) == 0) return argv[i] + 9;
    }
    return {};
}

struct Extras {
    std::string attention;
    std::vector<double> snr_range;
    bool no_sync = false;
};

void add_common(CLI::App& sub, RunConfig& c, std::string& config_file)
{
    sub.add_option("--config", config_file, "JSON file mirroring these flags");
    sub.add_option("--seed", c.seed, "Seed for data, noise and training draws");
    sub.add_option("--out", c.out, "Output directory");
}

void add_input(CLI::App& sub, RunConfig& c)
{
    sub.add_option("--dataset", c.dataset, "TUM RGB-D sequence directory");
    sub.add_option("--scene", c.scene, "Synthetic scene JSON (default: built-in room)");
    sub.add_option("--frames", c.frames, "Number of frames to use");
}

void add_mapping(CLI::App& sub, RunConfig& c)
{
    sub.add_option("--resolution", c.resolution, "Voxel edge length in meters");
    sub.add_option("--stride", c.stride, "Pixel stride for backprojection");
    sub.add_option("--hit-prob", c.hit_prob, "Label observation likelihood p");
    sub.add_option("--align-tol-us", c.align_tol_us, "RGB/depth pairing tolerance in microseconds");
    sub.add_option("--pose-tol", c.pose_tol_s, "Pose lookup tolerance in seconds");
    sub.add_option("--poses", c.poses, "TUM trajectory with camera poses");
}

void add_codec_use(CLI::App& sub, RunConfig& c, Extras& x)
{
    sub.add_option("--checkpoint", c.checkpoint, "Codec checkpoint");
    sub.add_option("--snr", c.snr_db, "Channel SNR in dB");
    sub.add_option("--mode", c.mode, "analog or digital (default: the checkpoint's)");
    sub.add_flag("--no-sync", x.no_sync, "Do not send or require the codebook digest");
}

}  // namespace

int run_cli(int argc, char** argv)
{
    init_logging();
    RunConfig c;
    Extras x;
    std::string config_file;
    try {
        const auto path = config_path(argc, argv);
        if (!path.empty()) c = load_config_file(path);
    } catch (const ConfigError& e) {
        std::cerr << "semcomm: " << e.what() << '\n';
        return 2;
    }

    CLI::App app{"Semantic communication for RGB-D semantic mapping"};
    app.require_subcommand(1);

    auto* train = app.add_subcommand("train", "Train the codec and write a checkpoint");
    add_common(*train, c, config_file);
    add_input(*train, c);
    train->add_option("--checkpoint", c.checkpoint, "Output checkpoint (default: <out>/model.ckpt)");
    train->add_option("--snr-range", x.snr_range, "Training SNR range lo hi in dB")->expected(2);
    train->add_option("--mode", c.mode, "analog or digital");
    train->add_option("--attention", x.attention, "on or off")->check(CLI::IsMember({"on", "off"}));
    train->add_option("--width", c.width, "Image width (multiple of 16)");
    train->add_option("--height", c.height, "Image height (multiple of 16)");
    train->add_option("--epochs", c.epochs, "Training epochs");
    train->add_option("--batch-size", c.batch_size, "Images per step");
    train->add_option("--lr", c.lr, "Adam learning rate");
    train->add_option("--codebook-size", c.codebook_size, "Codebook entries K");
    train->add_option("--channel-dim", c.channel_dim, "Analog symbols per latent cell");
    train->add_option("--channel-plan", c.channel_plan, "Encoder widths, last is the embedding size");

    auto* simulate = app.add_subcommand("simulate", "Run edge and cloud in one process");
    add_common(*simulate, c, config_file);
    add_input(*simulate, c);
    add_codec_use(*simulate, c, x);
    add_mapping(*simulate, c);

    auto* ablate = app.add_subcommand("ablate-snr", "PSNR sweep over SNR for both model variants");
    add_common(*ablate, c, config_file);
    add_input(*ablate, c);
    ablate->add_option("--attention-ckpt", c.attention_checkpoints, "Checkpoints with attention");
    ablate->add_option("--baseline-ckpt", c.baseline_checkpoints, "Checkpoints without attention");
    ablate->add_option("--snr-grid", c.snr_grid, "SNR values in dB");
    ablate->add_option("--eval-seeds", c.eval_seeds, "Channel noise draws per image");

    auto* traj = app.add_subcommand("eval-traj", "ATE and RPE of an estimated trajectory");
    traj->add_option("--config", config_file, "JSON file mirroring these flags");
    traj->add_option("--est", c.est, "Estimated trajectory (TUM format)");
    traj->add_option("--ref", c.ref, "Reference trajectory (TUM format)");
    traj->add_option("--delta", c.delta, "RPE frame interval");
    traj->add_option("--tol", c.traj_tol_s, "Timestamp association tolerance in seconds");

    auto* edge = app.add_subcommand("edge", "Encode frames and send them to a cloud endpoint");
    add_common(*edge, c, config_file);
    add_input(*edge, c);
    add_codec_use(*edge, c, x);
    edge->add_option("--target", c.target, "file:<path> | pipe:- | pipe:<fifo> | tcp:<host>:<port>");
    edge->add_option("--retries", c.retries, "Connection attempts");
    edge->add_option("--retry-delay-ms", c.retry_delay_ms, "Delay between connection attempts");

    auto* cloud = app.add_subcommand("cloud", "Receive frames and build the semantic map");
    add_common(*cloud, c, config_file);
    add_input(*cloud, c);
    add_codec_use(*cloud, c, x);
    add_mapping(*cloud, c);
    cloud->add_option("--target", c.target, "file:<path> | pipe:- | pipe:<fifo> | tcp:<host>:<port>");
    cloud->add_option("--timeout-ms", c.timeout_ms, "Wait for a connection and for each read");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    c.subcommand = app.get_subcommands().front()->get_name();
    if (!x.attention.empty()) c.attention = x.attention == "on";
    if (x.snr_range.size() == 2) {
        c.snr_lo_db = x.snr_range[0];
        c.snr_hi_db = x.snr_range[1];
    }
    if (x.no_sync) c.sync = false;

    try {
        nlohmann::json report;
        if (c.subcommand == "train") report = cmd_train(c);
        else if (c.subcommand == "simulate") report = cmd_simulate(c);
        else if (c.subcommand == "ablate-snr") report = cmd_ablate_snr(c);
        else if (c.subcommand == "eval-traj") report = cmd_eval_traj(c);
        else if (c.subcommand == "edge") report = cmd_edge(c);
        else report = cmd_cloud(c);
        // stdout may be carrying the wire stream.
        auto& out = c.target == "pipe:-" && c.subcommand == "edge" ? std::cerr : std::cout;
        out << report.dump(2) << '\n';
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "semcomm " << c.subcommand << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "semcomm " << c.subcommand << ": " << e.what() << '\n';
        return 1;
    }
}

}  // namespace semcomm::cli
