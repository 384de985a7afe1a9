#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace semcomm::cli {

// Every flag of every subcommand. A JSON config file uses the flag names
// (without dashes, '-' written as '_') as keys; flags given on the command
// line override it.
struct RunConfig {
    std::string subcommand;

    // Codec checkpoint: written by train, read by everything else.
    std::string checkpoint;
    // ablate-snr: checkpoints of the attention and no-attention variants.
    std::vector<std::string> attention_checkpoints;
    std::vector<std::string> baseline_checkpoints;

    // Input frames: a TUM RGB-D directory, or a synthetic scene (JSON file,
    // empty for the built-in room).
    std::string dataset;
    std::string scene;
    int frames = 10;

    double snr_db = 20.0;
    double snr_lo_db = 0.0;
    double snr_hi_db = 20.0;
    // analog | digital; empty keeps the checkpoint's mode.
    std::string mode;
    bool attention = true;
    std::uint64_t seed = 0;
    std::string out = "out";

    // file:<path> | pipe:- | pipe:<fifo> | tcp:<host>:<port>
    std::string target;
    int timeout_ms = 30'000;
    int retries = 10;
    int retry_delay_ms = 200;
    // Lead the stream with the model digest and require it on receipt.
    bool sync = true;

    // Mapping.
    double resolution = 0.05;
    int stride = 4;
    double hit_prob = 0.9;
    std::int64_t align_tol_us = 20'000;
    double pose_tol_s = 0.02;
    // TUM trajectory supplying camera poses for a TUM dataset; defaults to
    // its groundtruth.txt.
    std::string poses;

    // Training.
    int width = 64;
    int height = 48;
    int epochs = 10;
    int batch_size = 8;
    double lr = 2e-4;
    int codebook_size = 512;
    int channel_dim = 64;
    std::vector<int> channel_plan{3, 32, 64, 64, 64};

    // eval-traj.
    std::string est;
    std::string ref;
    int delta = 1;
    double traj_tol_s = 0.02;

    // ablate-snr.
    std::vector<double> snr_grid{0.0, 5.0, 10.0, 15.0, 20.0};
    int eval_seeds = 3;
};

// Keys must name RunConfig fields; unknown keys and wrong types raise
// ConfigError.
void apply_json(RunConfig& config, const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

// Checks the flags the subcommand needs before any work starts; raises
// ConfigError naming the first problem.
void validate(const RunConfig& config);

}  // namespace semcomm::cli
