#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semcomm/cli/run_config.h"
#include "semcomm/codec/model.h"
#include "semcomm/dataio/synthetic.h"
#include "semcomm/mapping/octree.h"
#include "semcomm/transport/session.h"

namespace semcomm::cli {

// Frames an edge device would capture, plus what the cloud needs to map them.
struct InputFrames {
    std::vector<ImageFrame> rgb;  // resampled to the codec resolution
    std::vector<ImageFrame> depth;
    Trajectory poses;
    mapping::CameraIntrinsics intrinsics;
    mapping::LabelPalette palette;
    std::optional<dataio::SyntheticScene> scene;
    std::optional<dataio::SyntheticSequence> sequence;

    // rgb and depth merged by capture time, rgb first on equal timestamps.
    std::vector<transport::SourceFrame> source_frames() const;
};

InputFrames load_input(const RunConfig& config, int codec_height, int codec_width);

// Loads the checkpoint and applies the --mode override.
codec::CodecModel load_model(const RunConfig& config, const std::string& path);

// Raw f64 dump of reconstructed frames: per frame i64 timestamp, u32 height,
// width and channels, then the values, all little-endian.
void write_reconstructions(const std::filesystem::path& path, const std::vector<ImageFrame>& frames);
std::vector<ImageFrame> read_reconstructions(const std::filesystem::path& path);

struct OracleAgreement {
    std::size_t voxels = 0;
    std::size_t matching = 0;
    double fraction = 0.0;
};
OracleAgreement oracle_agreement(const mapping::SemanticOctree& map,
                                 const std::map<mapping::VoxelKey, std::uint16_t>& oracle);
// Largest |sum(prob) - 1| over all voxels.
double probability_sum_error(const mapping::SemanticOctree& map);

// Each command validates its flags first, writes its artifacts under
// config.out and returns the report it prints.
nlohmann::json cmd_train(const RunConfig& config);
nlohmann::json cmd_simulate(const RunConfig& config);
nlohmann::json cmd_ablate_snr(const RunConfig& config);
nlohmann::json cmd_eval_traj(const RunConfig& config);
nlohmann::json cmd_edge(const RunConfig& config);
nlohmann::json cmd_cloud(const RunConfig& config);

// Parses argv, dispatches and maps failures to exit codes: 0 success,
// 1 runtime failure, 2 configuration error.
int run_cli(int argc, char** argv);

}  // namespace semcomm::cli
