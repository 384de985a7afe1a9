#include "semcomm/cli/run_config.h"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include "semcomm/core/errors.h"

namespace semcomm::cli {
namespace {

template <typename T>
std::function<void(RunConfig&, const nlohmann::json&)> setter(T RunConfig::*field)
{
    return [field](RunConfig& c, const nlohmann::json& v) { c.*field = v.get<T>(); };
}

template <typename T>
std::function<void(nlohmann::json&, const RunConfig&)> getter(T RunConfig::*field)
{
    return [field](nlohmann::json& j, const RunConfig& c) { j = c.*field; };
}

struct Field {
    std::function<void(RunConfig&, const nlohmann::json&)> set;
    std::function<void(nlohmann::json&, const RunConfig&)> get;
};

template <typename T>
Field field(T RunConfig::*member)
{
    return {setter(member), getter(member)};
}

const std::map<std::string, Field>& fields()
{
    static const std::map<std::string, Field> table{
        {"subcommand", field(&RunConfig::subcommand)},
        {"checkpoint", field(&RunConfig::checkpoint)},
        {"attention_checkpoints", field(&RunConfig::attention_checkpoints)},
        {"baseline_checkpoints", field(&RunConfig::baseline_checkpoints)},
        {"dataset", field(&RunConfig::dataset)},
        {"scene", field(&RunConfig::scene)},
        {"frames", field(&RunConfig::frames)},
        {"snr_db", field(&RunConfig::snr_db)},
        {"snr_lo_db", field(&RunConfig::snr_lo_db)},
        {"snr_hi_db", field(&RunConfig::snr_hi_db)},
        {"mode", field(&RunConfig::mode)},
        {"attention", field(&RunConfig::attention)},
        {"seed", field(&RunConfig::seed)},
        {"out", field(&RunConfig::out)},
        {"target", field(&RunConfig::target)},
        {"timeout_ms", field(&RunConfig::timeout_ms)},
        {"retries", field(&RunConfig::retries)},
        {"retry_delay_ms", field(&RunConfig::retry_delay_ms)},
        {"sync", field(&RunConfig::sync)},
        {"resolution", field(&RunConfig::resolution)},
        {"stride", field(&RunConfig::stride)},
        {"hit_prob", field(&RunConfig::hit_prob)},
        {"align_tol_us", field(&RunConfig::align_tol_us)},
        {"pose_tol_s", field(&RunConfig::pose_tol_s)},
        {"poses", field(&RunConfig::poses)},
        {"width", field(&RunConfig::width)},
        {"height", field(&RunConfig::height)},
        {"epochs", field(&RunConfig::epochs)},
        {"batch_size", field(&RunConfig::batch_size)},
        {"lr", field(&RunConfig::lr)},
        {"codebook_size", field(&RunConfig::codebook_size)},
        {"channel_dim", field(&RunConfig::channel_dim)},
        {"channel_plan", field(&RunConfig::channel_plan)},
        {"est", field(&RunConfig::est)},
        {"ref", field(&RunConfig::ref)},
        {"delta", field(&RunConfig::delta)},
        {"traj_tol_s", field(&RunConfig::traj_tol_s)},
        {"snr_grid", field(&RunConfig::snr_grid)},
        {"eval_seeds", field(&RunConfig::eval_seeds)},
    };
    return table;
}

void require(bool ok, const std::string& message)
{
    if (!ok) throw ConfigError(message);
}

void require_file(const std::string& path, const std::string& what)
{
    require(!path.empty(), what + " is required");
    require(std::filesystem::exists(path), what + " not found: " + path);
}

void validate_input(const RunConfig& c)
{
    require(c.dataset.empty() || c.scene.empty(), "--dataset and --scene are mutually exclusive");
    if (!c.dataset.empty()) require(std::filesystem::is_directory(c.dataset), "dataset directory not found: " + c.dataset);
    if (!c.scene.empty()) require_file(c.scene, "scene file");
    if (!c.poses.empty()) require_file(c.poses, "pose file");
    require(c.frames >= 1, "--frames must be at least 1");
}

void validate_mapping(const RunConfig& c)
{
    require(c.resolution > 0.0, "--resolution must be positive");
    require(c.stride >= 1, "--stride must be at least 1");
    require(c.hit_prob > 0.5 && c.hit_prob < 1.0, "--hit-prob must lie in (0.5, 1)");
    require(c.align_tol_us >= 0, "--align-tol-us must be nonnegative");
    require(c.pose_tol_s >= 0.0, "--pose-tol must be nonnegative");
}

void validate_mode(const RunConfig& c)
{
    require(c.mode.empty() || c.mode == "analog" || c.mode == "digital", "--mode must be analog or digital");
}

}  // namespace

void apply_json(RunConfig& config, const nlohmann::json& j)
{
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        const auto it = fields().find(key);
        if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
        try {
            it->second.set(config, value);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

RunConfig load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    RunConfig c;
    apply_json(c, j);
    return c;
}

nlohmann::json to_json(const RunConfig& config)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, f] : fields()) f.get(j[key], config);
    return j;
}

void validate(const RunConfig& c)
{
    const auto& s = c.subcommand;
    validate_mode(c);
    if (s == "train") {
        validate_input(c);
        require(c.snr_lo_db <= c.snr_hi_db, "--snr-range must have lo <= hi");
        require(c.epochs >= 1, "--epochs must be at least 1");
        require(c.batch_size >= 1, "--batch-size must be at least 1");
        require(c.lr > 0.0, "--lr must be positive");
        require(c.width % 16 == 0 && c.height % 16 == 0 && c.width > 0 && c.height > 0,
                "--width and --height must be positive multiples of 16");
    } else if (s == "simulate") {
        require_file(c.checkpoint, "checkpoint");
        validate_input(c);
        validate_mapping(c);
    } else if (s == "ablate-snr") {
        require(!c.attention_checkpoints.empty(), "--attention-ckpt is required");
        require(!c.baseline_checkpoints.empty(), "--baseline-ckpt is required");
        for (const auto& p : c.attention_checkpoints) require_file(p, "checkpoint");
        for (const auto& p : c.baseline_checkpoints) require_file(p, "checkpoint");
        validate_input(c);
        require(!c.snr_grid.empty(), "--snr-grid must not be empty");
        require(c.eval_seeds >= 1, "--eval-seeds must be at least 1");
    } else if (s == "eval-traj") {
        require_file(c.est, "--est trajectory");
        require_file(c.ref, "--ref trajectory");
        require(c.delta >= 1, "--delta must be at least 1");
        require(c.traj_tol_s >= 0.0, "--tol must be nonnegative");
    } else if (s == "edge" || s == "cloud") {
        require_file(c.checkpoint, "checkpoint");
        require(!c.target.empty(), "--target is required");
        validate_input(c);
        if (s == "cloud") validate_mapping(c);
        require(c.timeout_ms > 0, "--timeout-ms must be positive");
        require(c.retries >= 1, "--retries must be at least 1");
    } else {
        throw ConfigError("unknown subcommand '" + s + "'");
    }
}

}  // namespace semcomm::cli
