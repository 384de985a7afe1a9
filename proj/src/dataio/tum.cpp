#include "semcomm/dataio/tum.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "semcomm/core/errors.h"
#include "semcomm/dataio/image_io.h"
#include "semcomm/metrics/trajectory.h"

namespace semcomm::dataio {
namespace {

std::ifstream open_required(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("missing TUM file: " + path.string());
    return in;
}

}  // namespace

ImageFrame TumSequence::load(const TumEntry& entry) const
{
    ImageFrame f = image_read(base_dir / entry.path);
    f.timestamp_us = seconds_to_us(entry.timestamp);
    return f;
}

std::vector<TumEntry> parse_tum_index(std::istream& in, const std::string& source)
{
    std::vector<TumEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        TumEntry e;
        std::string extra;
        if (!(ls >> e.timestamp >> e.path) || (ls >> extra) || !std::isfinite(e.timestamp)) {
            spdlog::warn("{}:{}: malformed index line skipped", source, lineno);
            continue;
        }
        out.push_back(std::move(e));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const TumEntry& a, const TumEntry& b) { return a.timestamp < b.timestamp; });
    return out;
}

TumSequence tum_load(const std::filesystem::path& dir)
{
    TumSequence seq;
    seq.base_dir = dir;
    for (auto [name, target] : {std::pair{"rgb.txt", &seq.rgb}, std::pair{"depth.txt", &seq.depth}}) {
        auto in = open_required(dir / name);
        *target = parse_tum_index(in, (dir / name).string());
        for (const auto& e : *target) {
            if (!std::filesystem::exists(dir / e.path)) throw IoError("listed image missing: " + (dir / e.path).string());
        }
    }
    auto gt = open_required(dir / "groundtruth.txt");
    seq.groundtruth = metrics::parse_tum_trajectory(gt, (dir / "groundtruth.txt").string(), false);
    return seq;
}

}  // namespace semcomm::dataio
