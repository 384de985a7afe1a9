#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "semcomm/core/image.h"
#include "semcomm/core/pose.h"

namespace semcomm::dataio {

struct TumEntry {
    double timestamp = 0.0;
    std::string path;  // relative to the sequence directory
};

struct TumSequence {
    std::filesystem::path base_dir;
    std::vector<TumEntry> rgb;
    std::vector<TumEntry> depth;
    Trajectory groundtruth;

    // Reads the frame through image_read and stamps it with the entry time.
    ImageFrame load(const TumEntry& entry) const;
};

// "timestamp path" lines with '#' comments; malformed lines are logged and
// skipped; the result is sorted by timestamp.
std::vector<TumEntry> parse_tum_index(std::istream& in, const std::string& source);

// Loads rgb.txt, depth.txt and groundtruth.txt from dir. A missing file
// raises IoError naming it. Listed image files must exist.
TumSequence tum_load(const std::filesystem::path& dir);

}  // namespace semcomm::dataio
