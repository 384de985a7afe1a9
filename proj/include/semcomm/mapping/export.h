#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "semcomm/mapping/octree.h"
#include "semcomm/mapping/segmenter.h"

namespace semcomm::mapping {

struct MapVertex {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    std::uint16_t label = 0;
    double probability = 0.0;
    std::array<std::uint8_t, 3> color{};
};

// One vertex per voxel center in Morton order with its most likely label and
// that label's probability.
std::vector<MapVertex> map_vertices(const SemanticOctree& map, const LabelPalette& palette);

// ASCII PLY: x y z label probability red green blue.
void write_ply(std::ostream& out, const std::vector<MapVertex>& vertices);
std::vector<MapVertex> read_ply(std::istream& in);

// Writes <path> and the label-color sidecar <path>.labels.json. Throws
// IoError when either file cannot be written.
void export_map(const SemanticOctree& map, const LabelPalette& palette, const std::filesystem::path& path);
std::vector<MapVertex> import_map(const std::filesystem::path& path);

}  // namespace semcomm::mapping
