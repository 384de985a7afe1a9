#include "semcomm/mapping/export.h"

#include <fstream>
#include <sstream>

#include "semcomm/core/errors.h"

namespace semcomm::mapping {

std::vector<MapVertex> map_vertices(const SemanticOctree& map, const LabelPalette& palette)
{
    std::vector<MapVertex> out;
    out.reserve(map.size());
    for (const auto key : map.sorted_keys()) {
        const Voxel& v = *map.find(key);
        MapVertex m;
        m.position = map.center(key);
        const auto best = v.best_label();
        m.label = static_cast<std::uint16_t>(best);
        m.probability = v.prob[best];
        if (best < palette.size()) m.color = palette.labels[best].color;
        out.push_back(m);
    }
    return out;
}

void write_ply(std::ostream& out, const std::vector<MapVertex>& vertices)
{
    out << "ply\nformat ascii 1.0\ncomment semantic voxel map\n"
        << "element vertex " << vertices.size() << '\n'
        << "property double x\nproperty double y\nproperty double z\n"
        << "property ushort label\nproperty double probability\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        << "end_header\n";
    const auto old = out.precision(17);
    for (const auto& v : vertices) {
        out << v.position.x() << ' ' << v.position.y() << ' ' << v.position.z() << ' ' << v.label << ' '
            << v.probability << ' ' << int(v.color[0]) << ' ' << int(v.color[1]) << ' ' << int(v.color[2]) << '\n';
    }
    out.precision(old);
}

std::vector<MapVertex> read_ply(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "ply") throw IoError("not a PLY file");
    std::size_t count = 0;
    bool have_count = false;
    while (std::getline(in, line)) {
        if (line == "end_header") break;
        std::istringstream ls(line);
        std::string word, element;
        ls >> word;
        if (word == "format" && line != "format ascii 1.0") throw IoError("only ASCII PLY is supported");
        if (word == "element" && (ls >> element) && element == "vertex") have_count = static_cast<bool>(ls >> count);
    }
    if (line != "end_header" || !have_count) throw IoError("malformed PLY header");

    std::vector<MapVertex> out(count);
    for (auto& v : out) {
        int r = 0, g = 0, b = 0;
        if (!(in >> v.position.x() >> v.position.y() >> v.position.z() >> v.label >> v.probability >> r >> g >> b)) {
            throw IoError("PLY vertex list is truncated");
        }
        v.color = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
    }
    return out;
}

void export_map(const SemanticOctree& map, const LabelPalette& palette, const std::filesystem::path& path)
{
    {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write map " + path.string());
        write_ply(out, map_vertices(map, palette));
        if (!out) throw IoError("failed writing map " + path.string());
    }
    const auto sidecar = path.string() + ".labels.json";
    std::ofstream side(sidecar);
    if (!side) throw IoError("cannot write " + sidecar);
    side << to_json(palette).dump(2) << '\n';
    if (!side) throw IoError("failed writing " + sidecar);
}

std::vector<MapVertex> import_map(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open map " + path.string());
    return read_ply(in);
}

}  // namespace semcomm::mapping
