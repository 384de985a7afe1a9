#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "semcomm/core/image.h"

namespace semcomm::mapping {

struct LabelInfo {
    std::string name;
    std::array<std::uint8_t, 3> color{};
};

// Label id -> name and display color. Also the reference colors of the
// nearest-color segmenter.
struct LabelPalette {
    std::vector<LabelInfo> labels;

    std::size_t size() const { return labels.size(); }
    // Well-separated colors for `count` labels named "label<i>".
    static LabelPalette make_default(std::size_t count);
};

nlohmann::json to_json(const LabelPalette& palette);
LabelPalette palette_from_json(const nlohmann::json& j);

// Labels every pixel of an RGB frame with the palette entry whose color is
// nearest in RGB; ties go to the lower id. Stands in for a learned
// segmentation network on label-colored synthetic scenes.
class PaletteSegmenter {
public:
    explicit PaletteSegmenter(LabelPalette palette);
    LabelImage segment(const ImageFrame& rgb) const;
    const LabelPalette& palette() const { return palette_; }

private:
    LabelPalette palette_;
};

}  // namespace semcomm::mapping
