#include "semcomm/mapping/segmenter.h"

#include <cmath>
#include <limits>

#include "semcomm/core/errors.h"

namespace semcomm::mapping {
namespace {

// Hue-spaced saturated colors; the first few are fixed for readability.
std::array<std::uint8_t, 3> default_color(std::size_t i)
{
    static const std::array<std::array<std::uint8_t, 3>, 8> fixed{{{200, 40, 40},
                                                                   {230, 200, 40},
                                                                   {130, 60, 170},
                                                                   {40, 160, 60},
                                                                   {40, 90, 200},
                                                                   {240, 130, 30},
                                                                   {30, 190, 190},
                                                                   {150, 150, 150}}};
    if (i < fixed.size()) return fixed[i];
    const double h = std::fmod(static_cast<double>(i) * 0.618033988749895, 1.0) * 6.0;
    const double f = h - std::floor(h);
    const double v = 0.9, s = 0.8, p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double r = v, g = t, b = p;
    switch (static_cast<int>(h)) {
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        case 5: r = v; g = p; b = q; break;
        default: break;
    }
    auto to8 = [](double x) { return static_cast<std::uint8_t>(std::lround(x * 255.0)); };
    return {to8(r), to8(g), to8(b)};
}

}  // namespace

LabelPalette LabelPalette::make_default(std::size_t count)
{
    LabelPalette p;
    for (std::size_t i = 0; i < count; ++i) p.labels.push_back({"label" + std::to_string(i), default_color(i)});
    return p;
}

nlohmann::json to_json(const LabelPalette& palette)
{
    nlohmann::json labels = nlohmann::json::array();
    for (std::size_t i = 0; i < palette.labels.size(); ++i) {
        const auto& l = palette.labels[i];
        labels.push_back({{"id", i}, {"name", l.name}, {"color", {l.color[0], l.color[1], l.color[2]}}});
    }
    return {{"labels", labels}};
}

LabelPalette palette_from_json(const nlohmann::json& j)
{
    LabelPalette p;
    try {
        const auto& labels = j.at("labels");
        p.labels.resize(labels.size());
        for (const auto& l : labels) {
            const auto id = l.at("id").get<std::size_t>();
            if (id >= labels.size()) throw ConfigError("palette label id " + std::to_string(id) + " out of range");
            p.labels[id].name = l.value("name", "label" + std::to_string(id));
            const auto c = l.at("color").get<std::vector<int>>();
            if (c.size() != 3) throw ConfigError("palette color must have 3 components");
            for (int k = 0; k < 3; ++k) p.labels[id].color[k] = static_cast<std::uint8_t>(c[k]);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("palette: ") + e.what());
    }
    return p;
}

PaletteSegmenter::PaletteSegmenter(LabelPalette palette) : palette_(std::move(palette))
{
    if (palette_.labels.empty()) throw ConfigError("segmenter palette is empty");
}

LabelImage PaletteSegmenter::segment(const ImageFrame& rgb) const
{
    if (rgb.channels != 3) throw ConfigError("segmenter expects an RGB frame");
    std::vector<std::array<double, 3>> refs;
    for (const auto& l : palette_.labels) refs.push_back({l.color[0] / 255.0, l.color[1] / 255.0, l.color[2] / 255.0});

    LabelImage out(rgb.height, rgb.width);
    for (int y = 0; y < rgb.height; ++y) {
        for (int x = 0; x < rgb.width; ++x) {
            double best = std::numeric_limits<double>::infinity();
            std::uint16_t best_id = 0;
            for (std::size_t k = 0; k < refs.size(); ++k) {
                double d = 0.0;
                for (int c = 0; c < 3; ++c) {
                    const double diff = rgb.at(y, x, c) - refs[k][c];
                    d += diff * diff;
                }
                if (d < best) {
                    best = d;
                    best_id = static_cast<std::uint16_t>(k);
                }
            }
            out.at(y, x) = best_id;
        }
    }
    return out;
}

}  // namespace semcomm::mapping
