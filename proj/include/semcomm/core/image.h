#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace semcomm {

// H x W x C image stored interleaved (row-major, channel fastest).
// RGB frames hold values in [0, 1]; depth frames hold raw sensor units
// (e.g. 5000 per meter for TUM) in a single channel.
struct ImageFrame {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::int64_t timestamp_us = 0;
    std::vector<double> data;

    ImageFrame() = default;
    ImageFrame(int h, int w, int c, std::int64_t ts_us = 0, double fill = 0.0);

    std::size_t index(int y, int x, int c = 0) const
    {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }
    double& at(int y, int x, int c = 0) { return data[index(y, x, c)]; }
    double at(int y, int x, int c = 0) const { return data[index(y, x, c)]; }

    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
    bool same_shape(const ImageFrame& other) const
    {
        return height == other.height && width == other.width && channels == other.channels;
    }

    bool operator==(const ImageFrame&) const = default;
};

// Per-pixel semantic label ids.
struct LabelImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint16_t> labels;

    LabelImage() = default;
    LabelImage(int h, int w, std::uint16_t fill = 0)
        : height(h), width(w), labels(static_cast<std::size_t>(h) * w, fill) {}

    std::uint16_t at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    std::uint16_t& at(int y, int x) { return labels[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const LabelImage&) const = default;
};

// Timestamp helpers. Wire and frame timestamps are integer microseconds so
// that alignment ties and tolerances compare exactly.
std::int64_t seconds_to_us(double seconds);
double us_to_seconds(std::int64_t us);

}  // namespace semcomm
