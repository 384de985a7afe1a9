#include "semcomm/dataio/image_io.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "semcomm/core/errors.h"
#include "semcomm/core/files.h"

namespace semcomm::dataio {
namespace {

class HeaderReader {
public:
    HeaderReader(std::span<const std::uint8_t> bytes, const std::string& name) : b_(bytes), name_(name) {}

    // Next whitespace-delimited decimal token, skipping '#' comments.
    long number()
    {
        skip_space();
        std::size_t start = pos_;
        long v = 0;
        while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
            v = v * 10 + (b_[pos_] - '0');
            if (v > 1'000'000) throw IoError(name_ + ": header value out of range");
            ++pos_;
        }
        if (pos_ == start) throw IoError(name_ + ": malformed image header");
        return v;
    }

    // Exactly one whitespace byte separates the header from the raster.
    std::size_t raster_start()
    {
        if (pos_ >= b_.size() || !std::isspace(b_[pos_])) throw IoError(name_ + ": malformed image header");
        return pos_ + 1;
    }

private:
    void skip_space()
    {
        while (pos_ < b_.size()) {
            if (b_[pos_] == '#') {
                while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
            } else if (std::isspace(b_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> b_;
    const std::string& name_;
    std::size_t pos_ = 2;
};

}  // namespace

std::uint8_t quantize_unit(double v)
{
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

ImageFrame decode_image(std::span<const std::uint8_t> bytes, const std::string& name)
{
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5')) {
        throw IoError(name + ": unsupported format, convert to PPM/PGM");
    }
    const bool rgb = bytes[1] == '6';
    HeaderReader h(bytes, name);
    const long width = h.number(), height = h.number(), maxval = h.number();
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) throw IoError(name + ": invalid image header");
    if (rgb && maxval > 255) throw IoError(name + ": only 8-bit PPM is supported");
    const std::size_t start = h.raster_start();
    const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
    const std::size_t channels = rgb ? 3 : 1;
    const std::size_t need = static_cast<std::size_t>(width) * height * channels * sample_bytes;
    if (bytes.size() - start < need) throw IoError(name + ": truncated image data");

    ImageFrame f(static_cast<int>(height), static_cast<int>(width), static_cast<int>(channels));
    const std::uint8_t* p = bytes.data() + start;
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        const unsigned v = sample_bytes == 2 ? (unsigned(p[2 * i]) << 8 | p[2 * i + 1]) : p[i];
        f.data[i] = rgb ? v / 255.0 : static_cast<double>(v);
    }
    return f;
}

ImageFrame image_read(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    return decode_image(bytes, path.string());
}

std::vector<std::uint8_t> encode_image(const ImageFrame& frame)
{
    if (frame.channels != 1 && frame.channels != 3) {
        throw ConfigError("only 1- or 3-channel frames can be written");
    }
    const bool rgb = frame.channels == 3;
    const std::string header = std::string(rgb ? "P6\n" : "P5\n") + std::to_string(frame.width) + " " +
                               std::to_string(frame.height) + "\n" + (rgb ? "255\n" : "65535\n");
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + frame.data.size() * (rgb ? 1 : 2));
    for (double v : frame.data) {
        if (rgb) {
            out.push_back(quantize_unit(v));
        } else {
            const auto d = static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 65535.0)));
            out.push_back(static_cast<std::uint8_t>(d >> 8));
            out.push_back(static_cast<std::uint8_t>(d & 0xff));
        }
    }
    return out;
}

void image_write(const std::filesystem::path& path, const ImageFrame& frame)
{
    write_file(path, encode_image(frame));
}

ImageFrame resize_image(const ImageFrame& frame, int height, int width)
{
    if (height < 1 || width < 1) throw ConfigError("resize target must be positive");
    if (frame.height == height && frame.width == width) return frame;
    ImageFrame out(height, width, frame.channels, frame.timestamp_us);
    const double sy = static_cast<double>(frame.height) / height, sx = static_cast<double>(frame.width) / width;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, frame.height - 1.0);
        const int y0 = static_cast<int>(fy), y1 = std::min(y0 + 1, frame.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, frame.width - 1.0);
            const int x0 = static_cast<int>(fx), x1 = std::min(x0 + 1, frame.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < frame.channels; ++c) {
                const double top = (1 - wx) * frame.at(y0, x0, c) + wx * frame.at(y0, x1, c);
                const double bottom = (1 - wx) * frame.at(y1, x0, c) + wx * frame.at(y1, x1, c);
                out.at(y, x, c) = (1 - wy) * top + wy * bottom;
            }
        }
    }
    return out;
}

}  // namespace semcomm::dataio
