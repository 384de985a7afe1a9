#include "semcomm/core/image.h"

#include <cmath>

namespace semcomm {

ImageFrame::ImageFrame(int h, int w, int c, std::int64_t ts_us, double fill)
    : height(h), width(w), channels(c), timestamp_us(ts_us),
      data(static_cast<std::size_t>(h) * w * c, fill)
{
}

std::int64_t seconds_to_us(double seconds)
{
    return std::llround(seconds * 1e6);
}

double us_to_seconds(std::int64_t us)
{
    return static_cast<double>(us) * 1e-6;
}

}  // namespace semcomm
