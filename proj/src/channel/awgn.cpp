#include "semcomm/channel/awgn.h"

#include <cmath>
#include <string>

#include "semcomm/core/errors.h"
#include "semcomm/core/rng.h"

namespace semcomm::channel {

double average_power(std::span<const double> symbols)
{
    if (symbols.empty()) return 0.0;
    double acc = 0.0;
    for (double s : symbols) acc += s * s;
    return acc / static_cast<double>(symbols.size());
}

double snr_db_to_sigma(double snr_db, double signal_power)
{
    if (!std::isfinite(snr_db)) throw NumericError("snr_db must be finite");
    if (!(signal_power > 0.0)) {
        throw NumericError("signal power must be positive, got " + std::to_string(signal_power));
    }
    return std::sqrt(signal_power * std::pow(10.0, -snr_db / 10.0));
}

ChannelSymbols power_normalize(std::span<const double> symbols)
{
    const double p = average_power(symbols);
    if (!(p > 0.0)) throw NumericError("zero-power signal cannot be normalized");
    const double scale = std::sqrt(p);
    ChannelSymbols out;
    out.symbols.resize(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) out.symbols[i] = symbols[i] / scale;
    out.power = 1.0;
    out.scale = scale;
    return out;
}

std::vector<double> awgn_noise(std::size_t count, const AwgnConfig& config)
{
    const double sigma = snr_db_to_sigma(config.snr_db, 1.0);
    std::vector<double> noise(count);
    Rng rng(config.seed);
    for (auto& n : noise) n = sigma * rng.gaussian();
    return noise;
}

ChannelSymbols awgn_apply(const ChannelSymbols& x, const AwgnConfig& config)
{
    const auto noise = awgn_noise(x.symbols.size(), config);
    ChannelSymbols y = x;
    for (std::size_t i = 0; i < noise.size(); ++i) y.symbols[i] += noise[i];
    return y;
}

}  // namespace semcomm::channel
