#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace semcomm::channel {

// Real-valued channel symbols. `power` is the declared mean-square power;
// `scale` is the factor the source signal was divided by during power
// normalization (1 when the symbols were never normalized).
struct ChannelSymbols {
    std::vector<double> symbols;
    double power = 1.0;
    double scale = 1.0;
};

struct AwgnConfig {
    double snr_db = 20.0;
    std::uint64_t seed = 0;
};

// Mean of squares.
double average_power(std::span<const double> symbols);

// sigma = sqrt(signal_power * 10^(-snr_db / 10)). Throws NumericError when
// signal_power <= 0 or snr_db is not finite.
double snr_db_to_sigma(double snr_db, double signal_power = 1.0);

// Scales to unit mean-square power. Throws NumericError("zero-power signal")
// when every symbol is zero.
ChannelSymbols power_normalize(std::span<const double> symbols);

// y = x + n with n ~ N(0, sigma^2) i.i.d., sigma from the SNR at unit signal
// power. The noise sequence is a pure function of the seed.
ChannelSymbols awgn_apply(const ChannelSymbols& x, const AwgnConfig& config);

// The noise vector awgn_apply would add for `count` symbols.
std::vector<double> awgn_noise(std::size_t count, const AwgnConfig& config);

}  // namespace semcomm::channel
