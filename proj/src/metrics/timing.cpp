#include "semcomm/metrics/timing.h"

#include <algorithm>
#include <cmath>

#include "semcomm/core/errors.h"

namespace semcomm::metrics {

double percentile(std::vector<double> samples, double q)
{
    if (samples.empty()) throw ConfigError("percentile of an empty sample");
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("percentile must lie in (0, 1]");
    std::sort(samples.begin(), samples.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
    return samples[std::max<std::size_t>(rank, 1) - 1];
}

StageStats aggregate(const std::vector<double>& samples_ms)
{
    StageStats s;
    s.count = samples_ms.size();
    if (samples_ms.empty()) return s;
    double sum = 0.0;
    for (double v : samples_ms) sum += v;
    s.mean_ms = sum / static_cast<double>(s.count);
    s.p50_ms = percentile(samples_ms, 0.5);
    s.p95_ms = percentile(samples_ms, 0.95);
    s.max_ms = *std::max_element(samples_ms.begin(), samples_ms.end());
    return s;
}

void TimingRecorder::record(const std::string& stage, double ms)
{
    std::lock_guard lock(mutex_);
    log_.push_back({stage, ms});
}

std::vector<TimingSample> TimingRecorder::samples() const
{
    std::lock_guard lock(mutex_);
    return log_;
}

std::vector<double> TimingRecorder::samples(const std::string& stage) const
{
    std::lock_guard lock(mutex_);
    std::vector<double> out;
    for (const auto& s : log_) {
        if (s.stage == stage) out.push_back(s.ms);
    }
    return out;
}

std::map<std::string, StageStats> TimingRecorder::report() const
{
    std::map<std::string, std::vector<double>> by_stage;
    for (const auto& s : samples()) by_stage[s.stage].push_back(s.ms);
    std::map<std::string, StageStats> out;
    for (const auto& [stage, v] : by_stage) out[stage] = aggregate(v);
    return out;
}

void TimingRecorder::merge(const TimingRecorder& other)
{
    const auto theirs = other.samples();
    std::lock_guard lock(mutex_);
    log_.insert(log_.end(), theirs.begin(), theirs.end());
}

nlohmann::json to_json(const StageStats& s)
{
    return {{"count", s.count}, {"mean_ms", s.mean_ms}, {"p50_ms", s.p50_ms}, {"p95_ms", s.p95_ms},
            {"max_ms", s.max_ms}};
}

nlohmann::json to_json(const std::map<std::string, StageStats>& report)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [stage, s] : report) j[stage] = to_json(s);
    return j;
}

}  // namespace semcomm::metrics
