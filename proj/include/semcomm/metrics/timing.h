#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace semcomm::metrics {

struct StageStats {
    std::size_t count = 0;
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p95_ms = 0.0;
    double max_ms = 0.0;
};

// Nearest-rank percentile (q in (0, 1]) of an unsorted sample.
double percentile(std::vector<double> samples, double q);
StageStats aggregate(const std::vector<double>& samples_ms);

struct TimingSample {
    std::string stage;
    double ms = 0.0;
};

// Append-only log of per-stage wall-clock samples. Safe to record from
// several threads; reports aggregate on read.
class TimingRecorder {
public:
    TimingRecorder() = default;
    TimingRecorder(const TimingRecorder& other) : log_(other.samples()) {}
    TimingRecorder& operator=(const TimingRecorder& other)
    {
        if (this != &other) {
            auto copy = other.samples();
            std::lock_guard lock(mutex_);
            log_ = std::move(copy);
        }
        return *this;
    }

    void record(const std::string& stage, double ms);
    std::vector<TimingSample> samples() const;
    std::vector<double> samples(const std::string& stage) const;
    // Stages with at least one sample.
    std::map<std::string, StageStats> report() const;
    void merge(const TimingRecorder& other);

private:
    mutable std::mutex mutex_;
    std::vector<TimingSample> log_;
};

// Records the scope's lifetime into the recorder under `stage`.
class TimingScope {
public:
    TimingScope(TimingRecorder& recorder, std::string stage)
        : recorder_(recorder), stage_(std::move(stage)), start_(std::chrono::steady_clock::now())
    {
    }
    ~TimingScope() { recorder_.record(stage_, elapsed_ms()); }
    TimingScope(const TimingScope&) = delete;
    TimingScope& operator=(const TimingScope&) = delete;

    double elapsed_ms() const
    {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    TimingRecorder& recorder_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

nlohmann::json to_json(const StageStats& stats);
nlohmann::json to_json(const std::map<std::string, StageStats>& report);

}  // namespace semcomm::metrics
