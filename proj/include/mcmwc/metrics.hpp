#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mcmwc/schemes.hpp"

#include "json.hpp"

// Performance quantities extracted from a completed SchemeRun: throughput,
// delay tails, decoding intervals, complexity counters.

namespace mcmwc::metrics {

struct MetricsReport {
    std::vector<double> session_throughput;  // delivered / post-warmup slots
    double sum_throughput = 0;

    std::uint64_t delay_samples = 0;
    double mean_delay = 0;
    bool empty_tail = false;
    // P(D > k) for k = 0..k_max, k_max = largest k with >= 50 exceedance events
    // (falls back to the last positive-mass point on short runs)
    std::vector<double> tail;
    std::vector<std::uint64_t> exceed;

    std::uint64_t interval_count = 0;
    double mean_interval = 0;
    double mean_interval_packets = 0;  // mean K_d
    double renewal_rate = 0;           // sum K_d / sum I_d, estimates sum_h lambda_h

    bool has_op_counts = false;
    double mac_per_packet = 0;

    bool stable = true;  // no drift in the time-average queue across quarters
    std::uint64_t max_q = 0;
    std::uint64_t max_window = 0;
    std::uint64_t nak_count = 0;
};

MetricsReport collect(const schemes::SchemeRun& run);

// GF multiply-accumulate operations per decoded packet (concrete mode only).
double op_counter_snapshot(const schemes::SchemeRun& run);

// Exact conservation: arrived == delivered + pending for every (track, session).
bool conservation_holds(const schemes::SchemeRun& run);

nlohmann::json to_json(const MetricsReport& report);
// flat CSV: metric,key,value
void write_csv(const MetricsReport& report, std::ostream& out);

}  // namespace mcmwc::metrics
