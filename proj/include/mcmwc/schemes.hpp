#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcmwc/topology.hpp"
#include "mcmwc/window_code.hpp"

// Complete multicast schemes over a network instance: merged multi-channel
// window coding, per-session window coding on statically allocated channels,
// block-RLNC baselines, and the single-receiver FIFO idealization.

namespace mcmwc::schemes {

enum class SchemeKind { kMcMwc, kMwcStatic, kRlncStatic, kRlncRandom, kFifoBound };
enum class DecoderMode { kIdeal, kConcrete };

std::string scheme_name(SchemeKind kind);

// session h -> channel g_h, a bijection
struct Allocation {
    std::vector<std::uint32_t> session_to_channel;
};

struct SchemeConfig {
    SchemeKind kind = SchemeKind::kMcMwc;
    DecoderMode decoder = DecoderMode::kIdeal;
    std::uint32_t rlnc_block = 50;
    std::size_t payload_symbols = 32;
    std::int64_t warmup = -1;        // -1 = auto: max(1000, 10 / (capacity - rate))
    bool record_trace = false;       // per-slot (a, c) and decode logs on tracked receivers
    bool random_allocation = false;  // mwc_static: random channel map instead of optimal
    bool track_delays = true;        // off: skip per-packet bookkeeping (queue studies only)
};

// Per-(receiver, session) delivery bookkeeping for one tracked receiver.
struct ReceiverTrack {
    std::uint32_t receiver = 0;
    std::vector<std::uint32_t> sessions;  // subscribed sessions
    // conservation, post-warmup: arrived == delivered + pending, per session
    std::vector<std::uint64_t> arrived;
    std::vector<std::uint64_t> delivered;
    std::vector<std::uint64_t> pending;
    std::uint64_t delay_count = 0;
    double delay_sum = 0.0;
    // decoding intervals (post-warmup)
    std::uint64_t interval_count = 0;
    std::uint64_t interval_sum = 0;
    std::uint64_t interval_packets = 0;  // sum of K_d
    // optional traces
    std::vector<std::uint64_t> decode_log;
    std::vector<std::uint32_t> trace_c;
};

struct SchemeRun {
    SchemeKind kind = SchemeKind::kMcMwc;
    DecoderMode decoder = DecoderMode::kIdeal;
    std::uint64_t horizon = 0;
    std::uint64_t warmup = 0;
    std::uint64_t seed = 0;
    std::size_t sessions = 0;

    std::vector<std::uint64_t> session_arrivals;   // post-warmup, per session
    std::vector<std::uint64_t> session_delivered;  // post-warmup, at each session's first receiver

    std::vector<ReceiverTrack> tracks;
    std::vector<std::uint64_t> delay_hist;     // merged over (packet, receiver) pairs
    std::uint64_t delay_samples = 0;
    std::vector<std::uint64_t> interval_hist;  // merged decoding intervals (index = I_d)

    // queue and window summaries (max_i Q_i per slot)
    std::uint64_t max_q = 0;
    std::uint64_t max_q_first_half = 0;
    std::uint64_t max_window = 0;
    double q_mean_quarter2 = 0.0;  // time-avg of max_i Q_i over slots (T/4, T/2]
    double q_mean_quarter4 = 0.0;  // over (3T/4, T]
    std::uint64_t nak_count = 0;

    // concrete-mode extras
    std::uint64_t mac_ops = 0;
    std::uint64_t decoded_packets = 0;  // delivered payload count (all receivers)
    std::uint64_t reception_events = 0;   // (receiver, slot) pairs with c > 0
    std::uint64_t shortfall_events = 0;   // concrete S increment < paired ideal increment
    std::uint64_t payload_mismatches = 0;
    std::uint64_t feedback_violations = 0;  // Z[t] > min_i S_i[t-1] occurrences

    std::vector<std::uint64_t> trace_a;  // optional merged arrivals per slot

    double post_warmup_slots() const { return static_cast<double>(horizon - warmup); }
};

// Eq-style capacities and allocations ------------------------------------

// argmax over bijections of sum_h min_{i in S_h} gamma_{i, g_h}
Allocation optimal_static_allocation(const topo::ChannelStats& stats,
                                     const topo::SessionLayout& layout);

double allocation_objective(const topo::ChannelStats& stats, const topo::SessionLayout& layout,
                            const Allocation& g);

// (1/m) min over the receiver union of sum_j gamma_{i,j}
double mc_mwc_capacity(const topo::ChannelStats& stats, const topo::SessionLayout& layout);

// max_j min_{i in S_h} gamma_{i,j}; upper bound on session h under any static map
double static_capacity_upper(const topo::ChannelStats& stats, const topo::SessionLayout& layout,
                             std::size_t h);

// Analytic capacities of the instance sample_instance(m, n, ..., seed) would
// produce (disjoint sessions), computed without materializing the gamma matrix.
struct CapacityPoint {
    double mc_mwc = 0;
    double static_opt = 0;         // optimal-allocation objective / m
    double static_upper_mean = 0;  // mean over sessions of the per-session upper bound
};
CapacityPoint sampled_capacity_point(std::size_t m, std::uint64_t n,
                                     const topo::GammaDist& gamma_dist,
                                     const topo::SessionSizeDist& size_dist, std::uint64_t seed);

// Full slot-loop simulation of one scheme over one instance.
SchemeRun run_scheme(const SchemeConfig& cfg, const topo::Instance& inst,
                     const topo::ArrivalSpec& arrivals, std::uint64_t horizon,
                     std::uint64_t seed);

}  // namespace mcmwc::schemes
