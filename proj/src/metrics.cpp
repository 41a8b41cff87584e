#include "mcmwc/metrics.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mcmwc::metrics {

MetricsReport collect(const schemes::SchemeRun& run) {
    if (run.horizon <= run.warmup) throw std::invalid_argument("run ended inside warmup");
    MetricsReport rep;

    const double slots = run.post_warmup_slots();
    rep.session_throughput.resize(run.sessions);
    for (std::size_t h = 0; h < run.sessions; ++h) {
        rep.session_throughput[h] = static_cast<double>(run.session_delivered[h]) / slots;
        rep.sum_throughput += rep.session_throughput[h];
    }

    rep.delay_samples = run.delay_samples;
    rep.empty_tail = run.delay_samples == 0;
    if (!rep.empty_tail) {
        double dsum = 0;
        std::uint64_t dcount = 0;
        for (const auto& tr : run.tracks) {
            dsum += tr.delay_sum;
            dcount += tr.delay_count;
        }
        rep.mean_delay = dcount ? dsum / static_cast<double>(dcount) : 0.0;

        // exceedance counts: exceed[k] = #(D > k)
        std::vector<std::uint64_t> exceed(run.delay_hist.size());
        std::uint64_t acc = 0;
        for (std::size_t k = run.delay_hist.size(); k-- > 0;) {
            exceed[k] = acc;  // strictly greater than k
            acc += run.delay_hist[k];
        }
        std::size_t k_max = 0;
        bool found = false;
        for (std::size_t k = 0; k < exceed.size(); ++k) {
            if (exceed[k] >= 50) {
                k_max = k;
                found = true;
            }
        }
        if (!found)
            for (std::size_t k = 0; k < exceed.size(); ++k)
                if (exceed[k] > 0) k_max = k;
        rep.exceed.assign(exceed.begin(), exceed.begin() + static_cast<long>(k_max) + 1);
        rep.tail.resize(rep.exceed.size());
        for (std::size_t k = 0; k < rep.exceed.size(); ++k)
            rep.tail[k] =
                static_cast<double>(rep.exceed[k]) / static_cast<double>(run.delay_samples);
    }

    std::uint64_t isum = 0, icount = 0, ipkts = 0;
    for (const auto& tr : run.tracks) {
        isum += tr.interval_sum;
        icount += tr.interval_count;
        ipkts += tr.interval_packets;
    }
    rep.interval_count = icount;
    rep.mean_interval = icount ? static_cast<double>(isum) / static_cast<double>(icount) : 0.0;
    rep.mean_interval_packets =
        icount ? static_cast<double>(ipkts) / static_cast<double>(icount) : 0.0;
    rep.renewal_rate = isum ? static_cast<double>(ipkts) / static_cast<double>(isum) : 0.0;

    if (run.decoder == schemes::DecoderMode::kConcrete && run.decoded_packets > 0) {
        rep.has_op_counts = true;
        rep.mac_per_packet =
            static_cast<double>(run.mac_ops) / static_cast<double>(run.decoded_packets);
    }

    rep.stable = run.q_mean_quarter4 <= 2.0 * run.q_mean_quarter2 + 5.0;
    rep.max_q = run.max_q;
    rep.max_window = run.max_window;
    rep.nak_count = run.nak_count;
    return rep;
}

double op_counter_snapshot(const schemes::SchemeRun& run) {
    if (run.decoder != schemes::DecoderMode::kConcrete)
        throw std::logic_error("no field ops in ideal mode");
    if (run.decoded_packets == 0)
        throw std::runtime_error("no decoded packets; op count undefined");
    return static_cast<double>(run.mac_ops) / static_cast<double>(run.decoded_packets);
}

bool conservation_holds(const schemes::SchemeRun& run) {
    for (const auto& tr : run.tracks)
        for (std::size_t k = 0; k < tr.sessions.size(); ++k)
            if (tr.arrived[k] != tr.delivered[k] + tr.pending[k]) return false;
    return true;
}

nlohmann::json to_json(const MetricsReport& rep) {
    nlohmann::json j;
    j["session_throughput"] = rep.session_throughput;
    j["sum_throughput"] = rep.sum_throughput;
    j["delay"] = {{"samples", rep.delay_samples},
                  {"mean", rep.mean_delay},
                  {"empty_tail", rep.empty_tail},
                  {"tail", rep.tail},
                  {"exceed", rep.exceed}};
    j["intervals"] = {{"count", rep.interval_count},
                      {"mean", rep.mean_interval},
                      {"mean_packets", rep.mean_interval_packets},
                      {"renewal_rate", rep.renewal_rate}};
    if (rep.has_op_counts) j["mac_per_packet"] = rep.mac_per_packet;
    j["stable"] = rep.stable;
    j["max_q"] = rep.max_q;
    j["max_window"] = rep.max_window;
    j["nak_count"] = rep.nak_count;
    return j;
}

void write_csv(const MetricsReport& rep, std::ostream& out) {
    out << "metric,key,value\n";
    for (std::size_t h = 0; h < rep.session_throughput.size(); ++h)
        out << "throughput," << h << "," << rep.session_throughput[h] << "\n";
    out << "sum_throughput,," << rep.sum_throughput << "\n";
    out << "mean_delay,," << rep.mean_delay << "\n";
    out << "delay_samples,," << rep.delay_samples << "\n";
    for (std::size_t k = 0; k < rep.tail.size(); ++k)
        out << "tail," << k << "," << rep.tail[k] << "\n";
    out << "mean_interval,," << rep.mean_interval << "\n";
    out << "renewal_rate,," << rep.renewal_rate << "\n";
    if (rep.has_op_counts) out << "mac_per_packet,," << rep.mac_per_packet << "\n";
    out << "stable,," << (rep.stable ? 1 : 0) << "\n";
    out << "max_q,," << rep.max_q << "\n";
    out << "max_window,," << rep.max_window << "\n";
    out << "nak_count,," << rep.nak_count << "\n";
}

}  // namespace mcmwc::metrics
