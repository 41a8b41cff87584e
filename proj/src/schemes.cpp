#include "mcmwc/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mcmwc/assignment.hpp"

namespace mcmwc::schemes {

namespace {

constexpr std::size_t kHistCap = std::size_t{1} << 22;

void bump_hist(std::vector<std::uint64_t>& hist, std::uint64_t bin, std::uint64_t count = 1) {
    if (bin >= kHistCap) bin = kHistCap - 1;
    if (bin >= hist.size()) hist.resize(std::max<std::size_t>(bin + 1, hist.size() * 2 + 16), 0);
    hist[bin] += count;
}

std::vector<std::vector<double>> session_channel_weights(const topo::ChannelStats& stats,
                                                         const topo::SessionLayout& layout) {
    const std::size_t m = layout.sessions();
    std::vector<std::vector<double>> w(m, std::vector<double>(stats.channels, 0.0));
    for (std::size_t h = 0; h < m; ++h) {
        const auto& set = layout.receiver_sets[h];
        if (set.empty()) throw std::invalid_argument("empty receiver set");
        for (std::size_t j = 0; j < stats.channels; ++j) {
            double lo = 1.0;
            for (auto i : set) lo = std::min(lo, stats.at(i, j));
            w[h][j] = lo;
        }
    }
    return w;
}

}  // namespace

std::string scheme_name(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::kMcMwc: return "mc_mwc";
        case SchemeKind::kMwcStatic: return "mwc_static";
        case SchemeKind::kRlncStatic: return "rlnc_static";
        case SchemeKind::kRlncRandom: return "rlnc_random";
        case SchemeKind::kFifoBound: return "fifo_bound";
    }
    return "?";
}

Allocation optimal_static_allocation(const topo::ChannelStats& stats,
                                     const topo::SessionLayout& layout) {
    if (layout.sessions() != stats.channels)
        throw std::invalid_argument("static allocation needs m sessions over m channels");
    auto w = session_channel_weights(stats, layout);
    auto g = max_assignment(w);
    Allocation alloc;
    alloc.session_to_channel.assign(g.begin(), g.end());
    return alloc;
}

double allocation_objective(const topo::ChannelStats& stats, const topo::SessionLayout& layout,
                            const Allocation& g) {
    auto w = session_channel_weights(stats, layout);
    double total = 0;
    for (std::size_t h = 0; h < layout.sessions(); ++h) total += w[h][g.session_to_channel[h]];
    return total;
}

double mc_mwc_capacity(const topo::ChannelStats& stats, const topo::SessionLayout& layout) {
    double lo = std::numeric_limits<double>::infinity();
    for (auto i : layout.receiver_union()) lo = std::min(lo, stats.row_sum(i));
    return lo / static_cast<double>(layout.channels);
}

double static_capacity_upper(const topo::ChannelStats& stats, const topo::SessionLayout& layout,
                             std::size_t h) {
    const auto& set = layout.receiver_sets.at(h);
    if (set.empty()) throw std::invalid_argument("empty receiver set");
    double best = 0;
    for (std::size_t j = 0; j < stats.channels; ++j) {
        double lo = 1.0;
        for (auto i : set) lo = std::min(lo, stats.at(i, j));
        best = std::max(best, lo);
    }
    return best;
}

CapacityPoint sampled_capacity_point(std::size_t m, std::uint64_t n,
                                     const topo::GammaDist& gamma_dist,
                                     const topo::SessionSizeDist& size_dist, std::uint64_t seed) {
    // Mirrors sample_instance's draw order (sizes first, then gammas
    // receiver-major) so the implied disjoint instance is identical, while
    // keeping only running minima: O(m^2) memory at any n.
    Rng rng(derive_seed(seed, 0x70706fULL));
    std::vector<std::uint64_t> sizes(m);
    for (std::size_t h = 0; h < m; ++h) sizes[h] = size_dist.sample(rng);

    std::vector<std::vector<double>> w(m, std::vector<double>(m, 1.0));
    double min_row_sum = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < m; ++h) {
        for (std::uint64_t k = 0; k < sizes[h]; ++k) {
            double sum = 0;
            for (std::size_t j = 0; j < m; ++j) {
                double g = gamma_dist.sample(rng);
                sum += g;
                if (g < w[h][j]) w[h][j] = g;
            }
            min_row_sum = std::min(min_row_sum, sum);
        }
    }

    CapacityPoint pt;
    pt.mc_mwc = min_row_sum / static_cast<double>(m);
    auto g = max_assignment(w);
    double obj = 0, upper = 0;
    for (std::size_t h = 0; h < m; ++h) {
        obj += w[h][g[h]];
        upper += *std::max_element(w[h].begin(), w[h].end());
    }
    pt.static_opt = obj / static_cast<double>(m);
    pt.static_upper_mean = upper / static_cast<double>(m);
    return pt;
}

// ---------------------------------------------------------------------------
// run_scheme engines
// ---------------------------------------------------------------------------

namespace {

using topo::ArrivalSpec;
using topo::Instance;

struct PendingFifo {
    std::deque<std::pair<std::uint64_t, std::uint32_t>> q;  // (arrival slot, count)
};

struct TrackBook {
    ReceiverTrack rec;
    std::vector<PendingFifo> pending;  // parallel to rec.sessions
    std::uint64_t last_decode = 0;
    bool interval_armed = false;
    std::uint64_t arrivals_since_decode = 0;
};

struct RunAccum {
    SchemeRun run;
    bool record_trace = false;
    bool track_delays = true;

    void record_delivery(TrackBook& tb, std::size_t sess_idx, std::uint64_t arr_slot,
                         std::uint32_t count, std::uint64_t now) {
        if (arr_slot <= run.warmup) return;
        std::uint64_t d = now - arr_slot;
        bump_hist(run.delay_hist, d, count);
        run.delay_samples += count;
        tb.rec.delay_count += count;
        tb.rec.delay_sum += static_cast<double>(d) * count;
        tb.rec.delivered[sess_idx] += count;
    }

    void decode_all_pending(TrackBook& tb, std::uint64_t now) {
        for (std::size_t s = 0; s < tb.pending.size(); ++s) {
            auto& q = tb.pending[s].q;
            while (!q.empty()) {
                record_delivery(tb, s, q.front().first, q.front().second, now);
                q.pop_front();
            }
        }
    }

    void note_decode_moment(TrackBook& tb, std::uint64_t now) {
        if (tb.interval_armed) {
            std::uint64_t interval = now - tb.last_decode;
            bump_hist(run.interval_hist, interval);
            tb.rec.interval_count++;
            tb.rec.interval_sum += interval;
            tb.rec.interval_packets += tb.arrivals_since_decode;
        }
        tb.last_decode = now;
        tb.arrivals_since_decode = 0;
        tb.interval_armed = now > run.warmup;
        if (record_trace) tb.rec.decode_log.push_back(now);
    }

    void finalize_pending(TrackBook& tb) {
        for (std::size_t k = 0; k < tb.pending.size(); ++k) {
            std::uint64_t left = 0;
            for (auto& [slot, cnt] : tb.pending[k].q)
                if (slot > run.warmup) left += cnt;
            tb.rec.pending[k] = left;
        }
    }
};

std::uint64_t auto_warmup(double margin, std::uint64_t horizon, std::int64_t requested) {
    if (requested >= 0) {
        if (static_cast<std::uint64_t>(requested) >= horizon)
            throw std::invalid_argument("warmup must be below the horizon");
        return static_cast<std::uint64_t>(requested);
    }
    double w = 1000.0;
    if (margin > 1e-9) w = std::max(w, std::ceil(10.0 / margin));
    return std::min<std::uint64_t>(static_cast<std::uint64_t>(w), horizon / 2);
}

Allocation pick_allocation(const SchemeConfig& cfg, const Instance& inst, Rng& rng) {
    bool random = cfg.kind == SchemeKind::kRlncRandom || cfg.random_allocation;
    if (!random) return optimal_static_allocation(inst.stats, inst.layout);
    std::size_t m = inst.layout.sessions();
    Allocation alloc;
    alloc.session_to_channel.resize(m);
    std::iota(alloc.session_to_channel.begin(), alloc.session_to_channel.end(), 0u);
    for (std::size_t i = m; i > 1; --i)
        std::swap(alloc.session_to_channel[i - 1], alloc.session_to_channel[rng.below(i)]);
    return alloc;
}

void init_book(TrackBook& tb, std::uint32_t receiver, std::vector<std::uint32_t> sessions) {
    tb.rec.receiver = receiver;
    tb.rec.sessions = std::move(sessions);
    tb.rec.arrived.assign(tb.rec.sessions.size(), 0);
    tb.rec.delivered.assign(tb.rec.sessions.size(), 0);
    tb.rec.pending.assign(tb.rec.sessions.size(), 0);
    tb.pending.resize(tb.rec.sessions.size());
}

// One window-coded subsystem: a set of sessions merged into one stream and
// served by a set of channels. mc_mwc is a single subsystem over everything;
// mwc_static is one subsystem per session on its allocated channel.
struct Subsystem {
    std::vector<std::uint32_t> sessions;
    std::vector<std::uint32_t> channels;   // global channel ids
    std::vector<std::uint32_t> receivers;  // global ids, ascending
    wc::Encoder enc;
    std::vector<std::uint64_t> svec;  // ideal S_i per receiver
    std::vector<wc::ConcreteDecoder> decoders;
    std::vector<wc::IdealDecoder> shadows;
    std::deque<gf::Payload> source;  // window packet payloads, global index source_base+1...
    std::uint64_t source_base = 0;
    std::vector<TrackBook> books;
    std::uint64_t merged_arrivals_slot = 0;
    bool live_slot = false;  // window nonempty when this slot's packets were encoded
};

SchemeRun run_window_scheme(const SchemeConfig& cfg, const Instance& inst,
                            const ArrivalSpec& arrivals, std::uint64_t horizon,
                            std::uint64_t seed) {
    const std::size_t m = inst.layout.sessions();
    const std::size_t n_recv = inst.stats.receivers;
    const bool concrete = cfg.decoder == DecoderMode::kConcrete;

    Rng rng(derive_seed(seed, 1));          // arrivals + channel states
    Rng payload_rng(derive_seed(seed, 2));  // source packet contents
    Rng alloc_rng(derive_seed(seed, 3));

    RunAccum acc;
    acc.run.kind = cfg.kind;
    acc.run.decoder = cfg.decoder;
    acc.run.horizon = horizon;
    acc.run.seed = seed;
    acc.run.sessions = m;
    acc.run.session_arrivals.assign(m, 0);
    acc.run.session_delivered.assign(m, 0);
    acc.record_trace = cfg.record_trace;
    acc.track_delays = cfg.track_delays;

    std::vector<Subsystem> subs;
    if (cfg.kind == SchemeKind::kMcMwc) {
        Subsystem s{{}, {}, {}, wc::Encoder(m, cfg.payload_symbols, derive_seed(seed, 4))};
        s.sessions.resize(m);
        std::iota(s.sessions.begin(), s.sessions.end(), 0u);
        s.channels = s.sessions;
        s.receivers = inst.layout.receiver_union();
        subs.push_back(std::move(s));
        double margin = mc_mwc_capacity(inst.stats, inst.layout) - arrivals.rate();
        acc.run.warmup = auto_warmup(margin, horizon, cfg.warmup);
    } else {
        Allocation alloc = pick_allocation(cfg, inst, alloc_rng);
        double margin = std::numeric_limits<double>::infinity();
        for (std::size_t h = 0; h < m; ++h) {
            Subsystem s{{static_cast<std::uint32_t>(h)},
                        {alloc.session_to_channel[h]},
                        {},
                        wc::Encoder(1, cfg.payload_symbols, derive_seed(seed, 4, h))};
            s.receivers = inst.layout.receiver_sets[h];
            std::sort(s.receivers.begin(), s.receivers.end());
            double lo = 1.0;
            for (auto i : s.receivers) lo = std::min(lo, inst.stats.at(i, alloc.session_to_channel[h]));
            margin = std::min(margin, lo - arrivals.rate());
            subs.push_back(std::move(s));
        }
        acc.run.warmup = auto_warmup(margin, horizon, cfg.warmup);
    }

    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> membership(n_recv);
    for (std::size_t si = 0; si < subs.size(); ++si) {
        auto& s = subs[si];
        s.svec.assign(s.receivers.size(), 0);
        s.books.resize(s.receivers.size());
        for (std::size_t li = 0; li < s.receivers.size(); ++li) {
            membership[s.receivers[li]].emplace_back(static_cast<std::uint32_t>(si),
                                                     static_cast<std::uint32_t>(li));
            std::vector<std::uint32_t> subscribed;
            for (auto h : s.sessions) {
                const auto& set = inst.layout.receiver_sets[h];
                if (std::find(set.begin(), set.end(), s.receivers[li]) != set.end())
                    subscribed.push_back(h);
            }
            init_book(s.books[li], s.receivers[li], std::move(subscribed));
        }
        if (concrete) {
            s.decoders.reserve(s.receivers.size());
            s.shadows.resize(s.receivers.size());
            for (std::size_t li = 0; li < s.receivers.size(); ++li)
                s.decoders.emplace_back(cfg.payload_symbols, s.enc.coeff_seed());
        }
    }

    std::vector<std::uint32_t> a_h(m);
    std::vector<std::uint8_t> chan_row(inst.stats.channels);
    std::vector<gf::Payload> fresh;
    std::vector<std::uint64_t> counts_buf;
    const std::uint64_t half = horizon / 2;
    const std::uint64_t q2_lo = horizon / 4, q2_hi = horizon / 2;
    const std::uint64_t q4_lo = 3 * (horizon / 4);
    double q2_sum = 0, q4_sum = 0;
    std::uint64_t q2_n = 0, q4_n = 0;

    for (std::uint64_t t = 1; t <= horizon; ++t) {
        // start of slot: apply scheduled removals, verify Z[t] <= min_i S_i[t-1]
        for (auto& s : subs) {
            s.enc.begin_slot(t);
            std::uint64_t z = s.enc.removed_total();
            std::uint64_t smin = ~0ull;
            if (concrete)
                for (auto& d : s.decoders) smin = std::min(smin, d.determinable());
            else
                for (auto v : s.svec) smin = std::min(smin, v);
            if (!s.receivers.empty() && z > smin) acc.run.feedback_violations++;
            if (concrete) {
                std::uint64_t min_delivered = ~0ull;
                for (auto& d : s.decoders) {
                    d.prune(z);
                    min_delivered = std::min(min_delivered, d.delivered());
                }
                std::uint64_t keep = std::min(min_delivered, z);
                while (s.source_base < keep && !s.source.empty()) {
                    s.source.pop_front();
                    ++s.source_base;
                }
            }
        }

        // arrivals (ascending session order; intra-session order = arrival order)
        std::uint64_t a_total = 0;
        for (std::size_t h = 0; h < m; ++h) {
            a_h[h] = arrivals.sample(rng);
            a_total += a_h[h];
            if (t > acc.run.warmup) acc.run.session_arrivals[h] += a_h[h];
        }
        if (cfg.record_trace) acc.run.trace_a.push_back(a_total);

        for (auto& s : subs) {
            std::uint64_t a_sub = 0;
            for (auto h : s.sessions) a_sub += a_h[h];
            s.merged_arrivals_slot = a_sub;
            if (concrete) {
                fresh.clear();
                for (std::uint64_t k = 0; k < a_sub; ++k) {
                    gf::Payload p(cfg.payload_symbols);
                    for (auto& b : p) b = static_cast<std::uint8_t>(payload_rng.u64());
                    s.source.push_back(p);
                    fresh.push_back(std::move(p));
                }
                s.enc.ingest(fresh);
                for (auto& d : s.decoders) d.note_arrivals(a_sub);
            } else {
                s.enc.ingest_count(a_sub);
            }
            s.live_slot = s.enc.window_size() > 0;
            acc.run.max_window = std::max(acc.run.max_window, s.enc.window_size());
        }

        // encode (payloads only needed in concrete mode)
        std::vector<std::vector<wc::CodedPacket>> coded(subs.size());
        if (concrete)
            for (std::size_t si = 0; si < subs.size(); ++si) coded[si] = subs[si].enc.encode();

        // channel realization (receiver-major, channel-minor) and reception
        std::uint64_t slot_max_q = 0;
        for (std::size_t i = 0; i < n_recv; ++i) {
            for (std::size_t j = 0; j < inst.stats.channels; ++j)
                chan_row[j] = rng.bernoulli(inst.stats.at(i, j)) ? 1 : 0;
            for (auto [si, li] : membership[i]) {
                auto& s = subs[si];
                std::uint32_t c = 0;
                for (auto j : s.channels) c += chan_row[j];
                const std::uint64_t a_enc = s.enc.arrivals_total();

                std::uint64_t q;
                bool decoded_now = false;
                if (!concrete) {
                    std::uint64_t& sv = s.svec[li];
                    sv += std::min<std::uint64_t>(c, a_enc - sv);
                    q = a_enc - sv;
                    decoded_now = (q == 0);
                } else {
                    auto& dec = s.decoders[li];
                    auto& shadow = s.shadows[li];
                    std::uint64_t s_id0 = shadow.determinable();
                    shadow.receive(s.merged_arrivals_slot, c);
                    std::uint64_t inc_ideal = shadow.determinable() - s_id0;
                    std::uint64_t s_c0 = dec.determinable();
                    for (std::size_t jc = 0; jc < s.channels.size(); ++jc)
                        if (chan_row[s.channels[jc]]) dec.receive(coded[si][jc]);
                    std::uint64_t inc_conc = dec.determinable() - s_c0;
                    if (c > 0 && s.live_slot) {
                        acc.run.reception_events++;
                        if (inc_conc < inc_ideal) acc.run.shortfall_events++;
                    }
                    q = dec.queue();
                    if (q == 0) {
                        auto decoded = dec.try_decode(t);
                        decoded_now = true;
                        if (decoded && !decoded->empty()) {
                            std::uint64_t lo = dec.delivered() - decoded->size();
                            for (std::size_t k = 0; k < decoded->size(); ++k) {
                                const gf::Payload& src = s.source[lo + k - s.source_base];
                                if ((*decoded)[k] != src) acc.run.payload_mismatches++;
                            }
                            acc.run.decoded_packets += decoded->size();
                        }
                    }
                }
                slot_max_q = std::max(slot_max_q, q);

                auto& tb = s.books[li];
                tb.arrivals_since_decode += s.merged_arrivals_slot;
                if (acc.track_delays) {
                    for (std::size_t k = 0; k < tb.rec.sessions.size(); ++k) {
                        std::uint32_t ah = a_h[tb.rec.sessions[k]];
                        if (ah > 0) {
                            tb.pending[k].q.emplace_back(t, ah);
                            if (t > acc.run.warmup) tb.rec.arrived[k] += ah;
                        }
                    }
                }
                if (cfg.record_trace) tb.rec.trace_c.push_back(c);
                if (decoded_now) {
                    if (acc.track_delays) acc.decode_all_pending(tb, t);
                    acc.note_decode_moment(tb, t);
                }
            }
        }

        // anonymous feedback (evaluated end of slot; removal applies next slot)
        for (auto& s : subs) {
            bool nak;
            if (concrete) {
                counts_buf.clear();
                for (auto& d : s.decoders) counts_buf.push_back(d.determinable());
                nak = wc::feedback_round(s.enc, counts_buf);
            } else {
                nak = wc::feedback_round(s.enc, s.svec);
            }
            if (nak) acc.run.nak_count++;
        }

        acc.run.max_q = std::max(acc.run.max_q, slot_max_q);
        if (t <= half) acc.run.max_q_first_half = std::max(acc.run.max_q_first_half, slot_max_q);
        if (t > q2_lo && t <= q2_hi) {
            q2_sum += static_cast<double>(slot_max_q);
            q2_n++;
        }
        if (t > q4_lo) {
            q4_sum += static_cast<double>(slot_max_q);
            q4_n++;
        }
    }

    acc.run.q_mean_quarter2 = q2_n ? q2_sum / static_cast<double>(q2_n) : 0.0;
    acc.run.q_mean_quarter4 = q4_n ? q4_sum / static_cast<double>(q4_n) : 0.0;
    if (concrete)
        for (auto& s : subs)
            for (auto& d : s.decoders) acc.run.mac_ops += d.mac_ops();

    for (auto& s : subs) {
        // throughput reference: each session's first listed receiver
        for (auto h : s.sessions) {
            std::uint32_t ref = inst.layout.receiver_sets[h][0];
            auto it = std::lower_bound(s.receivers.begin(), s.receivers.end(), ref);
            std::size_t li = static_cast<std::size_t>(it - s.receivers.begin());
            const auto& rec = s.books[li].rec;
            for (std::size_t x = 0; x < rec.sessions.size(); ++x)
                if (rec.sessions[x] == h) acc.run.session_delivered[h] = rec.delivered[x];
        }
        for (auto& tb : s.books) {
            acc.finalize_pending(tb);
            acc.run.tracks.push_back(std::move(tb.rec));
        }
    }
    return acc.run;
}

SchemeRun run_fifo_bound(const SchemeConfig& cfg, const Instance& inst,
                         const ArrivalSpec& arrivals, std::uint64_t horizon, std::uint64_t seed) {
    const std::size_t m = inst.layout.sessions();
    if (arrivals.rate() >= 1.0) throw std::invalid_argument("fifo_bound needs per-session rate < 1");
    Rng rng(derive_seed(seed, 1));

    RunAccum acc;
    acc.run.kind = cfg.kind;
    acc.run.decoder = cfg.decoder;
    acc.run.horizon = horizon;
    acc.run.seed = seed;
    acc.run.sessions = m;
    acc.run.session_arrivals.assign(m, 0);
    acc.run.session_delivered.assign(m, 0);
    acc.run.warmup = auto_warmup(1.0 - arrivals.rate(), horizon, cfg.warmup);
    acc.record_trace = cfg.record_trace;

    std::vector<TrackBook> books(m);
    std::vector<std::deque<std::uint64_t>> queues(m);
    for (std::size_t h = 0; h < m; ++h) {
        std::uint32_t ref =
            inst.layout.receiver_sets[h].empty() ? 0 : inst.layout.receiver_sets[h][0];
        init_book(books[h], ref, {static_cast<std::uint32_t>(h)});
    }

    for (std::uint64_t t = 1; t <= horizon; ++t) {
        std::uint64_t slot_max_q = 0;
        for (std::size_t h = 0; h < m; ++h) {
            std::uint32_t a = arrivals.sample(rng);
            if (t > acc.run.warmup) {
                acc.run.session_arrivals[h] += a;
                books[h].rec.arrived[0] += a;
            }
            for (std::uint32_t k = 0; k < a; ++k) queues[h].push_back(t);
            if (!queues[h].empty()) {
                std::uint64_t arr = queues[h].front();
                queues[h].pop_front();
                if (arr > acc.run.warmup) acc.record_delivery(books[h], 0, arr, 1, t);
            }
            // the FIFO queue recursion Q' = max(Q + a - 1, 0), realized by the deque size
            slot_max_q = std::max<std::uint64_t>(slot_max_q, queues[h].size());
        }
        acc.run.max_q = std::max(acc.run.max_q, slot_max_q);
        if (t <= horizon / 2) acc.run.max_q_first_half = acc.run.max_q;
    }
    for (std::size_t h = 0; h < m; ++h) {
        std::uint64_t left = 0;
        for (auto arr : queues[h])
            if (arr > acc.run.warmup) left++;
        books[h].rec.pending[0] = left;
        acc.run.session_delivered[h] = books[h].rec.delivered[0];
        acc.run.tracks.push_back(std::move(books[h].rec));
    }
    return acc.run;
}

SchemeRun run_rlnc(const SchemeConfig& cfg, const Instance& inst, const ArrivalSpec& arrivals,
                   std::uint64_t horizon, std::uint64_t seed) {
    const std::size_t m = inst.layout.sessions();
    const std::uint32_t B = cfg.rlnc_block;
    if (B < 1) throw std::invalid_argument("rlnc block must be >= 1");
    Rng rng(derive_seed(seed, 1));
    Rng alloc_rng(derive_seed(seed, 3));

    RunAccum acc;
    acc.run.kind = cfg.kind;
    acc.run.decoder = cfg.decoder;
    acc.run.horizon = horizon;
    acc.run.seed = seed;
    acc.run.sessions = m;
    acc.run.session_arrivals.assign(m, 0);
    acc.run.session_delivered.assign(m, 0);
    acc.record_trace = cfg.record_trace;

    Allocation alloc = pick_allocation(cfg, inst, alloc_rng);
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < m; ++h) {
        double lo = 1.0;
        for (auto i : inst.layout.receiver_sets[h])
            lo = std::min(lo, inst.stats.at(i, alloc.session_to_channel[h]));
        margin = std::min(margin, lo - arrivals.rate());
    }
    acc.run.warmup = auto_warmup(margin, horizon, cfg.warmup);

    struct SessionState {
        std::deque<std::vector<std::uint64_t>> full_blocks;  // arrival slots per packet
        std::vector<std::uint64_t> open_block;
        std::vector<std::uint32_t> succ;
        std::vector<char> done;
        std::vector<TrackBook> books;
        std::vector<std::uint64_t> undelivered;  // per local receiver, from slot 0
        std::uint64_t arrived_total = 0;
    };
    std::vector<SessionState> st(m);
    for (std::size_t h = 0; h < m; ++h) {
        const auto& set = inst.layout.receiver_sets[h];
        st[h].succ.assign(set.size(), 0);
        st[h].done.assign(set.size(), 0);
        st[h].undelivered.assign(set.size(), 0);
        st[h].books.resize(set.size());
        for (std::size_t li = 0; li < set.size(); ++li)
            init_book(st[h].books[li], set[li], {static_cast<std::uint32_t>(h)});
    }

    std::vector<std::uint32_t> a_h(m);
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        for (std::size_t h = 0; h < m; ++h) {
            a_h[h] = arrivals.sample(rng);
            auto& ss = st[h];
            ss.arrived_total += a_h[h];
            for (auto& u : ss.undelivered) u += a_h[h];
            if (t > acc.run.warmup) {
                acc.run.session_arrivals[h] += a_h[h];
                for (auto& tb : ss.books) tb.rec.arrived[0] += a_h[h];
            }
            for (std::uint32_t k = 0; k < a_h[h]; ++k) {
                ss.open_block.push_back(t);
                if (ss.open_block.size() == B) {
                    ss.full_blocks.push_back(std::move(ss.open_block));
                    ss.open_block.clear();
                }
            }
        }

        // channel draws per (session, receiver) on the allocated channel
        std::uint64_t slot_max_q = 0;
        for (std::size_t h = 0; h < m; ++h) {
            auto& ss = st[h];
            const auto& set = inst.layout.receiver_sets[h];
            bool transmitting = !ss.full_blocks.empty();
            for (std::size_t li = 0; li < set.size(); ++li) {
                bool bit = rng.bernoulli(inst.stats.at(set[li], alloc.session_to_channel[h]));
                if (transmitting && !ss.done[li] && bit && ++ss.succ[li] == B) {
                    ss.done[li] = 1;
                    ss.undelivered[li] -= B;
                    auto& tb = ss.books[li];
                    for (auto arr : ss.full_blocks.front())
                        if (arr > acc.run.warmup) acc.record_delivery(tb, 0, arr, 1, t);
                }
                slot_max_q = std::max(slot_max_q, ss.undelivered[li]);
            }
            if (transmitting &&
                std::all_of(ss.done.begin(), ss.done.end(), [](char d) { return d != 0; })) {
                ss.full_blocks.pop_front();
                std::fill(ss.succ.begin(), ss.succ.end(), 0);
                std::fill(ss.done.begin(), ss.done.end(), 0);
            }
        }
        acc.run.max_q = std::max(acc.run.max_q, slot_max_q);
        if (t <= horizon / 2) acc.run.max_q_first_half = acc.run.max_q;
    }

    for (std::size_t h = 0; h < m; ++h) {
        for (std::size_t li = 0; li < st[h].books.size(); ++li) {
            auto& tb = st[h].books[li];
            tb.rec.pending[0] = tb.rec.arrived[0] - tb.rec.delivered[0];
            if (li == 0) acc.run.session_delivered[h] = tb.rec.delivered[0];
            acc.run.tracks.push_back(std::move(tb.rec));
        }
    }
    return acc.run;
}

}  // namespace

SchemeRun run_scheme(const SchemeConfig& cfg, const Instance& inst, const ArrivalSpec& arrivals,
                     std::uint64_t horizon, std::uint64_t seed) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (inst.layout.sessions() != inst.stats.channels && cfg.kind != SchemeKind::kFifoBound)
        throw std::invalid_argument("instance has mismatched sessions/channels");
    arrivals.validate();

    switch (cfg.kind) {
        case SchemeKind::kMcMwc:
        case SchemeKind::kMwcStatic:
            return run_window_scheme(cfg, inst, arrivals, horizon, seed);
        case SchemeKind::kRlncStatic:
        case SchemeKind::kRlncRandom:
            return run_rlnc(cfg, inst, arrivals, horizon, seed);
        case SchemeKind::kFifoBound:
            return run_fifo_bound(cfg, inst, arrivals, horizon, seed);
    }
    throw std::logic_error("unknown scheme");
}

}  // namespace mcmwc::schemes
