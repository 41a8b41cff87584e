#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mcmwc/gf256.hpp"
#include "mcmwc/rng.hpp"

// Moving-window encoder/decoder state machines in two fidelities: an idealized
// counting model (the S/Q recursions) and a concrete GF(2^8) model that encodes
// payloads and Gaussian-eliminates received combinations, plus the anonymous
// NAK feedback rule.

namespace mcmwc::wc {

using gf::FieldElement;
using gf::Payload;

// Combination coefficient for packet `index` on `channel` in slot `slot`.
// Keyed counter-mode draw: transmitter and every receiver regenerate the same
// value from the shared seed, uniform over all 256 field elements.
inline FieldElement coefficient(std::uint64_t seed, std::uint64_t slot, std::uint32_t channel,
                                std::uint64_t index) {
    std::uint64_t h = mix64(seed ^ 0x8BB84B93962EACC9ull);
    h = mix64(h ^ slot);
    h = mix64(h ^ channel);
    h = mix64(h ^ index);
    return static_cast<FieldElement>(h);
}

struct CodedPacket {
    std::uint64_t arrivals = 0;   // A[t] at encode time
    std::uint64_t removed = 0;    // Z[t] at encode time
    std::uint64_t slot = 0;       // t
    std::uint16_t channel = 0;    // j
    Payload payload;

    bool idle() const { return arrivals == removed; }

    // little-endian u64 A, Z, t, u16 channel, then payload bytes
    std::vector<std::uint8_t> serialize() const;
    static CodedPacket deserialize(const std::vector<std::uint8_t>& bytes,
                                   std::size_t payload_symbols);
};

// Encoder window over the merged packet stream. Packets are indexed globally
// from 1 in arrival order; the window holds indices (Z, A].
class Encoder {
  public:
    Encoder(std::size_t channels, std::size_t payload_symbols, std::uint64_t coeff_seed)
        : channels_(channels), symbols_(payload_symbols), seed_(coeff_seed) {}

    // Applies the removal scheduled by the previous slot's feedback, then
    // advances the clock.
    void begin_slot(std::uint64_t t);

    // Append newly arrived packets; A grows by arrivals.size().
    void ingest(const std::vector<Payload>& arrivals);
    void ingest_count(std::uint64_t count);  // counting-only mode (no payloads)

    // m coded packets for the current slot; idle (all-zero) when the window is empty.
    std::vector<CodedPacket> encode() const;

    // Anonymous feedback outcome for this slot: when no NAK was raised the
    // oldest min(m, window) packets leave the window at the start of the next slot.
    void apply_feedback(bool nak);

    std::uint64_t arrivals_total() const { return a_; }
    std::uint64_t removed_total() const { return z_; }
    std::uint64_t window_size() const { return a_ - z_; }
    std::uint64_t slot() const { return t_; }
    std::uint64_t coeff_seed() const { return seed_; }
    std::size_t payload_symbols() const { return symbols_; }

    // Number of oldest packets the NAK rule keys on this slot.
    std::uint64_t removal_chunk() const {
        return std::min<std::uint64_t>(channels_, window_size());
    }

  private:
    std::size_t channels_;
    std::size_t symbols_;
    std::uint64_t seed_;
    std::uint64_t a_ = 0;  // cumulative arrivals A[t]
    std::uint64_t z_ = 0;  // cumulative removals Z[t]
    std::uint64_t t_ = 0;
    std::uint64_t pending_removal_ = 0;
    std::deque<Payload> window_;  // payload of packet z_+1+k at window_[k]; empty in counting mode
    bool counting_only_ = false;
};

// NAK decision for one slot given all receivers' determinable counts S_i[t].
// Returns true (NAK) iff some receiver lacks one of the oldest min(m, window)
// packets; on false the encoder schedules the removal.
bool feedback_round(Encoder& enc, const std::vector<std::uint64_t>& decoder_counts);

// Idealized decoder: every reception is innovative until S reaches A.
class IdealDecoder {
  public:
    // a_t = merged arrivals this slot, c_t = successful receptions this slot
    void receive(std::uint64_t a_t, std::uint32_t c_t) {
        a_ += a_t;
        std::uint64_t room = a_ - s_;
        s_ += std::min<std::uint64_t>(c_t, room);
    }

    // Decode moment iff Q == 0; returns the newly delivered index range (lo, hi].
    std::optional<std::pair<std::uint64_t, std::uint64_t>> try_decode(std::uint64_t slot);

    std::uint64_t arrivals() const { return a_; }
    std::uint64_t determinable() const { return s_; }
    std::uint64_t queue() const { return a_ - s_; }
    std::uint64_t delivered() const { return delivered_; }
    const std::vector<std::uint64_t>& decode_log() const { return decode_log_; }
    void set_record_log(bool on) { record_log_ = on; }

  private:
    std::uint64_t a_ = 0, s_ = 0, delivered_ = 0;
    bool record_log_ = false;
    std::vector<std::uint64_t> decode_log_;
};

// Concrete decoder: reduced coefficient rows over global indices with attached
// payloads. A packet is determinable iff a reduced row pivots at its index (or
// it was already delivered); S is the longest determinable prefix.
class ConcreteDecoder {
  public:
    ConcreteDecoder(std::size_t payload_symbols, std::uint64_t coeff_seed)
        : symbols_(payload_symbols), seed_(coeff_seed) {}

    void note_arrivals(std::uint64_t a_t) { a_ += a_t; }

    // Insert one received coded packet; regenerates its coefficient row from
    // the shared seed and reduces it into the basis. Returns true if the
    // reception produced a new pivot.
    bool receive(const CodedPacket& pkt);

    // Decode moment iff Q == 0; back-substitutes and returns the payloads of
    // the newly delivered indices (delivered, A].
    std::optional<std::vector<Payload>> try_decode(std::uint64_t slot);

    // Drop cached decoded values at indices <= z (left the encoder window).
    void prune(std::uint64_t z);

    std::uint64_t arrivals() const { return a_; }
    std::uint64_t determinable() const { return s_; }
    std::uint64_t queue() const { return a_ - s_; }
    std::uint64_t delivered() const { return delivered_; }
    std::uint64_t mac_ops() const { return mac_ops_; }
    const std::vector<std::uint64_t>& decode_log() const { return decode_log_; }
    void set_record_log(bool on) { record_log_ = on; }

  private:
    struct Row {
        std::uint64_t lead = 0;               // pivot index; coeffs[0] == 1
        std::vector<FieldElement> coeffs;     // over [lead, lead + coeffs.size())
        Payload payload;
    };

    const Payload* value_of(std::uint64_t index) const;

    std::size_t symbols_;
    std::uint64_t seed_;
    std::uint64_t a_ = 0, s_ = 0, delivered_ = 0;
    std::uint64_t mac_ops_ = 0;
    std::unordered_map<std::uint64_t, Row> rows_;
    std::deque<Payload> values_;     // decoded payloads for (value_base, delivered]
    std::uint64_t value_base_ = 0;
    bool record_log_ = false;
    std::vector<std::uint64_t> decode_log_;
};

}  // namespace mcmwc::wc
