#include "mcmwc/window_code.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace mcmwc::wc {

namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace

std::vector<std::uint8_t> CodedPacket::serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(26 + payload.size());
    put_u64(out, arrivals);
    put_u64(out, removed);
    put_u64(out, slot);
    out.push_back(static_cast<std::uint8_t>(channel));
    out.push_back(static_cast<std::uint8_t>(channel >> 8));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

CodedPacket CodedPacket::deserialize(const std::vector<std::uint8_t>& bytes,
                                     std::size_t payload_symbols) {
    if (bytes.size() != 26 + payload_symbols)
        throw std::invalid_argument("coded packet has wrong length");
    CodedPacket pkt;
    pkt.arrivals = get_u64(bytes.data());
    pkt.removed = get_u64(bytes.data() + 8);
    pkt.slot = get_u64(bytes.data() + 16);
    pkt.channel = static_cast<std::uint16_t>(bytes[24] | (bytes[25] << 8));
    pkt.payload.assign(bytes.begin() + 26, bytes.end());
    return pkt;
}

void Encoder::begin_slot(std::uint64_t t) {
    if (pending_removal_ > 0) {
        z_ += pending_removal_;
        if (!counting_only_)
            window_.erase(window_.begin(), window_.begin() + static_cast<long>(pending_removal_));
        pending_removal_ = 0;
    }
    t_ = t;
}

void Encoder::ingest(const std::vector<Payload>& arrivals) {
    for (const auto& p : arrivals) {
        if (p.size() != symbols_) throw std::invalid_argument("payload length mismatch");
        window_.push_back(p);
    }
    a_ += arrivals.size();
}

void Encoder::ingest_count(std::uint64_t count) {
    counting_only_ = true;
    a_ += count;
}

std::vector<CodedPacket> Encoder::encode() const {
    std::vector<CodedPacket> out(channels_);
    for (std::size_t j = 0; j < channels_; ++j) {
        CodedPacket& pkt = out[j];
        pkt.arrivals = a_;
        pkt.removed = z_;
        pkt.slot = t_;
        pkt.channel = static_cast<std::uint16_t>(j);
        pkt.payload.assign(symbols_, 0);
        if (counting_only_) continue;
        for (std::uint64_t k = 0; k < window_.size(); ++k) {
            std::uint64_t index = z_ + 1 + k;
            FieldElement phi = coefficient(seed_, t_, static_cast<std::uint32_t>(j), index);
            gf::payload_axpy(pkt.payload, phi, window_[k]);
        }
    }
    return out;
}

void Encoder::apply_feedback(bool nak) {
    pending_removal_ = nak ? 0 : removal_chunk();
}

bool feedback_round(Encoder& enc, const std::vector<std::uint64_t>& decoder_counts) {
    std::uint64_t chunk = enc.removal_chunk();
    if (chunk == 0) {
        enc.apply_feedback(false);
        return false;
    }
    std::uint64_t need = enc.removed_total() + chunk;
    bool nak = false;
    for (auto s : decoder_counts)
        if (s < need) {
            nak = true;
            break;
        }
    enc.apply_feedback(nak);
    return nak;
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> IdealDecoder::try_decode(std::uint64_t slot) {
    if (s_ != a_) return std::nullopt;
    if (record_log_) decode_log_.push_back(slot);
    auto range = std::make_pair(delivered_, a_);
    delivered_ = a_;
    return range;
}

const Payload* ConcreteDecoder::value_of(std::uint64_t index) const {
    if (index <= value_base_ || index > delivered_) return nullptr;
    return &values_[index - value_base_ - 1];
}

bool ConcreteDecoder::receive(const CodedPacket& pkt) {
    if (pkt.removed > pkt.arrivals) throw std::runtime_error("header inconsistency: Z > A");
    if (pkt.idle()) return false;
    if (pkt.arrivals > a_) throw std::runtime_error("header inconsistency: A ahead of arrivals");

    std::uint64_t lo = pkt.removed + 1;
    std::uint64_t len = pkt.arrivals - pkt.removed;
    std::vector<FieldElement> coeffs(len);
    for (std::uint64_t k = 0; k < len; ++k)
        coeffs[k] = coefficient(seed_, pkt.slot, pkt.channel, lo + k);
    Payload payload = pkt.payload;

    // strip already-decoded indices using the cached values
    for (std::uint64_t k = 0; k < len && lo + k <= delivered_; ++k) {
        if (coeffs[k] == 0) continue;
        if (const Payload* v = value_of(lo + k)) {
            gf::payload_axpy(payload, coeffs[k], *v);
            mac_ops_ += symbols_;
            coeffs[k] = 0;
        }
    }

    // reduce against existing pivot rows
    std::uint64_t off = 0;
    while (off < len) {
        if (coeffs[off] == 0) {
            ++off;
            continue;
        }
        auto it = rows_.find(lo + off);
        if (it == rows_.end()) break;
        const Row& pivot = it->second;
        FieldElement f = coeffs[off];
        for (std::uint64_t k = 0; k < pivot.coeffs.size(); ++k)
            coeffs[off + k] ^= gf::gf_mul(f, pivot.coeffs[k]);
        gf::payload_axpy(payload, f, pivot.payload);
        mac_ops_ += symbols_;
    }
    if (off == len) {
        // dependent row; a nonzero payload here would mean corrupted arithmetic
        for (auto b : payload)
            if (b != 0) throw std::runtime_error("rank inconsistency: dependent row with payload");
        return false;
    }

    Row row;
    row.lead = lo + off;
    row.coeffs.assign(coeffs.begin() + static_cast<long>(off), coeffs.end());
    row.payload = std::move(payload);
    FieldElement inv = gf::gf_inv(row.coeffs[0]);
    if (inv != 1) {
        for (auto& c : row.coeffs) c = gf::gf_mul(inv, c);
        gf::payload_scale(row.payload, inv);
        mac_ops_ += symbols_;
    }
    rows_.emplace(row.lead, std::move(row));

    while (s_ < a_ && (s_ + 1 <= delivered_ || rows_.count(s_ + 1))) ++s_;
    return true;
}

std::optional<std::vector<Payload>> ConcreteDecoder::try_decode(std::uint64_t slot) {
    if (s_ != a_) return std::nullopt;
    if (record_log_) decode_log_.push_back(slot);

    std::vector<Payload> decoded;
    std::uint64_t lo = delivered_;
    std::uint64_t count = a_ - delivered_;
    decoded.resize(count);
    // back-substitute from the highest index down; every index in (lo, a_]
    // must have a pivot row when Q == 0
    for (std::uint64_t index = a_; index > lo; --index) {
        auto it = rows_.find(index);
        if (it == rows_.end()) throw std::runtime_error("rank inconsistency: missing pivot");
        Row& row = it->second;
        Payload value = std::move(row.payload);
        mac_ops_ += symbols_;  // materialization pass for the delivered packet
        for (std::uint64_t k = 1; k < row.coeffs.size(); ++k) {
            if (row.coeffs[k] == 0) continue;
            std::uint64_t ref = index + k;
            gf::payload_axpy(value, row.coeffs[k], decoded[ref - lo - 1]);
            mac_ops_ += symbols_;
        }
        decoded[index - lo - 1] = std::move(value);
        rows_.erase(it);
    }
    for (auto& v : decoded) values_.push_back(v);
    delivered_ = a_;
    return decoded;
}

void ConcreteDecoder::prune(std::uint64_t z) {
    std::uint64_t keep_from = std::min(z, delivered_);  // keep values in (z, delivered]
    while (value_base_ < keep_from && !values_.empty()) {
        values_.pop_front();
        ++value_base_;
    }
}

}  // namespace mcmwc::wc
