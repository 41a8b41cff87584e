#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mcmwc/rng.hpp"

// Network instance generation: sessions, receiver sets, channel success
// probabilities, arrival processes, session-size distributions.

namespace mcmwc::topo {

// Per-(receiver, channel) success probability matrix, row-major by receiver.
struct ChannelStats {
    std::size_t receivers = 0;
    std::size_t channels = 0;
    std::vector<double> gamma;

    double at(std::size_t i, std::size_t j) const { return gamma[i * channels + j]; }
    double& at(std::size_t i, std::size_t j) { return gamma[i * channels + j]; }
    double row_sum(std::size_t i) const {
        double s = 0;
        for (std::size_t j = 0; j < channels; ++j) s += at(i, j);
        return s;
    }
};

// m sessions over m channels; receiver ids are global and sets may intersect.
struct SessionLayout {
    std::size_t channels = 0;  // m = session count = channel count
    std::vector<std::vector<std::uint32_t>> receiver_sets;

    std::size_t sessions() const { return receiver_sets.size(); }
    std::size_t receiver_universe() const;  // max id + 1
    std::vector<std::uint32_t> receiver_union() const;
};

struct GammaDist {
    enum class Kind { kUniform01, kDegenerate, kBeta, kEmpirical };
    Kind kind = Kind::kUniform01;
    double a = 0;  // degenerate value, or beta alpha
    double b = 0;  // beta beta
    std::vector<double> samples;  // sorted; empirical CDF support (e.g. from a trace)

    static GammaDist uniform01() { return {Kind::kUniform01, 0, 0, {}}; }
    static GammaDist degenerate(double g);
    static GammaDist beta(double alpha, double beta);
    static GammaDist empirical(std::vector<double> values);

    double sample(Rng& rng) const;
    double cdf(double y) const;
    double mean() const;
    // density on [0,1]; used by quadrature in the analysis module (not
    // defined for degenerate/empirical kinds)
    double pdf(double y) const;
};

struct SessionSizeDist {
    enum class Kind { kDegenerate, kPoisson, kGeometric, kDiscreteUniform };
    Kind kind = Kind::kDegenerate;
    std::uint64_t n = 1;  // target mean

    static SessionSizeDist degenerate(std::uint64_t n);
    static SessionSizeDist poisson(std::uint64_t n);
    static SessionSizeDist geometric(std::uint64_t n);
    static SessionSizeDist discrete_uniform(std::uint64_t n);

    // always >= 1 (poisson resamples; geometric/uniform are >= 1 by construction)
    std::uint64_t sample(Rng& rng) const;
    double mean() const { return static_cast<double>(n); }
};

// Finite-support per-session per-slot arrival distribution a_h[t].
struct ArrivalSpec {
    std::vector<std::pair<std::uint32_t, double>> support;  // (value, prob)

    static ArrivalSpec bernoulli(double lambda);
    static ArrivalSpec batch(std::vector<std::pair<std::uint32_t, double>> support);

    double rate() const;  // E[a]
    std::uint32_t max_value() const;
    std::uint32_t sample(Rng& rng) const;
    // E[e^{theta a}]; pass negative theta for the decoder-side transform
    double mgf(double theta) const;
    void validate() const;  // probs sum to 1, values bounded
};

struct OverlapMode {
    bool disjoint = true;
    double share_prob = 0.0;  // shared(p): each foreign receiver joins with prob p

    static OverlapMode make_disjoint() { return {true, 0.0}; }
    static OverlapMode shared(double p) { return {false, p}; }
};

struct Instance {
    SessionLayout layout;
    ChannelStats stats;
};

// s_h i.i.d. from size_dist; receiver sets disjoint or shared(p); each
// gamma_{i,j} i.i.d. from gamma_dist. Same seed, same instance.
Instance sample_instance(std::size_t m, std::uint64_t n, const GammaDist& gamma_dist,
                         const SessionSizeDist& size_dist, const OverlapMode& overlap,
                         std::uint64_t seed);

// CSV `receiver,channel,gamma` with header; '#' comment lines ignored.
ChannelStats load_trace(const std::string& path);

// One slot of channel states: out[i*channels+j] = Bernoulli(gamma_{i,j}).
// Draw order is receiver-major, channel-minor.
void realize_channels(const ChannelStats& stats, Rng& rng, std::vector<std::uint8_t>& out);

}  // namespace mcmwc::topo
