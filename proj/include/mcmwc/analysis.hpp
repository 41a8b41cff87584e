#pragma once

#include <cstdint>
#include <vector>

#include "mcmwc/topology.hpp"

// Closed-form and numerical evaluation of the theory: large-deviations rate
// functions, the channel-allocation delay constant, capacity-region
// membership, bottleneck probabilities, and empirical decay-rate fits.

namespace mcmwc::analysis {

struct RateFunctionResult {
    double phi = 0;         // nats/slot, >= 0
    double theta_star = 0;  // maximizer
    bool converged = false;
};

// sup_theta { -m log E[e^{-theta a}] - sum_j log(gamma_j e^theta + 1 - gamma_j) },
// clamped at 0. Golden-section search with bracket doubling from [-50, 50].
RateFunctionResult rate_function(const std::vector<double>& gamma_row,
                                 const topo::ArrivalSpec& arrivals, std::size_t m);

// Per-channel limit of rate_function/m: the gamma expectation is analytic for
// degenerate distributions and quadrature (1e5 points) otherwise.
// Requires lambda < mean gamma.
double asymptotic_rate(const topo::GammaDist& gamma_dist, const topo::ArrivalSpec& arrivals);

// sup { theta > 0 : log E[e^{theta a}] < theta }. Infinity when arrivals never
// batch (support max <= 1). Requires E[a] < 1.
double phi_const(const topo::ArrivalSpec& arrivals);

// (1/m) sum lambda_h <= (1/m) min_{union} sum_j gamma_{i,j}
bool capacity_membership(const std::vector<double>& lambda_vec, const topo::ChannelStats& stats,
                         const topo::SessionLayout& layout);

// P(bottleneck set nonempty) = 1 - (1 - F(lambda/m)^m)^n for fixed receiver count
double bottleneck_probability(double lambda, std::size_t m, std::uint64_t n_receivers,
                              const topo::GammaDist& gamma_dist);

// Sufficient channel count of the logarithmic scaling law: ceil(log n / (gbar - lambda)^2).
std::size_t sufficient_channels(std::uint64_t n, double gamma_bar, double lambda);

struct TailCurve {
    std::vector<double> prob;           // P(D > k), k = 0..
    std::vector<std::uint64_t> exceed;  // event counts; may be empty for synthetic tails
};

struct DecayFit {
    double rate = 0;
    double r2 = 0;
    std::size_t k_lo = 0;
    std::size_t k_hi = 0;
};

// Least-squares slope of -log tail(k) over [k0, k_max]: k0 skips the first 20%
// of probability mass, k_max is the last point with >= 50 events.
DecayFit estimate_decay_rate(const TailCurve& tail);

}  // namespace mcmwc::analysis
