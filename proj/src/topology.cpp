#include "mcmwc/topology.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mcmwc::topo {

std::size_t SessionLayout::receiver_universe() const {
    std::uint32_t hi = 0;
    bool any = false;
    for (const auto& s : receiver_sets)
        for (auto r : s) {
            hi = std::max(hi, r);
            any = true;
        }
    return any ? hi + 1 : 0;
}

std::vector<std::uint32_t> SessionLayout::receiver_union() const {
    std::vector<std::uint32_t> u;
    for (const auto& s : receiver_sets) u.insert(u.end(), s.begin(), s.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
}

GammaDist GammaDist::degenerate(double g) {
    if (g < 0.0 || g > 1.0) throw std::invalid_argument("degenerate gamma outside [0,1]");
    return {Kind::kDegenerate, g, 0, {}};
}

GammaDist GammaDist::beta(double alpha, double beta) {
    if (alpha <= 0.0 || beta <= 0.0) throw std::invalid_argument("beta parameters must be positive");
    return {Kind::kBeta, alpha, beta, {}};
}

GammaDist GammaDist::empirical(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("empirical gamma needs at least one sample");
    for (double v : values)
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("empirical gamma outside [0,1]");
    std::sort(values.begin(), values.end());
    return {Kind::kEmpirical, 0, 0, std::move(values)};
}

double GammaDist::sample(Rng& rng) const {
    switch (kind) {
        case Kind::kUniform01: return rng.u01();
        case Kind::kDegenerate: return a;
        case Kind::kBeta: {
            std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
            double x = ga(rng.engine());
            double y = gb(rng.engine());
            return x / (x + y);
        }
        case Kind::kEmpirical: return samples[rng.below(samples.size())];
    }
    return 0;
}

namespace {
double beta_cdf(double y, double a, double b) {
    // regularized incomplete beta via midpoint quadrature; plenty for tests
    if (y <= 0) return 0;
    if (y >= 1) return 1;
    const int n = 4096;
    double lognorm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    double sum = 0, h = y / n;
    for (int i = 0; i < n; ++i) {
        double x = (i + 0.5) * h;
        sum += std::exp(lognorm + (a - 1) * std::log(x) + (b - 1) * std::log1p(-x));
    }
    return std::min(1.0, sum * h);
}
}  // namespace

double GammaDist::cdf(double y) const {
    switch (kind) {
        case Kind::kUniform01: return std::clamp(y, 0.0, 1.0);
        case Kind::kDegenerate: return y >= a ? 1.0 : 0.0;
        case Kind::kBeta: return beta_cdf(y, a, b);
        case Kind::kEmpirical: {
            auto it = std::upper_bound(samples.begin(), samples.end(), y);
            return static_cast<double>(it - samples.begin()) /
                   static_cast<double>(samples.size());
        }
    }
    return 0;
}

double GammaDist::mean() const {
    switch (kind) {
        case Kind::kUniform01: return 0.5;
        case Kind::kDegenerate: return a;
        case Kind::kBeta: return a / (a + b);
        case Kind::kEmpirical: {
            double s = 0;
            for (double v : samples) s += v;
            return s / static_cast<double>(samples.size());
        }
    }
    return 0;
}

double GammaDist::pdf(double y) const {
    if (y < 0.0 || y > 1.0) return 0;
    switch (kind) {
        case Kind::kUniform01: return 1.0;
        case Kind::kDegenerate: throw std::logic_error("degenerate gamma has no density");
        case Kind::kEmpirical: throw std::logic_error("empirical gamma has no density");
        case Kind::kBeta: {
            double lognorm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
            return std::exp(lognorm + (a - 1) * std::log(y) + (b - 1) * std::log1p(-y));
        }
    }
    return 0;
}

SessionSizeDist SessionSizeDist::degenerate(std::uint64_t n) {
    if (n < 1) throw std::invalid_argument("session size must be >= 1");
    return {Kind::kDegenerate, n};
}
SessionSizeDist SessionSizeDist::poisson(std::uint64_t n) {
    if (n < 1) throw std::invalid_argument("session size must be >= 1");
    return {Kind::kPoisson, n};
}
SessionSizeDist SessionSizeDist::geometric(std::uint64_t n) {
    if (n < 1) throw std::invalid_argument("session size must be >= 1");
    return {Kind::kGeometric, n};
}
SessionSizeDist SessionSizeDist::discrete_uniform(std::uint64_t n) {
    if (n < 1) throw std::invalid_argument("session size must be >= 1");
    return {Kind::kDiscreteUniform, n};
}

namespace {
// exact Poisson via summed exponentials; O(lambda), no underflow at large lambda
std::uint64_t poisson_sample(Rng& rng, double lambda) {
    double t = 0;
    std::uint64_t k = 0;
    while (true) {
        t += -std::log(1.0 - rng.u01());
        if (t >= lambda) return k;
        ++k;
    }
}
}  // namespace

std::uint64_t SessionSizeDist::sample(Rng& rng) const {
    switch (kind) {
        case Kind::kDegenerate: return n;
        case Kind::kPoisson: {
            std::uint64_t s = 0;
            do {
                s = poisson_sample(rng, static_cast<double>(n));
            } while (s < 1);
            return s;
        }
        case Kind::kGeometric: {
            if (n == 1) return 1;
            // support {1,2,...}, success prob 1/n, mean exactly n
            double p = 1.0 / static_cast<double>(n);
            double u = 1.0 - rng.u01();  // in (0,1]
            return 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
        }
        case Kind::kDiscreteUniform:
            // {1, ..., 2n-1}, mean exactly n
            return 1 + rng.below(2 * n - 1);
    }
    return 1;
}

ArrivalSpec ArrivalSpec::bernoulli(double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("bernoulli rate outside [0,1]");
    return {{{0u, 1.0 - lambda}, {1u, lambda}}};
}

ArrivalSpec ArrivalSpec::batch(std::vector<std::pair<std::uint32_t, double>> support) {
    ArrivalSpec s{std::move(support)};
    s.validate();
    return s;
}

void ArrivalSpec::validate() const {
    if (support.empty()) throw std::invalid_argument("empty arrival support");
    double tot = 0;
    for (auto& [v, p] : support) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("arrival probability outside [0,1]");
        if (v > 1u << 20) throw std::invalid_argument("arrival batch value unreasonably large");
        tot += p;
    }
    if (std::abs(tot - 1.0) > 1e-9) throw std::invalid_argument("arrival probabilities do not sum to 1");
}

double ArrivalSpec::rate() const {
    double r = 0;
    for (auto& [v, p] : support) r += v * p;
    return r;
}

std::uint32_t ArrivalSpec::max_value() const {
    std::uint32_t m = 0;
    for (auto& [v, p] : support)
        if (p > 0) m = std::max(m, v);
    return m;
}

std::uint32_t ArrivalSpec::sample(Rng& rng) const {
    double u = rng.u01();
    double acc = 0;
    for (auto& [v, p] : support) {
        acc += p;
        if (u < acc) return v;
    }
    return support.back().first;
}

double ArrivalSpec::mgf(double theta) const {
    double s = 0;
    for (auto& [v, p] : support) s += p * std::exp(theta * static_cast<double>(v));
    return s;
}

Instance sample_instance(std::size_t m, std::uint64_t n, const GammaDist& gamma_dist,
                         const SessionSizeDist& size_dist, const OverlapMode& overlap,
                         std::uint64_t seed) {
    if (m < 1 || n < 1) throw std::invalid_argument("need m >= 1 and n >= 1");
    Rng rng(derive_seed(seed, 0x70706fULL));

    Instance inst;
    inst.layout.channels = m;
    inst.layout.receiver_sets.resize(m);

    std::uint32_t next_id = 0;
    for (std::size_t h = 0; h < m; ++h) {
        std::uint64_t sh = size_dist.sample(rng);
        auto& set = inst.layout.receiver_sets[h];
        set.reserve(sh);
        for (std::uint64_t k = 0; k < sh; ++k) set.push_back(next_id++);
    }

    if (!overlap.disjoint && overlap.share_prob > 0.0) {
        // each existing receiver joins each foreign session independently
        std::vector<std::vector<std::uint32_t>> extra(m);
        for (std::size_t h = 0; h < m; ++h)
            for (auto r : inst.layout.receiver_sets[h])
                for (std::size_t h2 = 0; h2 < m; ++h2)
                    if (h2 != h && rng.bernoulli(overlap.share_prob)) extra[h2].push_back(r);
        for (std::size_t h = 0; h < m; ++h) {
            auto& set = inst.layout.receiver_sets[h];
            set.insert(set.end(), extra[h].begin(), extra[h].end());
            std::sort(set.begin(), set.end());
            set.erase(std::unique(set.begin(), set.end()), set.end());
        }
    }

    inst.stats.receivers = next_id;
    inst.stats.channels = m;
    inst.stats.gamma.resize(static_cast<std::size_t>(next_id) * m);
    for (std::size_t i = 0; i < inst.stats.receivers; ++i)
        for (std::size_t j = 0; j < m; ++j) inst.stats.at(i, j) = gamma_dist.sample(rng);
    return inst;
}

ChannelStats load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);

    std::map<std::pair<std::uint64_t, std::uint64_t>, double> cells;
    std::uint64_t max_r = 0, max_c = 0;
    std::string line;
    bool header_seen = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // `receiver,channel,gamma`
            continue;
        }
        std::stringstream ss(line);
        std::string f0, f1, f2, rest;
        if (!std::getline(ss, f0, ',') || !std::getline(ss, f1, ',') || !std::getline(ss, f2, ','))
            throw std::runtime_error("malformed trace row at line " + std::to_string(lineno));
        if (std::getline(ss, rest, ','))
            throw std::runtime_error("inconsistent column count at line " + std::to_string(lineno));
        std::uint64_t r, c;
        double g;
        try {
            r = std::stoull(f0);
            c = std::stoull(f1);
            g = std::stod(f2);
        } catch (const std::exception&) {
            throw std::runtime_error("malformed trace row at line " + std::to_string(lineno));
        }
        if (g < 0.0 || g > 1.0)
            throw std::runtime_error("gamma outside [0,1] at line " + std::to_string(lineno));
        if (!cells.emplace(std::make_pair(r, c), g).second)
            throw std::runtime_error("duplicate entry at line " + std::to_string(lineno));
        max_r = std::max(max_r, r);
        max_c = std::max(max_c, c);
    }
    if (cells.empty()) throw std::runtime_error("trace file has no data rows");

    ChannelStats stats;
    stats.receivers = max_r + 1;
    stats.channels = max_c + 1;
    if (cells.size() != stats.receivers * stats.channels)
        throw std::runtime_error("trace matrix has missing entries");
    stats.gamma.resize(stats.receivers * stats.channels);
    for (auto& [rc, g] : cells) stats.at(rc.first, rc.second) = g;
    return stats;
}

void realize_channels(const ChannelStats& stats, Rng& rng, std::vector<std::uint8_t>& out) {
    out.resize(stats.gamma.size());
    for (std::size_t k = 0; k < stats.gamma.size(); ++k)
        out[k] = rng.bernoulli(stats.gamma[k]) ? 1 : 0;
}

}  // namespace mcmwc::topo
