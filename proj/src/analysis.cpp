#include "mcmwc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcmwc::analysis {

namespace {

constexpr double kGolden = 0.6180339887498949;

// golden-section maximizer for a concave objective; returns (theta, value)
template <typename F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, double tol) {
    double a = lo, b = hi;
    double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = f(d);
        }
    }
    double theta = 0.5 * (a + b);
    return {theta, f(theta)};
}

// maximize with bracket doubling when the optimum lands on an endpoint
template <typename F>
RateFunctionResult bracketed_max(F&& f) {
    double lo = -50, hi = 50;
    RateFunctionResult res;
    for (int attempt = 0; attempt < 12; ++attempt) {
        auto [theta, value] = golden_max(f, lo, hi, 1e-9);
        double span = hi - lo;
        if (theta - lo < 1e-4 * span) {
            lo -= span;
            continue;
        }
        if (hi - theta < 1e-4 * span) {
            hi += span;
            continue;
        }
        res.theta_star = theta;
        res.phi = std::max(value, 0.0);
        res.converged = true;
        return res;
    }
    auto [theta, value] = golden_max(f, lo, hi, 1e-9);
    res.theta_star = theta;
    res.phi = std::max(value, 0.0);
    res.converged = false;
    return res;
}

}  // namespace

RateFunctionResult rate_function(const std::vector<double>& gamma_row,
                                 const topo::ArrivalSpec& arrivals, std::size_t m) {
    if (gamma_row.size() != m) throw std::invalid_argument("gamma row length must equal m");
    for (double g : gamma_row)
        if (g < 0.0 || g > 1.0) throw std::invalid_argument("gamma outside [0,1]");
    arrivals.validate();

    auto objective = [&](double theta) {
        double f = -static_cast<double>(m) * std::log(arrivals.mgf(-theta));
        double e = std::exp(theta);
        for (double g : gamma_row) f -= std::log(g * e + 1.0 - g);
        return std::isfinite(f) ? f : -std::numeric_limits<double>::infinity();
    };
    return bracketed_max(objective);
}

double asymptotic_rate(const topo::GammaDist& gamma_dist, const topo::ArrivalSpec& arrivals) {
    arrivals.validate();
    double lambda = arrivals.rate();
    double gbar = gamma_dist.mean();
    if (lambda >= gbar) throw std::domain_error("no positive drift: lambda >= mean gamma");

    const bool degenerate = gamma_dist.kind == topo::GammaDist::Kind::kDegenerate;
    // E[log(gamma e^theta + 1 - gamma)]: 1e5-point midpoint quadrature for
    // densities, a plain sample average for empirical (trace-derived) CDFs
    constexpr int kQuad = 100000;
    std::vector<double> ys, ws;
    if (gamma_dist.kind == topo::GammaDist::Kind::kEmpirical) {
        ys = gamma_dist.samples;
        ws.assign(ys.size(), 1.0 / static_cast<double>(ys.size()));
    } else if (!degenerate) {
        ys.resize(kQuad);
        ws.resize(kQuad);
        double h = 1.0 / kQuad;
        for (int i = 0; i < kQuad; ++i) {
            ys[i] = (i + 0.5) * h;
            ws[i] = gamma_dist.pdf(ys[i]) * h;
        }
    }
    auto objective = [&](double theta) {
        double f = -std::log(arrivals.mgf(-theta));
        double e = std::exp(theta);
        if (degenerate) {
            double g = gamma_dist.mean();
            f -= std::log(g * e + 1.0 - g);
        } else {
            double acc = 0;
            for (std::size_t i = 0; i < ys.size(); ++i)
                acc += ws[i] * std::log(ys[i] * e + 1.0 - ys[i]);
            f -= acc;
        }
        return std::isfinite(f) ? f : -std::numeric_limits<double>::infinity();
    };
    return bracketed_max(objective).phi;
}

double phi_const(const topo::ArrivalSpec& arrivals) {
    arrivals.validate();
    if (arrivals.rate() >= 1.0) throw std::domain_error("unstable FIFO: E[a] >= 1");
    if (arrivals.max_value() <= 1) return std::numeric_limits<double>::infinity();

    auto g = [&](double theta) { return std::log(arrivals.mgf(theta)) - theta; };
    // g is convex with g(0) = 0 and g'(0) < 0; find the positive crossing
    double hi = 0;
    for (double theta = 0.5; theta <= 200.0; theta *= 2.0) {
        if (g(theta) > 0) {
            hi = std::min(theta, 200.0);
            break;
        }
    }
    if (hi == 0) {
        if (g(200.0) <= 0) return std::numeric_limits<double>::infinity();
        hi = 200.0;
    }
    double lo = hi / 2.0;
    while (g(lo) > 0) lo /= 2.0;  // ensure bracketing from below
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        (g(mid) < 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

bool capacity_membership(const std::vector<double>& lambda_vec, const topo::ChannelStats& stats,
                         const topo::SessionLayout& layout) {
    if (lambda_vec.size() != layout.sessions())
        throw std::invalid_argument("lambda vector length must equal session count");
    double sum = 0;
    for (double l : lambda_vec) {
        if (l < 0) throw std::invalid_argument("negative arrival rate");
        sum += l;
    }
    double lo = std::numeric_limits<double>::infinity();
    for (auto i : layout.receiver_union()) lo = std::min(lo, stats.row_sum(i));
    double mm = static_cast<double>(layout.channels);
    return sum / mm <= lo / mm + 1e-12;
}

double bottleneck_probability(double lambda, std::size_t m, std::uint64_t n_receivers,
                              const topo::GammaDist& gamma_dist) {
    if (lambda <= 0 || m < 1) throw std::invalid_argument("need lambda > 0 and m >= 1");
    double f = gamma_dist.cdf(lambda / static_cast<double>(m));
    double p_in = std::pow(f, static_cast<double>(m));  // one receiver is a bottleneck
    return 1.0 - std::pow(1.0 - p_in, static_cast<double>(n_receivers));
}

std::size_t sufficient_channels(std::uint64_t n, double gamma_bar, double lambda) {
    if (lambda >= gamma_bar) throw std::invalid_argument("lambda must be below mean gamma");
    double d = gamma_bar - lambda;
    return static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(n)) / (d * d)));
}

DecayFit estimate_decay_rate(const TailCurve& tail) {
    const auto& prob = tail.prob;
    std::size_t positive = 0;
    for (double p : prob)
        if (p > 0) positive++;
    if (positive < 5) throw std::invalid_argument("insufficient tail mass");

    std::size_t k_hi = 0;
    if (!tail.exceed.empty()) {
        bool found = false;
        for (std::size_t k = 0; k < tail.exceed.size() && k < prob.size(); ++k)
            if (tail.exceed[k] >= 50) {
                k_hi = k;
                found = true;
            }
        if (!found)
            for (std::size_t k = 0; k < prob.size(); ++k)
                if (prob[k] > 0) k_hi = k;
    } else {
        for (std::size_t k = 0; k < prob.size(); ++k)
            if (prob[k] > 0) k_hi = k;
    }

    // skip the first 20% of probability mass (pre-asymptotic regime)
    std::size_t k_lo = 0;
    while (k_lo < k_hi && prob[k_lo] > 0.8) ++k_lo;
    if (k_hi - k_lo + 1 < 5) k_lo = k_hi >= 4 ? k_hi - 4 : 0;

    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    std::size_t n = 0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        if (prob[k] <= 0) continue;
        double x = static_cast<double>(k);
        double y = -std::log(prob[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++n;
    }
    if (n < 5) throw std::invalid_argument("insufficient tail mass in fit window");

    double dn = static_cast<double>(n);
    double varx = sxx - sx * sx / dn;
    double cov = sxy - sx * sy / dn;
    double vary = syy - sy * sy / dn;
    DecayFit fit;
    fit.k_lo = k_lo;
    fit.k_hi = k_hi;
    fit.rate = varx > 0 ? std::max(cov / varx, 0.0) : 0.0;
    if (vary <= 1e-15) {
        fit.r2 = 1.0;  // flat or perfectly fit curve
    } else {
        double ss_res = vary - cov * cov / varx;
        fit.r2 = 1.0 - ss_res / vary;
    }
    return fit;
}

}  // namespace mcmwc::analysis
