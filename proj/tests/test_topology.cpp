#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mcmwc/topology.hpp"

using namespace mcmwc;
using namespace mcmwc::topo;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string("/tmp/") + name;
    std::ofstream f(path);
    f << content;
    return path;
}

}  // namespace

TEST_CASE("sample_instance shapes") {
    SUBCASE("one session, one receiver") {
        auto inst = sample_instance(1, 1, GammaDist::degenerate(0.7),
                                    SessionSizeDist::degenerate(1), OverlapMode::make_disjoint(), 1);
        CHECK(inst.layout.sessions() == 1);
        CHECK(inst.layout.receiver_sets[0].size() == 1);
        CHECK(inst.stats.receivers == 1);
        CHECK(inst.stats.channels == 1);
        CHECK(inst.stats.at(0, 0) == 0.7);
    }
    SUBCASE("two disjoint sessions of three") {
        auto inst = sample_instance(2, 3, GammaDist::uniform01(), SessionSizeDist::degenerate(3),
                                    OverlapMode::make_disjoint(), 5);
        CHECK(inst.stats.receivers == 6);
        CHECK(inst.stats.channels == 2);
        CHECK(inst.layout.receiver_union().size() == 6);
    }
    SUBCASE("identical seed gives a bit-identical instance") {
        auto a = sample_instance(3, 4, GammaDist::uniform01(), SessionSizeDist::poisson(4),
                                 OverlapMode::shared(0.2), 99);
        auto b = sample_instance(3, 4, GammaDist::uniform01(), SessionSizeDist::poisson(4),
                                 OverlapMode::shared(0.2), 99);
        CHECK(a.stats.gamma == b.stats.gamma);
        CHECK(a.layout.receiver_sets == b.layout.receiver_sets);
    }
    SUBCASE("shared overlap can only add receivers") {
        auto a = sample_instance(3, 5, GammaDist::uniform01(), SessionSizeDist::degenerate(5),
                                 OverlapMode::shared(0.5), 7);
        for (const auto& set : a.layout.receiver_sets) CHECK(set.size() >= 5);
    }
}

TEST_CASE("uniform gamma empirical mean near 0.5") {
    Rng rng(11);
    auto dist = GammaDist::uniform01();
    double sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += dist.sample(rng);
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("session size distributions have the right mean and are >= 1") {
    Rng rng(3);
    const std::uint64_t n = 20;
    const int draws = 100000;
    for (auto dist : {SessionSizeDist::degenerate(n), SessionSizeDist::poisson(n),
                      SessionSizeDist::geometric(n), SessionSizeDist::discrete_uniform(n)}) {
        double sum = 0;
        std::uint64_t tiny = 0;
        for (int i = 0; i < draws; ++i) {
            auto s = dist.sample(rng);
            REQUIRE(s >= 1);
            if (static_cast<double>(s) / static_cast<double>(n) <= 0.01) tiny++;
            sum += static_cast<double>(s);
        }
        CHECK(sum / draws == doctest::Approx(static_cast<double>(n)).epsilon(0.02));
        CHECK(tiny == 0);  // P(s/n <= 0.01) vanishes for all supported kinds
    }
}

TEST_CASE("realize_channels") {
    ChannelStats stats;
    stats.receivers = 1;
    stats.channels = 3;
    stats.gamma = {1.0, 0.0, 0.6};
    Rng rng(17);
    std::vector<std::uint8_t> out;
    std::uint64_t ones = 0;
    const int T = 100000;
    for (int t = 0; t < T; ++t) {
        realize_channels(stats, rng, out);
        CHECK(out[0] == 1);
        CHECK(out[1] == 0);
        ones += out[2];
    }
    // binomial 99.9% band around 0.6
    double half_width = 3.29 * std::sqrt(0.6 * 0.4 / T);
    CHECK(std::abs(static_cast<double>(ones) / T - 0.6) < half_width);
}

TEST_CASE("arrival specs") {
    auto bern = ArrivalSpec::bernoulli(0.54);
    CHECK(bern.rate() == doctest::Approx(0.54));
    CHECK(bern.max_value() == 1);
    auto batch = ArrivalSpec::batch({{0, 0.73}, {2, 0.27}});
    CHECK(batch.rate() == doctest::Approx(0.54));
    CHECK(batch.mgf(0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(ArrivalSpec::bernoulli(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(ArrivalSpec::batch({{0, 0.5}, {2, 0.4}}), std::invalid_argument);

    Rng rng(5);
    double sum = 0;
    for (int i = 0; i < 100000; ++i) sum += batch.sample(rng);
    CHECK(sum / 100000 == doctest::Approx(0.54).epsilon(0.02));
}

TEST_CASE("load_trace") {
    SUBCASE("single cell") {
        auto p = write_temp("trace_ok.csv", "receiver,channel,gamma\n# comment\n0,0,0.6\n");
        auto stats = load_trace(p);
        CHECK(stats.receivers == 1);
        CHECK(stats.channels == 1);
        CHECK(stats.at(0, 0) == doctest::Approx(0.6));
    }
    SUBCASE("full matrix") {
        auto p = write_temp("trace_full.csv",
                            "receiver,channel,gamma\n0,0,0.1\n0,1,0.2\n1,0,0.3\n1,1,0.4\n");
        auto stats = load_trace(p);
        CHECK(stats.receivers == 2);
        CHECK(stats.channels == 2);
        CHECK(stats.at(1, 0) == doctest::Approx(0.3));
    }
    SUBCASE("gamma out of range") {
        auto p = write_temp("trace_range.csv", "receiver,channel,gamma\n0,0,1.2\n");
        CHECK_THROWS_WITH_AS(load_trace(p), doctest::Contains("outside [0,1]"), std::runtime_error);
    }
    SUBCASE("duplicate entry") {
        auto p = write_temp("trace_dup.csv", "receiver,channel,gamma\n0,0,0.5\n0,0,0.6\n");
        CHECK_THROWS_WITH_AS(load_trace(p), doctest::Contains("duplicate entry"), std::runtime_error);
    }
    SUBCASE("malformed row") {
        auto p = write_temp("trace_bad.csv", "receiver,channel,gamma\n0,zero,0.5\n");
        CHECK_THROWS_AS(load_trace(p), std::runtime_error);
    }
    SUBCASE("extra column") {
        auto p = write_temp("trace_cols.csv", "receiver,channel,gamma\n0,0,0.5,9\n");
        CHECK_THROWS_WITH_AS(load_trace(p), doctest::Contains("column count"), std::runtime_error);
    }
    SUBCASE("missing cell") {
        auto p = write_temp("trace_miss.csv", "receiver,channel,gamma\n0,0,0.5\n1,1,0.5\n");
        CHECK_THROWS_WITH_AS(load_trace(p), doctest::Contains("missing"), std::runtime_error);
    }
}

TEST_CASE("empirical gamma distribution from trace-style values") {
    auto dist = GammaDist::empirical({0.2, 0.6, 0.4, 0.8});
    CHECK(dist.mean() == doctest::Approx(0.5));
    CHECK(dist.cdf(0.5) == doctest::Approx(0.5));
    CHECK(dist.cdf(0.1) == 0.0);
    CHECK(dist.cdf(0.9) == 1.0);
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        double v = dist.sample(rng);
        CHECK((v == 0.2 || v == 0.4 || v == 0.6 || v == 0.8));
    }
    CHECK_THROWS_AS(GammaDist::empirical({}), std::invalid_argument);
    CHECK_THROWS_AS(GammaDist::empirical({1.2}), std::invalid_argument);
}
