#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcmwc/analysis.hpp"
#include "mcmwc/schemes.hpp"
#include "mcmwc/topology.hpp"

#include "json.hpp"

// Experiment runner: flat key=value configs, named recipes, seeded Monte Carlo
// replication with a worker pool, CSV/JSON emission.

namespace mcmwc::experiment {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScalingRule {
    enum class Kind { kLog, kExp, kLinear, kFixed };
    Kind kind = Kind::kFixed;
    double a = 0, b = 0;
    std::size_t fixed = 1;

    std::string name() const;
    std::size_t channels_for(std::uint64_t n) const;
    static ScalingRule parse(const std::string& text);
};

struct ExperimentConfig {
    std::string recipe;
    std::vector<std::uint64_t> grid_n;
    std::vector<std::size_t> grid_m;
    std::vector<double> grid_rho;
    std::vector<ScalingRule> rules;

    std::uint64_t n = 20;               // expected receivers per session
    std::size_t m = 1;                  // channel count when not gridded
    std::vector<std::size_t> m_list;    // load-sweep series
    topo::GammaDist gamma = topo::GammaDist::uniform01();
    topo::SessionSizeDist::Kind size_kind = topo::SessionSizeDist::Kind::kDegenerate;
    topo::OverlapMode overlap = topo::OverlapMode::make_disjoint();
    topo::ArrivalSpec arrivals = topo::ArrivalSpec::bernoulli(0.5);
    bool arrivals_set = false;

    std::vector<schemes::SchemeKind> scheme_list;
    schemes::DecoderMode decoder = schemes::DecoderMode::kIdeal;
    std::uint32_t rlnc_block = 50;
    std::size_t payload_symbols = 32;
    std::int64_t warmup = -1;

    std::uint64_t horizon = 100000;
    std::uint64_t replications = 1;
    std::uint64_t seed = 0;
    std::string out;

    std::vector<std::string> warnings;

    topo::SessionSizeDist size_dist(std::uint64_t mean) const;
};

// strict parse + defaults + range checks; throws ConfigError naming the key
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig validate_config(const std::string& path);

struct CsvRow {
    std::string grid_param;
    std::string scheme;
    std::string metric;
    double mean = 0;
    double stderr_ = 0;
    std::uint64_t replications = 0;
    std::uint64_t seed0 = 0;
};

struct ExperimentResult {
    std::vector<CsvRow> rows;
    // merged tails keyed "<grid>/<scheme>"
    std::map<std::string, analysis::TailCurve> tails;
    nlohmann::json manifest;
};

// Executes the recipe with `workers` threads; when out_dir is nonempty writes
// results.csv, tail_*.csv and manifest.json there.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                unsigned workers = 1);

std::string rows_to_csv(const std::vector<CsvRow>& rows);

}  // namespace mcmwc::experiment
