// Experiment runner CLI: validates configs, executes recipes, fits tails.

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "mcmwc/analysis.hpp"
#include "mcmwc/experiment.hpp"

namespace {

int cmd_validate(const std::string& path) {
    auto cfg = mcmwc::experiment::validate_config(path);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "config ok\n";
    std::cout << "  recipe       = " << cfg.recipe << "\n";
    std::cout << "  seed         = " << cfg.seed << "\n";
    std::cout << "  replications = " << cfg.replications << "\n";
    std::cout << "  horizon      = " << cfg.horizon << "\n";
    if (!cfg.grid_n.empty()) {
        std::cout << "  grid.n       =";
        for (auto n : cfg.grid_n) std::cout << " " << n;
        std::cout << "\n";
    }
    if (!cfg.grid_m.empty()) {
        std::cout << "  grid.m       =";
        for (auto m : cfg.grid_m) std::cout << " " << m;
        std::cout << "\n";
    }
    if (!cfg.rules.empty()) {
        std::cout << "  rules        =";
        for (const auto& r : cfg.rules) std::cout << " " << r.name();
        std::cout << "\n";
    }
    return 0;
}

int cmd_run(const std::string& path, std::string out_dir, unsigned workers) {
    auto cfg = mcmwc::experiment::validate_config(path);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
    if (out_dir.empty()) out_dir = cfg.out.empty() ? "results" : cfg.out;
    auto res = mcmwc::experiment::run_experiment(cfg, out_dir, workers);
    std::cout << "wrote " << res.rows.size() << " result rows and " << res.tails.size()
              << " tail files to " << out_dir << "\n";
    return 0;
}

int cmd_analyze_tail(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open tail file: " + path);
    mcmwc::analysis::TailCurve curve;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::stringstream ss(line);
        std::string k, exceed, prob;
        if (!std::getline(ss, k, ',') || !std::getline(ss, exceed, ',') ||
            !std::getline(ss, prob, ','))
            throw std::runtime_error("malformed tail row: " + line);
        curve.exceed.push_back(std::stoull(exceed));
        curve.prob.push_back(std::stod(prob));
    }
    auto fit = mcmwc::analysis::estimate_decay_rate(curve);
    std::cout << "rate=" << fit.rate << " r2=" << fit.r2 << " window=[" << fit.k_lo << ","
              << fit.k_hi << "]\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-channel moving window code simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, tail_path;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    bool strict = true;

    auto* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--out", out_dir, "output directory (overrides config)");
    run->add_option("--workers", workers, "worker threads for replications");
    run->add_flag("--strict", strict, "strict config parsing (always on)");

    auto* validate = app.add_subcommand("validate", "validate a config file");
    validate->add_option("config", config_path, "config file")->required();

    auto* analyze = app.add_subcommand("analyze", "analysis utilities");
    auto* tail = analyze->add_subcommand("tail", "fit a decay rate to an emitted tail CSV");
    tail->add_option("csv", tail_path, "tail csv (k,exceed,prob)")->required();
    analyze->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return cmd_validate(config_path);
        if (*run) return cmd_run(config_path, out_dir, workers);
        if (*tail) return cmd_analyze_tail(tail_path);
    } catch (const mcmwc::experiment::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
