#include "mcmwc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "mcmwc/metrics.hpp"
#include "mcmwc/rng.hpp"

namespace mcmwc::experiment {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) out.push_back(trim(part));
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        bad_key(key, "expected a number, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        std::uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        bad_key(key, "expected a nonnegative integer, got '" + v + "'");
    }
}

// name(args) -> (name, args split on ',')
std::pair<std::string, std::vector<std::string>> parse_call(const std::string& v) {
    auto lp = v.find('(');
    if (lp == std::string::npos) return {trim(v), {}};
    if (v.back() != ')') return {v, {}};  // malformed; caller rejects by name
    std::string name = trim(v.substr(0, lp));
    std::string inner = v.substr(lp + 1, v.size() - lp - 2);
    return {name, split(inner, ',')};
}

}  // namespace

std::string ScalingRule::name() const {
    std::ostringstream os;
    os << std::setprecision(6);
    switch (kind) {
        case Kind::kLog: os << "log(" << a << ")"; break;
        case Kind::kExp: os << "exp(" << a << "," << b << ")"; break;
        case Kind::kLinear: os << "linear"; break;
        case Kind::kFixed: os << "fixed(" << fixed << ")"; break;
    }
    return os.str();
}

std::size_t ScalingRule::channels_for(std::uint64_t n) const {
    switch (kind) {
        case Kind::kLog:
            return static_cast<std::size_t>(
                std::max(1.0, std::ceil(a * std::log(static_cast<double>(n)))));
        case Kind::kExp:
            return static_cast<std::size_t>(
                std::max(1.0, std::ceil(a * std::pow(b, static_cast<double>(n)))));
        case Kind::kLinear: return static_cast<std::size_t>(n);
        case Kind::kFixed: return fixed;
    }
    return 1;
}

ScalingRule ScalingRule::parse(const std::string& text) {
    auto [name, args] = parse_call(text);
    ScalingRule r;
    if (name == "log" && args.size() == 1) {
        r.kind = Kind::kLog;
        r.a = parse_double("scaling.rules", args[0]);
        if (r.a <= 0) bad_key("scaling.rules", "log coefficient must be positive");
    } else if (name == "exp" && args.size() == 2) {
        r.kind = Kind::kExp;
        r.a = parse_double("scaling.rules", args[0]);
        r.b = parse_double("scaling.rules", args[1]);
        if (r.a <= 0 || r.b <= 1.0) bad_key("scaling.rules", "exp needs a > 0 and base > 1");
    } else if (name == "linear" && args.empty()) {
        r.kind = Kind::kLinear;
    } else if (name == "fixed" && args.size() == 1) {
        r.kind = Kind::kFixed;
        r.fixed = static_cast<std::size_t>(parse_u64("scaling.rules", args[0]));
        if (r.fixed < 1) bad_key("scaling.rules", "fixed channel count must be >= 1");
    } else {
        bad_key("scaling.rules", "unknown rule '" + text + "'");
    }
    return r;
}

topo::SessionSizeDist ExperimentConfig::size_dist(std::uint64_t mean) const {
    using K = topo::SessionSizeDist::Kind;
    switch (size_kind) {
        case K::kDegenerate: return topo::SessionSizeDist::degenerate(mean);
        case K::kPoisson: return topo::SessionSizeDist::poisson(mean);
        case K::kGeometric: return topo::SessionSizeDist::geometric(mean);
        case K::kDiscreteUniform: return topo::SessionSizeDist::discrete_uniform(mean);
    }
    return topo::SessionSizeDist::degenerate(mean);
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    bool seed_set = false;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (val.empty()) bad_key(key, "empty value");

        if (key == "recipe") {
            cfg.recipe = val;
        } else if (key == "grid.n") {
            for (auto& p : split(val, ',')) cfg.grid_n.push_back(parse_u64(key, p));
        } else if (key == "grid.m") {
            for (auto& p : split(val, ','))
                cfg.grid_m.push_back(static_cast<std::size_t>(parse_u64(key, p)));
        } else if (key == "grid.rho") {
            for (auto& p : split(val, ',')) {
                double r = parse_double(key, p);
                if (r <= 0 || r >= 1) bad_key(key, "rho must be in (0,1)");
                cfg.grid_rho.push_back(r);
            }
        } else if (key == "scaling.rules") {
            for (auto& p : split(val, ';')) cfg.rules.push_back(ScalingRule::parse(p));
        } else if (key == "n") {
            cfg.n = parse_u64(key, val);
            if (cfg.n < 1) bad_key(key, "must be >= 1");
        } else if (key == "m") {
            cfg.m = static_cast<std::size_t>(parse_u64(key, val));
            if (cfg.m < 1) bad_key(key, "must be >= 1");
        } else if (key == "m.list") {
            for (auto& p : split(val, ','))
                cfg.m_list.push_back(static_cast<std::size_t>(parse_u64(key, p)));
        } else if (key == "gamma.dist") {
            auto [name, args] = parse_call(val);
            if (name == "uniform" && args.empty()) {
                cfg.gamma = topo::GammaDist::uniform01();
            } else if (name == "degenerate" && args.size() == 1) {
                double g = parse_double(key, args[0]);
                if (g < 0 || g > 1) bad_key(key, "gamma must be in [0,1]");
                cfg.gamma = topo::GammaDist::degenerate(g);
            } else if (name == "beta" && args.size() == 2) {
                double a = parse_double(key, args[0]), b = parse_double(key, args[1]);
                if (a <= 0 || b <= 0) bad_key(key, "beta parameters must be positive");
                cfg.gamma = topo::GammaDist::beta(a, b);
            } else {
                bad_key(key, "expected uniform, degenerate(g) or beta(a,b)");
            }
        } else if (key == "size.dist") {
            using K = topo::SessionSizeDist::Kind;
            if (val == "degenerate") cfg.size_kind = K::kDegenerate;
            else if (val == "poisson") cfg.size_kind = K::kPoisson;
            else if (val == "geometric") cfg.size_kind = K::kGeometric;
            else if (val == "uniform") cfg.size_kind = K::kDiscreteUniform;
            else bad_key(key, "expected degenerate, poisson, geometric or uniform");
        } else if (key == "overlap") {
            auto [name, args] = parse_call(val);
            if (name == "disjoint" && args.empty()) {
                cfg.overlap = topo::OverlapMode::make_disjoint();
            } else if (name == "shared" && args.size() == 1) {
                double p = parse_double(key, args[0]);
                if (p < 0 || p > 1) bad_key(key, "share probability must be in [0,1]");
                cfg.overlap = topo::OverlapMode::shared(p);
            } else {
                bad_key(key, "expected disjoint or shared(p)");
            }
        } else if (key == "arrivals") {
            auto [name, args] = parse_call(val);
            try {
                if (name == "bernoulli" && args.size() == 1) {
                    cfg.arrivals = topo::ArrivalSpec::bernoulli(parse_double(key, args[0]));
                } else if (name == "batch" && !args.empty()) {
                    std::vector<std::pair<std::uint32_t, double>> sup;
                    for (auto& p : args) {
                        auto colon = p.find(':');
                        if (colon == std::string::npos) bad_key(key, "batch entries are value:prob");
                        sup.emplace_back(
                            static_cast<std::uint32_t>(parse_u64(key, trim(p.substr(0, colon)))),
                            parse_double(key, trim(p.substr(colon + 1))));
                    }
                    cfg.arrivals = topo::ArrivalSpec::batch(sup);
                } else {
                    bad_key(key, "expected bernoulli(lambda) or batch(v:p,...)");
                }
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                bad_key(key, e.what());
            }
            cfg.arrivals_set = true;
        } else if (key == "schemes") {
            for (auto& p : split(val, ',')) {
                if (p == "mc_mwc") cfg.scheme_list.push_back(schemes::SchemeKind::kMcMwc);
                else if (p == "mwc_static") cfg.scheme_list.push_back(schemes::SchemeKind::kMwcStatic);
                else if (p == "rlnc_static") cfg.scheme_list.push_back(schemes::SchemeKind::kRlncStatic);
                else if (p == "rlnc_random") cfg.scheme_list.push_back(schemes::SchemeKind::kRlncRandom);
                else if (p == "fifo_bound") cfg.scheme_list.push_back(schemes::SchemeKind::kFifoBound);
                else bad_key(key, "unknown scheme '" + p + "'");
            }
        } else if (key == "decoder") {
            if (val == "ideal") cfg.decoder = schemes::DecoderMode::kIdeal;
            else if (val == "concrete") cfg.decoder = schemes::DecoderMode::kConcrete;
            else bad_key(key, "expected ideal or concrete");
        } else if (key == "rlnc.block") {
            cfg.rlnc_block = static_cast<std::uint32_t>(parse_u64(key, val));
            if (cfg.rlnc_block < 1) bad_key(key, "must be >= 1");
        } else if (key == "payload.symbols") {
            cfg.payload_symbols = static_cast<std::size_t>(parse_u64(key, val));
            if (cfg.payload_symbols < 1) bad_key(key, "must be >= 1");
        } else if (key == "warmup") {
            if (val == "auto") cfg.warmup = -1;
            else cfg.warmup = static_cast<std::int64_t>(parse_u64(key, val));
        } else if (key == "horizon") {
            cfg.horizon = parse_u64(key, val);
            if (cfg.horizon < 1) bad_key(key, "must be >= 1");
        } else if (key == "replications") {
            cfg.replications = parse_u64(key, val);
            if (cfg.replications < 1) bad_key(key, "must be >= 1");
        } else if (key == "seed") {
            cfg.seed = parse_u64(key, val);
            seed_set = true;
        } else if (key == "out") {
            cfg.out = val;
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }

    if (cfg.recipe.empty()) throw ConfigError("missing required key 'recipe'");
    if (!seed_set) cfg.warnings.push_back("seed not set; defaulting to 0");

    if (cfg.recipe == "scaling") {
        if (cfg.grid_n.empty()) throw ConfigError("recipe scaling requires grid.n");
        if (cfg.rules.empty()) throw ConfigError("recipe scaling requires scaling.rules");
    } else if (cfg.recipe == "delay-decay") {
        if (cfg.grid_m.empty()) throw ConfigError("recipe delay-decay requires grid.m");
        if (!cfg.arrivals_set) throw ConfigError("recipe delay-decay requires arrivals");
        if (cfg.scheme_list.empty()) cfg.scheme_list.push_back(schemes::SchemeKind::kMcMwc);
    } else if (cfg.recipe == "load-sweep") {
        if (cfg.grid_rho.empty()) throw ConfigError("recipe load-sweep requires grid.rho");
        if (cfg.m_list.empty()) throw ConfigError("recipe load-sweep requires m.list");
        if (cfg.gamma.kind != topo::GammaDist::Kind::kDegenerate)
            throw ConfigError("recipe load-sweep requires gamma.dist = degenerate(g)");
        if (cfg.scheme_list.empty()) cfg.scheme_list.push_back(schemes::SchemeKind::kMcMwc);
    } else if (cfg.recipe == "allocation-comparison") {
        if (cfg.grid_n.empty()) throw ConfigError("recipe allocation-comparison requires grid.n");
    } else {
        throw ConfigError("unknown recipe '" + cfg.recipe + "'");
    }
    return cfg;
}

ExperimentConfig validate_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// runner
// ---------------------------------------------------------------------------

namespace {

struct ItemOut {
    std::vector<std::tuple<std::string, std::string, double>> values;  // scheme, metric, value
    std::map<std::string, std::vector<std::uint64_t>> hists;           // scheme -> delay hist
    std::map<std::string, std::uint64_t> samples;                      // scheme -> delay samples
};

struct GridSpec {
    std::string name;
    std::function<ItemOut(std::uint64_t item_seed)> work;
    std::vector<std::tuple<std::string, std::string, double>> fixed;  // deterministic extras
};

ItemOut summarize_run(const std::string& scheme, const schemes::SchemeRun& run, bool want_tail) {
    ItemOut out;
    auto rep = metrics::collect(run);
    out.values.emplace_back(scheme, "mean_delay", rep.mean_delay);
    out.values.emplace_back(scheme, "sum_throughput", rep.sum_throughput);
    out.values.emplace_back(scheme, "max_q", static_cast<double>(rep.max_q));
    out.values.emplace_back(scheme, "mean_interval", rep.mean_interval);
    if (want_tail) {
        out.hists[scheme] = run.delay_hist;
        out.samples[scheme] = run.delay_samples;
    }
    return out;
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '=' ||
            c == '_')
            out.push_back(c);
        else if (c == '/' || c == ':' || c == ',')
            out.push_back('_');
    }
    return out;
}

}  // namespace

std::string rows_to_csv(const std::vector<CsvRow>& rows) {
    std::ostringstream os;
    os << "grid_param,scheme,metric,mean,stderr,replications,seed0\n";
    for (const auto& r : rows)
        os << r.grid_param << "," << r.scheme << "," << r.metric << "," << fmt_double(r.mean)
           << "," << fmt_double(r.stderr_) << "," << r.replications << "," << r.seed0 << "\n";
    return os.str();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                unsigned workers) {
    std::vector<GridSpec> grid;

    auto scheme_cfg = [&](schemes::SchemeKind kind) {
        schemes::SchemeConfig sc;
        sc.kind = kind;
        sc.decoder = cfg.decoder;
        sc.rlnc_block = cfg.rlnc_block;
        sc.payload_symbols = cfg.payload_symbols;
        sc.warmup = cfg.warmup;
        return sc;
    };

    if (cfg.recipe == "scaling") {
        for (const auto& rule : cfg.rules) {
            for (auto n : cfg.grid_n) {
                std::size_t m = rule.channels_for(n);
                GridSpec gs;
                gs.name = rule.name() + ":" + std::to_string(n);
                gs.fixed.emplace_back("analytic", "m", static_cast<double>(m));
                gs.work = [cfg, n, m](std::uint64_t item_seed) {
                    auto pt = schemes::sampled_capacity_point(m, n, cfg.gamma,
                                                              cfg.size_dist(n), item_seed);
                    ItemOut out;
                    out.values.emplace_back("mc_mwc", "capacity", pt.mc_mwc);
                    out.values.emplace_back("static_opt", "capacity", pt.static_opt);
                    out.values.emplace_back("static_upper", "capacity", pt.static_upper_mean);
                    return out;
                };
                grid.push_back(std::move(gs));
            }
        }
    } else if (cfg.recipe == "delay-decay") {
        for (auto m : cfg.grid_m) {
            GridSpec gs;
            gs.name = "m=" + std::to_string(m);
            if (cfg.gamma.kind == topo::GammaDist::Kind::kDegenerate) {
                std::vector<double> row(m, cfg.gamma.mean());
                auto rf = analysis::rate_function(row, cfg.arrivals, m);
                gs.fixed.emplace_back("analysis", "rate_function", rf.phi);
            }
            double pc = analysis::phi_const(cfg.arrivals);
            if (std::isfinite(pc)) gs.fixed.emplace_back("analysis", "phi_const", pc);
            gs.work = [cfg, m, sc = scheme_cfg](std::uint64_t item_seed) {
                auto inst = topo::sample_instance(m, cfg.n, cfg.gamma, cfg.size_dist(cfg.n),
                                                  cfg.overlap, derive_seed(item_seed, 11));
                ItemOut out;
                for (auto kind : cfg.scheme_list) {
                    auto run = schemes::run_scheme(sc(kind), inst, cfg.arrivals, cfg.horizon,
                                                   derive_seed(item_seed, 12));
                    auto one = summarize_run(schemes::scheme_name(kind), run, true);
                    out.values.insert(out.values.end(), one.values.begin(), one.values.end());
                    out.hists.merge(one.hists);
                    out.samples.merge(one.samples);
                }
                return out;
            };
            grid.push_back(std::move(gs));
        }
    } else if (cfg.recipe == "load-sweep") {
        double g = cfg.gamma.mean();
        for (auto rho : cfg.grid_rho) {
            for (auto m : cfg.m_list) {
                GridSpec gs;
                gs.name = "rho=" + fmt_double(rho) + ":m=" + std::to_string(m);
                auto arrivals = topo::ArrivalSpec::bernoulli(rho * g);
                gs.work = [cfg, m, arrivals, sc = scheme_cfg](std::uint64_t item_seed) {
                    auto inst = topo::sample_instance(m, cfg.n, cfg.gamma, cfg.size_dist(cfg.n),
                                                      cfg.overlap, derive_seed(item_seed, 11));
                    ItemOut out;
                    for (auto kind : cfg.scheme_list) {
                        auto run = schemes::run_scheme(sc(kind), inst, arrivals, cfg.horizon,
                                                       derive_seed(item_seed, 12));
                        auto one = summarize_run(schemes::scheme_name(kind), run, false);
                        out.values.insert(out.values.end(), one.values.begin(), one.values.end());
                    }
                    return out;
                };
                grid.push_back(std::move(gs));
            }
        }
    } else if (cfg.recipe == "allocation-comparison") {
        ScalingRule rule =
            cfg.rules.empty() ? ScalingRule{ScalingRule::Kind::kFixed, 0, 0, cfg.m} : cfg.rules[0];
        for (auto n : cfg.grid_n) {
            std::size_t m = rule.channels_for(n);
            GridSpec gs;
            gs.name = "n=" + std::to_string(n);
            gs.fixed.emplace_back("analytic", "m", static_cast<double>(m));
            gs.work = [cfg, n, m](std::uint64_t item_seed) {
                auto inst = topo::sample_instance(m, n, cfg.gamma, cfg.size_dist(n), cfg.overlap,
                                                  derive_seed(item_seed, 11));
                ItemOut out;
                auto opt = schemes::optimal_static_allocation(inst.stats, inst.layout);
                double mm = static_cast<double>(m);
                out.values.emplace_back(
                    "static_opt", "capacity",
                    schemes::allocation_objective(inst.stats, inst.layout, opt) / mm);
                Rng rng(derive_seed(item_seed, 13));
                schemes::Allocation rnd;
                rnd.session_to_channel.resize(m);
                for (std::size_t i = 0; i < m; ++i)
                    rnd.session_to_channel[i] = static_cast<std::uint32_t>(i);
                for (std::size_t i = m; i > 1; --i)
                    std::swap(rnd.session_to_channel[i - 1], rnd.session_to_channel[rng.below(i)]);
                out.values.emplace_back(
                    "static_random", "capacity",
                    schemes::allocation_objective(inst.stats, inst.layout, rnd) / mm);
                double upper = 0;
                for (std::size_t h = 0; h < m; ++h)
                    upper += schemes::static_capacity_upper(inst.stats, inst.layout, h);
                out.values.emplace_back("static_upper", "capacity", upper / mm);
                out.values.emplace_back("mc_mwc", "capacity",
                                        schemes::mc_mwc_capacity(inst.stats, inst.layout));
                return out;
            };
            grid.push_back(std::move(gs));
        }
    } else {
        throw ConfigError("unknown recipe '" + cfg.recipe + "'");
    }

    // execute (grid x replication) items on a bounded pool; results land in
    // preassigned slots so any worker count yields identical output
    const std::uint64_t reps = cfg.replications;
    const std::size_t total = grid.size() * reps;
    std::vector<ItemOut> results(total);
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::string first_error;

    auto worker = [&]() {
        while (true) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= total) return;
            std::size_t gi = idx / reps;
            std::uint64_t rep = idx % reps;
            try {
                results[idx] = grid[gi].work(derive_seed(cfg.seed, gi, rep));
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (first_error.empty()) first_error = e.what();
                return;
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (!first_error.empty()) throw std::runtime_error("experiment item failed: " + first_error);

    // aggregate
    ExperimentResult res;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        std::uint64_t seed0 = derive_seed(cfg.seed, gi, 0);
        std::map<std::pair<std::string, std::string>, std::vector<double>> agg;
        std::map<std::string, std::vector<std::uint64_t>> hists;
        std::map<std::string, std::uint64_t> samples;
        for (std::uint64_t rep = 0; rep < reps; ++rep) {
            const auto& item = results[gi * reps + rep];
            for (const auto& [scheme, metric, value] : item.values)
                agg[{scheme, metric}].push_back(value);
            for (const auto& [scheme, hist] : item.hists) {
                auto& merged = hists[scheme];
                if (merged.size() < hist.size()) merged.resize(hist.size(), 0);
                for (std::size_t k = 0; k < hist.size(); ++k) merged[k] += hist[k];
                samples[scheme] += item.samples.at(scheme);
            }
        }
        for (const auto& [scheme, metric, value] : grid[gi].fixed)
            res.rows.push_back({grid[gi].name, scheme, metric, value, 0.0, reps, seed0});
        for (const auto& [key, vals] : agg) {
            double mean = 0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            double se = 0;
            if (vals.size() > 1) {
                double ss = 0;
                for (double v : vals) ss += (v - mean) * (v - mean);
                se = std::sqrt(ss / static_cast<double>(vals.size() - 1)) /
                     std::sqrt(static_cast<double>(vals.size()));
            }
            res.rows.push_back({grid[gi].name, key.first, key.second, mean, se, reps, seed0});
        }
        for (const auto& [scheme, hist] : hists) {
            std::uint64_t total_samples = samples[scheme];
            if (total_samples == 0) continue;
            analysis::TailCurve curve;
            std::uint64_t above = 0;
            std::vector<std::uint64_t> exceed(hist.size());
            for (std::size_t k = hist.size(); k-- > 0;) {
                exceed[k] = above;
                above += hist[k];
            }
            curve.exceed = std::move(exceed);
            curve.prob.resize(curve.exceed.size());
            for (std::size_t k = 0; k < curve.exceed.size(); ++k)
                curve.prob[k] = static_cast<double>(curve.exceed[k]) /
                                static_cast<double>(total_samples);
            try {
                auto fit = analysis::estimate_decay_rate(curve);
                res.rows.push_back(
                    {grid[gi].name, scheme, "fitted_decay_rate", fit.rate, 0.0, reps, seed0});
                res.rows.push_back({grid[gi].name, scheme, "fit_r2", fit.r2, 0.0, reps, seed0});
            } catch (const std::exception&) {
                // tails too thin to fit are simply not reported
            }
            res.tails[grid[gi].name + "/" + scheme] = std::move(curve);
        }
    }

    // manifest
    nlohmann::json manifest;
    manifest["recipe"] = cfg.recipe;
    manifest["seed"] = cfg.seed;
    manifest["replications"] = cfg.replications;
    manifest["horizon"] = cfg.horizon;
    manifest["warnings"] = cfg.warnings;
    nlohmann::json gridj = nlohmann::json::array();
    for (std::size_t gi = 0; gi < grid.size(); ++gi)
        gridj.push_back({{"name", grid[gi].name}, {"seed0", derive_seed(cfg.seed, gi, 0)}});
    manifest["grid"] = gridj;
    res.manifest = manifest;

    if (!out_dir.empty()) {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw std::runtime_error("cannot create output directory: " + out_dir);
        {
            std::ofstream f(out_dir + "/results.csv");
            if (!f) throw std::runtime_error("unwritable output path: " + out_dir);
            f << rows_to_csv(res.rows);
        }
        std::vector<std::string> outputs{"results.csv"};
        for (const auto& [key, curve] : res.tails) {
            std::string fname = "tail_" + sanitize(key) + ".csv";
            std::ofstream f(out_dir + "/" + fname);
            f << "k,exceed,prob\n";
            for (std::size_t k = 0; k < curve.prob.size(); ++k)
                f << k << "," << curve.exceed[k] << "," << fmt_double(curve.prob[k]) << "\n";
            outputs.push_back(fname);
        }
        res.manifest["outputs"] = outputs;
        std::ofstream mf(out_dir + "/manifest.json");
        mf << res.manifest.dump(2) << "\n";
    }
    return res;
}

}  // namespace mcmwc::experiment
