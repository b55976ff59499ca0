// Command-line front end: closed-form rate reports, parameter sweeps,
// depth optimization, Monte Carlo validation runs and the protocol
// verification suites.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrep/chain_sim.hpp"
#include "qrep/config.hpp"
#include "qrep/rate_model.hpp"
#include "qrep/verify.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

constexpr int kExitFailure = 1;   // failed checks (verify, z-guard)
constexpr int kExitBadInput = 2;  // config/CLI errors

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string preset;
};

qrep::SimConfig resolve_config(const CommonArgs& args) {
    qrep::SimConfig cfg;
    if (!args.preset.empty()) {
        cfg = qrep::preset_config(args.preset);
    }
    if (!args.config_path.empty()) {
        qrep::SimConfig file_cfg = qrep::load_config_file(args.config_path);
        if (!args.preset.empty()) {
            // Preset supplies the sweep; the file refines parameters.
            file_cfg.sweep = cfg.sweep;
        }
        cfg = file_cfg;
    }
    for (const std::string& kv : args.overrides) {
        qrep::apply_override(cfg, kv);
    }
    return cfg;
}

/// Chooses the nesting depth: the configured value, or the argmax of R.
int resolve_depth(const qrep::SimConfig& cfg, int n_max) {
    if (!cfg.n_auto) return cfg.topology.nesting;
    const qrep::OptimizeResult opt =
        qrep::optimize_depth(cfg.params, cfg.topology.length_km, cfg.topology.multiplex, 1,
                             n_max, cfg.topology.swap_attempt_cap);
    return opt.n_star;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json report_to_json(const qrep::RateReport& report) {
    json j = json::object();
    for (const std::string& name : qrep::report_field_names()) {
        j[name] = qrep::report_field_value(report, name);
    }
    return j;
}

json topology_to_json(const qrep::ChainTopology& t, bool n_auto) {
    return json{{"L", t.length_km},
                {"n", t.nesting},
                {"n_auto", n_auto},
                {"n_m", t.multiplex},
                {"n_s", t.swap_attempt_cap}};
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string digest_string(const std::string& bytes) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(qrep::fnv1a64(bytes)));
    return buf;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write output file '" + path + "'");
    }
    out << contents;
}

/// Every output file gets a sibling manifest sufficient to reproduce it.
void write_manifest(const std::string& out_path, const std::string& command,
                    const qrep::SimConfig& cfg, std::uint64_t master_seed,
                    const std::string& output_bytes) {
    json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["command"] = command;
    manifest["config"] = qrep::serialize_config(cfg);
    manifest["master_seed"] = master_seed;
    manifest["timestamp"] = iso_timestamp();
    manifest["output_digest"] = digest_string(output_bytes);
    write_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

int cmd_rate(const CommonArgs& common) {
    qrep::SimConfig cfg = resolve_config(common);
    cfg.topology.nesting = resolve_depth(cfg, cfg.sweep.n_max);

    const qrep::RateReport report = qrep::key_rate(cfg.params, cfg.topology);
    json out = report_to_json(report);
    out["topology"] = topology_to_json(cfg.topology, cfg.n_auto);
    std::cout << out.dump(2) << "\n";
    return 0;
}

struct SweepRow {
    std::vector<double> axis_values;
    int nesting = 0;
    qrep::RateReport report;
};

int cmd_sweep(const CommonArgs& common, const std::string& out_path,
              const std::string& format_flag, int workers) {
    qrep::SimConfig cfg = resolve_config(common);
    if (!format_flag.empty()) cfg.sweep.format = format_flag;
    if (cfg.sweep.axes.empty()) {
        throw qrep::ConfigError("sweep needs at least one axis (or a --preset)", 0, 0);
    }
    for (const qrep::SweepAxis& axis : cfg.sweep.axes) {
        if (cfg.sweep.optimize_n && axis.field == "n") {
            throw qrep::ConfigError("axis 'n' conflicts with optimize_n", 0, 0);
        }
    }

    std::size_t points = 1;
    for (const qrep::SweepAxis& axis : cfg.sweep.axes) {
        points *= axis.values.size();
        if (points > 1000000) {
            throw qrep::ConfigError("sweep grid exceeds the 10^6 point cap", 0, 0);
        }
    }

    std::vector<std::string> outputs = cfg.sweep.outputs;
    if (outputs.empty()) outputs = qrep::report_field_names();

    // Row order is lexicographic in axis order: first axis slowest.
    std::vector<SweepRow> rows(points);
    auto point_values = [&](std::size_t index) {
        std::vector<double> values(cfg.sweep.axes.size());
        std::size_t rest = index;
        for (std::size_t a = cfg.sweep.axes.size(); a-- > 0;) {
            const auto& axis_values = cfg.sweep.axes[a].values;
            values[a] = axis_values[rest % axis_values.size()];
            rest /= axis_values.size();
        }
        return values;
    };

    auto compute_row = [&](std::size_t index) {
        qrep::SimConfig point_cfg = cfg;
        SweepRow row;
        row.axis_values = point_values(index);
        for (std::size_t a = 0; a < cfg.sweep.axes.size(); ++a) {
            qrep::set_field(point_cfg, cfg.sweep.axes[a].field, row.axis_values[a]);
        }
        if (cfg.sweep.optimize_n) {
            point_cfg.n_auto = true;
        }
        point_cfg.topology.nesting = resolve_depth(point_cfg, cfg.sweep.n_max);
        row.nesting = point_cfg.topology.nesting;
        row.report = qrep::key_rate(point_cfg.params, point_cfg.topology);
        return row;
    };

    const int pool_size = std::max(1, workers);
    if (pool_size == 1) {
        for (std::size_t i = 0; i < points; ++i) rows[i] = compute_row(i);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < pool_size; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < points; i += pool_size) rows[i] = compute_row(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    std::string payload;
    if (cfg.sweep.format == "csv") {
        std::ostringstream out;
        for (const qrep::SweepAxis& axis : cfg.sweep.axes) out << axis.field << ",";
        out << "n";
        for (const std::string& name : outputs) out << "," << name;
        out << "\n";
        for (const SweepRow& row : rows) {
            for (double v : row.axis_values) out << format_double(v) << ",";
            out << row.nesting;
            for (const std::string& name : outputs) {
                out << "," << format_double(qrep::report_field_value(row.report, name));
            }
            out << "\n";
        }
        payload = out.str();
    } else {
        json arr = json::array();
        for (const SweepRow& row : rows) {
            json obj = json::object();
            for (std::size_t a = 0; a < cfg.sweep.axes.size(); ++a) {
                obj[cfg.sweep.axes[a].field] = row.axis_values[a];
            }
            obj["n"] = row.nesting;
            for (const std::string& name : outputs) {
                obj[name] = qrep::report_field_value(row.report, name);
            }
            arr.push_back(std::move(obj));
        }
        payload = arr.dump(2) + "\n";
    }

    if (out_path.empty()) {
        std::cout << payload;
    } else {
        write_file(out_path, payload);
        write_manifest(out_path, "sweep", cfg, 0, payload);
        std::cout << "wrote " << points << " rows to " << out_path << "\n";
    }
    return 0;
}

int cmd_optimize(const CommonArgs& common, bool table3, int n_max_flag) {
    qrep::SimConfig cfg = resolve_config(common);
    const int n_max = n_max_flag > 0 ? n_max_flag : cfg.sweep.n_max;

    if (table3) {
        // 3x3 grid over source efficiency and gate error rate.
        const double etas[3] = {0.7, 0.8, 0.9};
        const double errors[3] = {1e-5, 2.6e-4, 5.1e-4};
        json grid = json::array();
        for (double eta : etas) {
            for (double err : errors) {
                qrep::RepeaterParams params = cfg.params;
                params.eta_s = eta;
                params.epsilon_cn = err;
                const qrep::OptimizeResult opt =
                    qrep::optimize_depth(params, cfg.topology.length_km, cfg.topology.multiplex,
                                         1, n_max, cfg.topology.swap_attempt_cap);
                grid.push_back(json{{"eta_s", eta},
                                    {"epsilon_CN", err},
                                    {"n_star", opt.n_star},
                                    {"R_hz", opt.report.rate_hz}});
            }
        }
        json out;
        out["L"] = cfg.topology.length_km;
        out["n_m"] = cfg.topology.multiplex;
        out["grid"] = std::move(grid);
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    const qrep::OptimizeResult opt =
        qrep::optimize_depth(cfg.params, cfg.topology.length_km, cfg.topology.multiplex, 1,
                             n_max, cfg.topology.swap_attempt_cap);
    json out;
    out["n_star"] = opt.n_star;
    out["all_zero"] = opt.all_zero;
    out["report"] = report_to_json(opt.report);
    json scan = json::array();
    for (int n = 1; n <= n_max; ++n) {
        qrep::ChainTopology t = cfg.topology;
        t.nesting = n;
        scan.push_back(json{{"n", n}, {"R_hz", qrep::key_rate(cfg.params, t).rate_hz}});
    }
    out["scan"] = std::move(scan);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const CommonArgs& common, std::int64_t trials, std::uint64_t seed,
                 const std::string& out_path, const std::string& mode, int workers) {
    qrep::SimConfig cfg = resolve_config(common);
    cfg.topology.nesting = resolve_depth(cfg, cfg.sweep.n_max);

    qrep::TrialConfig trial_cfg;
    trial_cfg.params = cfg.params;
    trial_cfg.topology = cfg.topology;
    trial_cfg.trials = trials;
    trial_cfg.master_seed = seed;
    if (mode == "microscopic") {
        trial_cfg.mode = qrep::SimMode::Microscopic;
    } else if (mode != "abstract") {
        throw qrep::ConfigError("mode must be abstract or microscopic", 0, 0);
    }

    const qrep::TrialResult result = qrep::run_trials(trial_cfg, workers);
    const double expected =
        qrep::expected_pairs(qrep::link_probability(cfg.params, cfg.topology), cfg.topology,
                             qrep::swap_photon_probability(cfg.params));

    double z = 0.0;
    const double diff = result.empirical_n_avg - expected;
    if (diff != 0.0) {
        z = result.std_error > 0.0 ? diff / result.std_error
                                   : std::numeric_limits<double>::infinity();
    }

    json out;
    out["trials"] = result.trials;
    out["master_seed"] = seed;
    out["mode"] = mode;
    out["n"] = cfg.topology.nesting;
    out["empirical_N_avg"] = result.empirical_n_avg;
    out["std_error"] = result.std_error;
    out["expected_pairs"] = expected;
    out["z_score"] = z;
    out["pairs_histogram"] = result.pairs_histogram;
    out["swap_attempts_histogram"] = result.swap_attempts_histogram;
    out["mean_photons_per_swap"] = result.mean_photons_per_swap;
    // Expectation accounting assumes 2/q photons per swap, uncapped; the
    // empirical mean above is capped at n_s per round. Both are reported.
    out["uncapped_expected_photons_per_swap"] =
        2.0 / qrep::swap_photon_probability(cfg.params);
    out["cycle_time_expectation_s"] = result.cycle_time_expectation_s;
    out["mean_cycle_time_empirical_s"] = result.mean_cycle_time_empirical_s;
    json latency = json::array();
    for (const qrep::LatencyStage& stage : qrep::latency_breakdown(trial_cfg, result)) {
        latency.push_back(json{{"stage", stage.name},
                               {"expectation_s", stage.expectation_s},
                               {"empirical_s", stage.empirical_s}});
    }
    out["latency"] = std::move(latency);
    if (trial_cfg.mode == qrep::SimMode::Microscopic) {
        out["pairs_checked"] = result.pairs_checked;
        out["pairs_exact"] = result.pairs_exact;
    }

    const std::string payload = out.dump(2) + "\n";
    std::cout << payload;
    if (!out_path.empty()) {
        write_file(out_path, payload);
        write_manifest(out_path, "simulate", cfg, seed, payload);
    }

    if (std::abs(z) > 5.0) {
        std::cerr << "z-score guard tripped: |" << z << "| > 5\n";
        return kExitFailure;
    }
    return 0;
}

int cmd_verify() {
    const std::vector<qrep::SuiteResult> results = qrep::run_verification();
    bool all_passed = true;
    for (const qrep::SuiteResult& suite : results) {
        if (suite.passed()) {
            std::cout << "PASS " << suite.name << ": " << suite.detail << "\n";
        } else {
            all_passed = false;
            std::cout << "FAIL " << suite.name << ":\n";
            for (const std::string& failure : suite.failures) {
                std::cout << "  " << failure << "\n";
            }
        }
    }
    return all_passed ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity-based quantum repeater rate model and protocol simulator"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string out_path;
    std::string format;
    std::string mode = "abstract";
    std::int64_t trials = 100000;
    std::uint64_t seed = 1;
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    bool table3 = false;
    int n_max_flag = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "Config file path");
        sub->add_option("--set", common.overrides, "Override KEY=VALUE (repeatable)");
    };

    CLI::App* rate = app.add_subcommand("rate", "Closed-form rate report for one point");
    add_common(rate);

    CLI::App* sweep = app.add_subcommand("sweep", "Evaluate a parameter grid");
    add_common(sweep);
    sweep->add_option("--preset", common.preset, "Built-in sweep preset");
    sweep->add_option("--out", out_path, "Output data file");
    sweep->add_option("--format", format, "csv or json");
    sweep->add_option("--workers", workers, "Worker threads");

    CLI::App* optimize = app.add_subcommand("optimize", "Optimal nesting depth");
    add_common(optimize);
    optimize->add_flag("--table3", table3, "Emit the 3x3 eta_s x epsilon_CN grid of n*");
    optimize->add_option("--n-max", n_max_flag, "Depth search bound");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo cycle simulation");
    add_common(simulate);
    simulate->add_option("--trials", trials, "Number of trials");
    simulate->add_option("--seed", seed, "Master seed");
    simulate->add_option("--out", out_path, "Output data file");
    simulate->add_option("--mode", mode, "abstract or microscopic");
    simulate->add_option("--workers", workers, "Worker threads");

    app.add_subcommand("verify", "Run the protocol verification suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitBadInput : 0;
    }

    try {
        if (app.got_subcommand("rate")) return cmd_rate(common);
        if (app.got_subcommand("sweep")) return cmd_sweep(common, out_path, format, workers);
        if (app.got_subcommand("optimize")) return cmd_optimize(common, table3, n_max_flag);
        if (app.got_subcommand("simulate")) {
            return cmd_simulate(common, trials, seed, out_path, mode, workers);
        }
        if (app.got_subcommand("verify")) return cmd_verify();
    } catch (const qrep::ConfigError& e) {
        std::cerr << "config error";
        if (e.line > 0) std::cerr << " (line " << e.line << ", column " << e.column << ")";
        std::cerr << ": " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    return 0;
}
