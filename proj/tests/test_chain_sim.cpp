#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "qrep/chain_sim.hpp"

using namespace qrep;

namespace {

TrialConfig base_config() {
    TrialConfig cfg;
    cfg.topology = ChainTopology{100.0, 3, 4, 5};  // 25 km links, p0 ~ 0.24
    cfg.trials = 20000;
    cfg.master_seed = 12345;
    return cfg;
}

/// Parameters that make every branch deterministic: p0 == 1 and q == 1.
TrialConfig deterministic_config() {
    TrialConfig cfg = base_config();
    cfg.params.eta_s = cfg.params.eta_d = cfg.params.eta_c = cfg.params.p_cn = 1.0;
    cfg.params.l_att_km = 1e300;  // kills the exponential loss exactly
    cfg.trials = 500;
    return cfg;
}

}  // namespace

TEST_CASE("deterministic channels deliver the full multiplex width every trial") {
    const TrialConfig cfg = deterministic_config();
    const TrialResult res = run_trials(cfg);
    CHECK(res.pairs_histogram.back() == cfg.trials);
    CHECK(res.empirical_n_avg == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(res.std_error == 0.0);
}

TEST_CASE("a single link reproduces the binomial mean") {
    TrialConfig cfg = base_config();
    cfg.topology = ChainTopology{22.0, 1, 10, 5};  // p0 ~ 0.28
    cfg.trials = 200000;
    const TrialResult res = run_trials(cfg);
    const double expected = 10.0 * link_probability(cfg.params, cfg.topology);
    CHECK(std::abs(res.empirical_n_avg - expected) <= 3.0 * res.std_error);
}

TEST_CASE("empirical pair count agrees with the closed form") {
    TrialConfig cfg = base_config();
    cfg.trials = 100000;
    const TrialResult res = run_trials(cfg);
    const double expected =
        expected_pairs(link_probability(cfg.params, cfg.topology), cfg.topology,
                       swap_photon_probability(cfg.params));
    CHECK(std::abs(res.empirical_n_avg - expected) <= 3.0 * res.std_error);
}

TEST_CASE("identical seeds give identical results regardless of worker count") {
    TrialConfig cfg = base_config();
    cfg.trials = 30000;
    const TrialResult a = run_trials(cfg, 1);
    const TrialResult b = run_trials(cfg, 4);
    CHECK(a.empirical_n_avg == b.empirical_n_avg);
    CHECK(a.std_error == b.std_error);
    CHECK(a.pairs_histogram == b.pairs_histogram);
    CHECK(a.swap_attempts_histogram == b.swap_attempts_histogram);
    CHECK(a.mean_cycle_time_empirical_s == b.mean_cycle_time_empirical_s);

    cfg.master_seed ^= 1;
    const TrialResult c = run_trials(cfg, 1);
    CHECK(a.pairs_histogram != c.pairs_histogram);
}

TEST_CASE("swap attempt histogram matches the capped geometric law") {
    TrialConfig cfg = base_config();
    cfg.trials = 50000;
    const TrialResult res = run_trials(cfg);
    const double q = swap_photon_probability(cfg.params);

    std::int64_t rounds = 0;
    for (std::int64_t c : res.swap_attempts_histogram) rounds += c;
    REQUIRE(rounds > 0);

    for (int a = 1; a <= cfg.topology.swap_attempt_cap; ++a) {
        const double expected = std::pow(1.0 - q, a - 1) * q;
        const double observed =
            static_cast<double>(res.swap_attempts_histogram[a]) / static_cast<double>(rounds);
        const double sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(rounds));
        CHECK(std::abs(observed - expected) <= 4.0 * sigma + 1e-9);
    }
}

TEST_CASE("microscopic mode certifies every delivered pair when gates are clean") {
    TrialConfig cfg;
    cfg.topology = ChainTopology{50.0, 3, 2, 5};  // 12.5 km links, p0 ~ 0.43
    cfg.params.epsilon_cn = 0.0;
    cfg.trials = 300;
    cfg.master_seed = 777;
    cfg.mode = SimMode::Microscopic;
    const TrialResult res = run_trials(cfg);
    CHECK(res.pairs_checked > 0);
    CHECK(res.pairs_exact == res.pairs_checked);
}

TEST_CASE("microscopic mode sees gate errors as imperfect pairs") {
    TrialConfig cfg;
    cfg.topology = ChainTopology{50.0, 3, 2, 5};
    cfg.params.epsilon_cn = 0.05;  // large so a 300-trial run must hit some
    cfg.trials = 300;
    cfg.master_seed = 778;
    cfg.mode = SimMode::Microscopic;
    const TrialResult res = run_trials(cfg);
    CHECK(res.pairs_checked > 0);
    CHECK(res.pairs_exact < res.pairs_checked);
}

TEST_CASE("microscopic mode enforces the register cap") {
    TrialConfig cfg = base_config();
    cfg.mode = SimMode::Microscopic;
    cfg.topology.nesting = 4;  // 8 links
    CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);
}

TEST_CASE("latency trace structure and expectation total") {
    TrialConfig cfg = base_config();
    cfg.topology.nesting = 2;
    cfg.trials = 2000;
    const auto trace = latency_trace(cfg);
    REQUIRE(trace.size() == 3);  // generation + one swap stage + one leg
    CHECK(trace[0].name == "generation");

    double total = 0.0;
    for (const LatencyStage& stage : trace) total += stage.expectation_s;
    CHECK(total == doctest::Approx(cycle_time(cfg.params, cfg.topology)).epsilon(1e-12));
}

TEST_CASE("feed-forward legs double at every stage") {
    TrialConfig cfg = base_config();
    cfg.topology.nesting = 5;
    cfg.trials = 100;
    const auto trace = latency_trace(cfg);
    double prev = 0.0;
    for (const LatencyStage& stage : trace) {
        if (stage.name.rfind("feed-forward", 0) != 0) continue;
        if (prev > 0.0) {
            CHECK(stage.expectation_s == doctest::Approx(2.0 * prev).epsilon(1e-12));
        }
        prev = stage.expectation_s;
    }
}

TEST_CASE("expectation cycle time total holds at every depth") {
    for (int n = 1; n <= 6; ++n) {
        TrialConfig cfg = base_config();
        cfg.topology.nesting = n;
        cfg.trials = 50;
        const auto trace = latency_trace(cfg);
        double total = 0.0;
        for (const LatencyStage& stage : trace) total += stage.expectation_s;
        CHECK(total == doctest::Approx(cycle_time(cfg.params, cfg.topology)).epsilon(1e-12));
    }
}
