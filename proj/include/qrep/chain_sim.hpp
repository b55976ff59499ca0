#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrep/rate_model.hpp"

namespace qrep {

enum class SimMode {
    Abstract,     // probabilistic branches only; any topology
    Microscopic,  // additionally drives the exact protocol state machines
};

struct TrialConfig {
    RepeaterParams params;
    ChainTopology topology;
    std::int64_t trials = 10000;
    std::uint64_t master_seed = 1;
    SimMode mode = SimMode::Abstract;

    void validate() const;
};

struct TrialResult {
    std::int64_t trials = 0;
    double empirical_n_avg = 0.0;
    double std_error = 0.0;

    /// pairs_histogram[k] counts trials that delivered k end-to-end pairs.
    std::vector<std::int64_t> pairs_histogram;

    /// swap_attempts_histogram[a] counts parity rounds registered on photon
    /// a (1-based); index 0 counts rounds that exhausted the cap.
    std::vector<std::int64_t> swap_attempts_histogram;

    /// Mean photons consumed per swap (both rounds), over completed swaps.
    double mean_photons_per_swap = 0.0;

    /// Cycle time under the expectation accounting (constant) and with the
    /// per-trial capped-attempt samples.
    double cycle_time_expectation_s = 0.0;
    double mean_cycle_time_empirical_s = 0.0;

    /// Per-stage mean photons per swap, stages 0..n-2.
    std::vector<double> stage_mean_photons;
    std::vector<std::int64_t> stage_swap_samples;

    // Microscopic mode: delivered pairs checked against the exact protocol
    // engine, and how many came out with unit fidelity to phi+.
    std::int64_t pairs_checked = 0;
    std::int64_t pairs_exact = 0;
};

/// Runs the cycle model: per trial, each link draws Binomial(n_m, p0)
/// successes, the chain delivers the minimum across links, and every
/// delivered pair must register two parity photons within the attempt cap
/// at every station. Trial seeds derive from (master_seed, trial index), so
/// results are independent of worker count and execution order.
TrialResult run_trials(const TrialConfig& cfg, int workers = 1);

struct LatencyStage {
    std::string name;
    double expectation_s = 0.0;
    double empirical_s = 0.0;
};

/// One-cycle time breakdown: the generation window, then per swap stage the
/// gate window and the feed-forward leg. Expectation entries sum exactly to
/// cycle_time(); empirical swap windows use the capped-attempt means from
/// the trials, surfacing the gap between the two accountings.
std::vector<LatencyStage> latency_trace(const TrialConfig& cfg, int workers = 1);

/// Same breakdown from an existing trial result.
std::vector<LatencyStage> latency_breakdown(const TrialConfig& cfg, const TrialResult& result);

}  // namespace qrep
