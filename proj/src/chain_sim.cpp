#include "qrep/chain_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "qrep/protocols.hpp"
#include "qrep/random.hpp"

namespace qrep {

namespace {

constexpr std::int64_t kBlockSize = 8192;

struct Precomputed {
    double p0 = 0.0;
    double q = 0.0;
    std::vector<double> binomial_cdf;  // CDF of successes out of n_m
    std::int64_t links = 0;
    int stages = 0;                      // swap stages = nesting - 1
    std::vector<std::int64_t> stage_stations;  // stations per stage
    double generation_window_s = 0.0;
    double leg_s_base = 0.0;  // link length / c
    double expectation_gate_window_s = 0.0;
};

struct BlockStats {
    std::vector<std::int64_t> pairs_hist;
    std::vector<std::int64_t> attempts_hist;
    std::vector<std::int64_t> stage_photons;
    std::vector<std::int64_t> stage_samples;
    long double time_sum = 0.0L;
    std::int64_t checked = 0;
    std::int64_t exact = 0;
};

Precomputed precompute(const TrialConfig& cfg) {
    Precomputed pre;
    pre.p0 = link_probability(cfg.params, cfg.topology);
    pre.q = swap_photon_probability(cfg.params);
    pre.links = cfg.topology.links();
    pre.stages = cfg.topology.nesting - 1;

    const int n_m = cfg.topology.multiplex;
    pre.binomial_cdf.resize(n_m + 1);
    double acc = 0.0;
    for (int j = 0; j <= n_m; ++j) {
        double pmf = 0.0;
        if (!((pre.p0 == 0.0 && j > 0) || (pre.p0 == 1.0 && j < n_m))) {
            double lg = std::lgamma(n_m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n_m - j + 1.0);
            if (j > 0) lg += j * std::log(pre.p0);
            if (j < n_m) lg += (n_m - j) * std::log1p(-pre.p0);
            pmf = std::exp(lg);
        }
        acc += pmf;
        pre.binomial_cdf[j] = acc;
    }
    pre.binomial_cdf[n_m] = 1.0;

    pre.stage_stations.resize(std::max(pre.stages, 0));
    for (int i = 0; i < pre.stages; ++i) {
        pre.stage_stations[i] = pre.links >> (i + 1);
    }

    const double link_m = cfg.topology.link_length_km() * 1000.0;
    pre.generation_window_s = 2.0 * cfg.params.t_cn + 2.0 * link_m / cfg.params.c_fiber;
    pre.leg_s_base = link_m / cfg.params.c_fiber;
    pre.expectation_gate_window_s = 4.0 * cfg.params.t_cn / (pre.q * pre.q);
    return pre;
}

int sample_binomial(RandomStream& rng, const std::vector<double>& cdf) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
}

/// Photon index (1-based) on which a parity round registers, or 0 when the
/// cap runs out. P(k) = (1-q)^(k-1) q, so P(0) = (1-q)^cap.
int sample_round_attempts(RandomStream& rng, double q, int cap) {
    if (q >= 1.0) return 1;
    if (q <= 0.0) return 0;
    const double u = rng.uniform();
    const double failures = std::floor(std::log1p(-u) / std::log1p(-q));
    if (!(failures >= 0.0)) return 1;  // u rounded to 0
    if (failures >= static_cast<double>(cap)) return 0;
    return static_cast<int>(failures) + 1;
}

/// Drives the exact protocol engine along one delivered pair's success
/// path: generation on every link, then pairwise swapping up the stages.
/// Losses are already accounted by the abstract layer, so efficiencies are
/// pinned to 1 here; gate errors stay live.
bool drive_microscopic_pair(const TrialConfig& cfg, RandomStream& rng) {
    SamplingChooser chooser(rng);
    GateNoise noise;
    noise.success_prob = 1.0;
    noise.error_rate = cfg.params.epsilon_cn;
    noise.gate_time_s = cfg.params.t_cn;

    GenerationConfig gen;
    gen.noise_a = noise;
    gen.noise_b = noise;

    std::vector<Register> pairs;
    for (std::int64_t l = 0; l < cfg.topology.links(); ++l) {
        GenerationOutcome out = generate_entanglement(gen, chooser);
        if (out.kind != GenerationOutcome::Kind::Entangled) {
            throw std::logic_error("lossless generation did not entangle");
        }
        pairs.push_back(out.state);
    }

    const SwapEfficiencies perfect;
    while (pairs.size() > 1) {
        std::vector<Register> next;
        for (std::size_t i = 0; i + 1 < pairs.size(); i += 2) {
            Register four = tensor(pairs[i], pairs[i + 1]);
            SwapResult swap = swap_entanglement(four, noise, perfect,
                                                cfg.topology.swap_attempt_cap, chooser);
            if (!swap.swapped) {
                throw std::logic_error("lossless swap failed");
            }
            next.push_back(swap.state);
        }
        pairs = std::move(next);
    }

    return fidelity(pairs[0], bell_pair(BellLabel::PhiPlus)) > 1.0 - 1e-12;
}

BlockStats run_block(const TrialConfig& cfg, const Precomputed& pre,
                     std::int64_t first, std::int64_t count) {
    BlockStats stats;
    stats.pairs_hist.assign(cfg.topology.multiplex + 1, 0);
    stats.attempts_hist.assign(cfg.topology.swap_attempt_cap + 1, 0);
    stats.stage_photons.assign(std::max(pre.stages, 0), 0);
    stats.stage_samples.assign(std::max(pre.stages, 0), 0);

    for (std::int64_t trial = first; trial < first + count; ++trial) {
        RandomStream rng = RandomStream::for_trial(cfg.master_seed, trial);

        int pairs = cfg.topology.multiplex;
        for (std::int64_t l = 0; l < pre.links; ++l) {
            pairs = std::min(pairs, sample_binomial(rng, pre.binomial_cdf));
            if (pairs == 0) break;
        }

        // Station survival, grouped by stage for the time model. Each
        // delivered pair crosses every station; a pair is dropped the first
        // time either parity round exhausts its photons.
        std::vector<std::int64_t> trial_stage_photons(std::max(pre.stages, 0), 0);
        std::vector<std::int64_t> trial_stage_samples(std::max(pre.stages, 0), 0);
        int delivered = 0;
        for (int pair = 0; pair < pairs; ++pair) {
            bool alive = true;
            for (int stage = 0; stage < pre.stages && alive; ++stage) {
                for (std::int64_t st = 0; st < pre.stage_stations[stage] && alive; ++st) {
                    const int a1 = sample_round_attempts(rng, pre.q, cfg.topology.swap_attempt_cap);
                    stats.attempts_hist[a1]++;
                    if (a1 == 0) {
                        alive = false;
                        break;
                    }
                    const int a2 = sample_round_attempts(rng, pre.q, cfg.topology.swap_attempt_cap);
                    stats.attempts_hist[a2]++;
                    if (a2 == 0) {
                        alive = false;
                        break;
                    }
                    trial_stage_photons[stage] += a1 + a2;
                    trial_stage_samples[stage]++;
                }
            }
            if (alive) ++delivered;
        }
        stats.pairs_hist[delivered]++;

        for (int stage = 0; stage < pre.stages; ++stage) {
            stats.stage_photons[stage] += trial_stage_photons[stage];
            stats.stage_samples[stage] += trial_stage_samples[stage];
        }

        // Empirical wall time for this trial: sampled swap windows where we
        // have samples, the expectation window where we do not.
        double wall = pre.generation_window_s;
        for (int stage = 0; stage < pre.stages; ++stage) {
            if (trial_stage_samples[stage] > 0) {
                const double mean_photons = static_cast<double>(trial_stage_photons[stage]) /
                                            static_cast<double>(trial_stage_samples[stage]);
                wall += 2.0 * cfg.params.t_cn * mean_photons;
            } else {
                wall += pre.expectation_gate_window_s;
            }
            wall += std::ldexp(1.0, stage) * pre.leg_s_base;
        }
        stats.time_sum += wall;

        if (cfg.mode == SimMode::Microscopic) {
            for (int pair = 0; pair < delivered; ++pair) {
                stats.checked++;
                if (drive_microscopic_pair(cfg, rng)) stats.exact++;
            }
        }
    }
    return stats;
}

}  // namespace

void TrialConfig::validate() const {
    params.validate();
    topology.validate();
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (mode == SimMode::Microscopic) {
        if (topology.links() > 4 || topology.multiplex > 3) {
            throw std::invalid_argument(
                "microscopic mode is limited to 2^(n-1) <= 4 links and n_m <= 3");
        }
    }
}

TrialResult run_trials(const TrialConfig& cfg, int workers) {
    cfg.validate();
    const Precomputed pre = precompute(cfg);

    const std::int64_t blocks = (cfg.trials + kBlockSize - 1) / kBlockSize;
    std::vector<BlockStats> block_stats(blocks);

    auto worker_fn = [&](int worker, int worker_count) {
        for (std::int64_t b = worker; b < blocks; b += worker_count) {
            const std::int64_t first = b * kBlockSize;
            const std::int64_t count = std::min(kBlockSize, cfg.trials - first);
            block_stats[b] = run_block(cfg, pre, first, count);
        }
    };

    const int worker_count = std::max(1, workers);
    if (worker_count == 1 || blocks == 1) {
        worker_fn(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < worker_count; ++w) {
            pool.emplace_back(worker_fn, w, worker_count);
        }
        for (auto& th : pool) th.join();
    }

    TrialResult result;
    result.trials = cfg.trials;
    result.pairs_histogram.assign(cfg.topology.multiplex + 1, 0);
    result.swap_attempts_histogram.assign(cfg.topology.swap_attempt_cap + 1, 0);
    result.stage_mean_photons.assign(std::max(pre.stages, 0), 0.0);
    result.stage_swap_samples.assign(std::max(pre.stages, 0), 0);

    std::vector<std::int64_t> stage_photons(std::max(pre.stages, 0), 0);
    long double time_sum = 0.0L;
    for (const BlockStats& s : block_stats) {
        for (std::size_t i = 0; i < result.pairs_histogram.size(); ++i) {
            result.pairs_histogram[i] += s.pairs_hist[i];
        }
        for (std::size_t i = 0; i < result.swap_attempts_histogram.size(); ++i) {
            result.swap_attempts_histogram[i] += s.attempts_hist[i];
        }
        for (int i = 0; i < pre.stages; ++i) {
            stage_photons[i] += s.stage_photons[i];
            result.stage_swap_samples[i] += s.stage_samples[i];
        }
        time_sum += s.time_sum;
        result.pairs_checked += s.checked;
        result.pairs_exact += s.exact;
    }

    // Moments from the integer histogram keep the result independent of
    // execution order.
    long double sum = 0.0L, sum_sq = 0.0L;
    for (std::size_t k = 0; k < result.pairs_histogram.size(); ++k) {
        const long double kk = static_cast<long double>(k);
        sum += kk * result.pairs_histogram[k];
        sum_sq += kk * kk * result.pairs_histogram[k];
    }
    const long double n = static_cast<long double>(cfg.trials);
    const long double mean = sum / n;
    result.empirical_n_avg = static_cast<double>(mean);
    if (cfg.trials > 1) {
        const long double var = (sum_sq - n * mean * mean) / (n - 1.0L);
        result.std_error = static_cast<double>(std::sqrt(std::max(var, 0.0L) / n));
    }

    std::int64_t total_swaps = 0, total_photons = 0;
    for (int i = 0; i < pre.stages; ++i) {
        if (result.stage_swap_samples[i] > 0) {
            result.stage_mean_photons[i] = static_cast<double>(stage_photons[i]) /
                                           static_cast<double>(result.stage_swap_samples[i]);
        }
        total_swaps += result.stage_swap_samples[i];
        total_photons += stage_photons[i];
    }
    if (total_swaps > 0) {
        result.mean_photons_per_swap =
            static_cast<double>(total_photons) / static_cast<double>(total_swaps);
    }

    result.cycle_time_expectation_s = cycle_time(cfg.params, cfg.topology);
    result.mean_cycle_time_empirical_s = static_cast<double>(time_sum / n);
    return result;
}

std::vector<LatencyStage> latency_breakdown(const TrialConfig& cfg, const TrialResult& result) {
    const Precomputed pre = precompute(cfg);

    std::vector<LatencyStage> trace;
    trace.push_back({"generation", pre.generation_window_s, pre.generation_window_s});
    for (int stage = 0; stage < pre.stages; ++stage) {
        LatencyStage gate;
        gate.name = "swap-stage-" + std::to_string(stage);
        gate.expectation_s = pre.expectation_gate_window_s;
        gate.empirical_s = result.stage_swap_samples[stage] > 0
                               ? 2.0 * cfg.params.t_cn * result.stage_mean_photons[stage]
                               : pre.expectation_gate_window_s;
        trace.push_back(gate);

        LatencyStage leg;
        leg.name = "feed-forward-" + std::to_string(stage);
        leg.expectation_s = std::ldexp(1.0, stage) * pre.leg_s_base;
        leg.empirical_s = leg.expectation_s;
        trace.push_back(leg);
    }
    return trace;
}

std::vector<LatencyStage> latency_trace(const TrialConfig& cfg, int workers) {
    return latency_breakdown(cfg, run_trials(cfg, workers));
}

}  // namespace qrep
