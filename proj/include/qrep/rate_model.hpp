#pragma once

#include <cstdint>

namespace qrep {

/// Experimental scalars of the performance model. Defaults are the
/// baseline simulation parameter set.
struct RepeaterParams {
    double t_coh = 10.0;          // qubit coherence time, s
    double eta_s = 0.8;           // single photon source efficiency
    double t_cn = 10e-6;          // photon-atom gate time, s
    double eta_d = 0.99;          // detector efficiency
    double eta_c = 0.99;          // fiber-cavity coupling efficiency
    double p_cn = 0.99;           // gate success probability
    double l_att_km = 22.0;       // fiber attenuation constant, km
    double epsilon_cn = 1e-4;     // gate error rate
    double c_fiber = 2.0e8;       // signal velocity in fiber, m/s

    void validate() const;
};

struct ChainTopology {
    double length_km = 1000.0;  // end-to-end distance L
    int nesting = 7;            // n; the chain has 2^(n-1) elementary links
    int multiplex = 10;         // parallel channels per node
    int swap_attempt_cap = 5;   // photons per parity round

    void validate() const;
    std::int64_t links() const { return std::int64_t(1) << (nesting - 1); }
    double link_length_km() const { return length_km / static_cast<double>(links()); }
};

struct RateReport {
    double p0 = 0.0;             // single-link success probability
    double q_swap_photon = 0.0;  // per-photon registration probability at a station
    double n_avg = 0.0;          // expected end-to-end pairs per cycle
    double t_tot_s = 0.0;        // cycle time
    double f_avg = 0.0;          // average pair fidelity (lower bound)
    double qber = 0.0;           // Q = 1 - f_avg
    double key_fraction = 0.0;   // six-state asymptotic fraction, clamped at 0
    double rate_hz = 0.0;        // R = n_avg * key_fraction / t_tot
    double rate_eff_hz = 0.0;    // R per unit resource and attenuation length
    double cnot_ops = 0.0;       // expected gate operations per cycle
};

/// p0 = p_cn^2 eta_c^2 eta_d eta_s exp(-link / L_att)
double link_probability(const RepeaterParams& p, const ChainTopology& t);

/// q = eta_d eta_s eta_c^2 p_cn^2, the per-photon probability that a swap
/// parity photon is registered.
double swap_photon_probability(const RepeaterParams& p);

/// Expected number of end-to-end pairs per cycle: the expectation of the
/// minimum of 2^(n-1) iid Binomial(n_m, p0) link counts, times the
/// probability that a pair survives both capped parity rounds at every
/// station. Binomial terms are evaluated in log space so multiplex widths
/// up to 100 stay finite.
double expected_pairs(double p0, const ChainTopology& t, double q_swap_photon);

/// Cycle time: generation window plus per-stage swap gates (expectation
/// accounting 4 t_cn / q^2) and doubling feed-forward legs.
double cycle_time(const RepeaterParams& p, const ChainTopology& t);

/// Elapsed time at the start of swap layer k (k = 1 is the first layer).
double layer_elapsed_time(const RepeaterParams& p, const ChainTopology& t, int k);

/// Average pair fidelity: gate errors across generation, the per-layer swap
/// gate costs with their elapsed-time decoherence, and the end-of-cycle
/// memory decay. Lower-bound estimate; returns 0 on underflow.
double fidelity_cascade(const RepeaterParams& p, const ChainTopology& t);

double binary_entropy(double x);

/// Six-state asymptotic key fraction
/// max{(1-Q)[1 - h((1-3Q/2)/(1-Q))] - h(Q), 0}.
double six_state_fraction(double qber);

/// Expected gate operations per cycle: 2^n for generation plus
/// 4/q^2 per station.
double cnot_count(const RepeaterParams& p, const ChainTopology& t);

RateReport key_rate(const RepeaterParams& p, const ChainTopology& t);

struct OptimizeResult {
    int n_star = 1;
    RateReport report;
    bool all_zero = false;  // every depth gave zero rate
};

/// Scans integer nesting depths in [n_min, n_max] and returns the argmax of
/// the secret key rate; ties break toward smaller n. Pure function.
OptimizeResult optimize_depth(const RepeaterParams& p, double length_km, int multiplex,
                              int n_min = 1, int n_max = 12, int swap_attempt_cap = 5);

}  // namespace qrep
