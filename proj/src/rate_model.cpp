#include "qrep/rate_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qrep {

namespace {

double log_choose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Expected gate operations per swap, counting retries: 4 / q^2.
double gates_per_swap(const RepeaterParams& p) {
    const double q = swap_photon_probability(p);
    return 4.0 / (q * q);
}

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

void RepeaterParams::validate() const {
    const std::pair<const char*, double> unit_interval[] = {
        {"eta_s", eta_s}, {"eta_d", eta_d}, {"eta_c", eta_c}, {"p_CN", p_cn}};
    for (const auto& [name, value] : unit_interval) {
        if (value <= 0.0 || value > 1.0) {
            throw std::invalid_argument(std::string(name) + " must be in (0, 1]");
        }
    }
    if (epsilon_cn < 0.0 || epsilon_cn >= 1.0) {
        throw std::invalid_argument("epsilon_CN must be in [0, 1)");
    }
    const std::pair<const char*, double> positive[] = {
        {"t_coh", t_coh}, {"t_CN", t_cn}, {"L_att", l_att_km}, {"c_fiber", c_fiber}};
    for (const auto& [name, value] : positive) {
        if (value <= 0.0) {
            throw std::invalid_argument(std::string(name) + " must be positive");
        }
    }
}

void ChainTopology::validate() const {
    if (length_km <= 0.0) throw std::invalid_argument("L must be positive");
    if (nesting < 1 || nesting > 30) throw std::invalid_argument("n must be in [1, 30]");
    if (multiplex < 1) throw std::invalid_argument("n_m must be at least 1");
    if (swap_attempt_cap < 1) throw std::invalid_argument("n_s must be at least 1");
}

double link_probability(const RepeaterParams& p, const ChainTopology& t) {
    p.validate();
    t.validate();
    return p.p_cn * p.p_cn * p.eta_c * p.eta_c * p.eta_d * p.eta_s *
           std::exp(-t.link_length_km() / p.l_att_km);
}

double swap_photon_probability(const RepeaterParams& p) {
    return p.eta_d * p.eta_s * p.eta_c * p.eta_c * p.p_cn * p.p_cn;
}

double expected_pairs(double p0, const ChainTopology& t, double q_swap_photon) {
    if (p0 < 0.0 || p0 > 1.0 || q_swap_photon < 0.0 || q_swap_photon > 1.0) {
        throw std::invalid_argument("probabilities must be in [0, 1]");
    }
    t.validate();
    const int n_m = t.multiplex;
    const double links = static_cast<double>(t.links());

    // Per-link count pmf and upper tail, in linear space (each term is a
    // probability so it cannot overflow; the log-space work is in the
    // powers below).
    std::vector<double> pmf(n_m + 1, 0.0);
    for (int j = 0; j <= n_m; ++j) {
        if ((p0 == 0.0 && j > 0) || (p0 == 1.0 && j < n_m)) continue;
        double lg = log_choose(n_m, j);
        if (j > 0) lg += j * std::log(p0);
        if (j < n_m) lg += (n_m - j) * std::log1p(-p0);
        pmf[j] = std::exp(lg);
    }
    std::vector<double> tail(n_m + 2, 0.0);  // tail[i] = P(count >= i)
    for (int j = n_m; j >= 0; --j) tail[j] = tail[j + 1] + pmf[j];

    KahanSum total;
    // Saturation: every link delivers the full multiplex width.
    if (pmf[n_m] > 0.0) {
        total.add(n_m * std::exp(links * std::log(pmf[n_m])));
    }
    // Exactly k links at the minimum i, the rest strictly above.
    for (int i = 1; i <= n_m - 1; ++i) {
        if (pmf[i] == 0.0) continue;
        const double log_at = std::log(pmf[i]);
        const double log_above = tail[i + 1] > 0.0 ? std::log(tail[i + 1]) : 0.0;
        KahanSum inner;
        for (double k = 1; k <= links; ++k) {
            if (tail[i + 1] == 0.0 && k < links) continue;
            const double lt = log_choose(links, k) + k * log_at + (links - k) * log_above;
            inner.add(std::exp(lt));
        }
        total.add(i * inner.sum);
    }

    const double round_fail = std::pow(1.0 - q_swap_photon, t.swap_attempt_cap);
    const double swap_factor = std::pow(1.0 - round_fail, 2.0 * (links - 1.0));
    return total.sum * swap_factor;
}

double cycle_time(const RepeaterParams& p, const ChainTopology& t) {
    p.validate();
    t.validate();
    const double link_m = t.link_length_km() * 1000.0;
    double total = 2.0 * p.t_cn + 2.0 * link_m / p.c_fiber;
    for (int i = 0; i <= t.nesting - 2; ++i) {
        total += gates_per_swap(p) * p.t_cn + std::ldexp(1.0, i) * link_m / p.c_fiber;
    }
    return total;
}

double layer_elapsed_time(const RepeaterParams& p, const ChainTopology& t, int k) {
    if (k < 1 || k > t.nesting - 1) {
        throw std::invalid_argument("layer index out of range");
    }
    const double link_m = t.link_length_km() * 1000.0;
    double elapsed = 2.0 * p.t_cn + 2.0 * link_m / p.c_fiber;
    for (int i = 0; i <= k - 2; ++i) {
        elapsed += gates_per_swap(p) * p.t_cn + std::ldexp(1.0, i) * link_m / p.c_fiber;
    }
    return elapsed;
}

double fidelity_cascade(const RepeaterParams& p, const ChainTopology& t) {
    p.validate();
    t.validate();
    const int n = t.nesting;

    // Work with log-fidelity; exponents reach a few thousand gate
    // operations and the product would underflow term by term.
    double log_f = std::ldexp(1.0, n) * std::log1p(-p.epsilon_cn);

    if (n >= 2) {
        const double ops = gates_per_swap(p);
        for (int k = 1; k <= n - 1; ++k) {
            const double layer_ops = ops * std::ldexp(1.0, n - k - 1);
            const double tk = layer_elapsed_time(p, t, k);
            log_f += layer_ops * (std::log1p(-p.epsilon_cn) - tk / p.t_coh);
        }
    }
    log_f -= cycle_time(p, t) / p.t_coh;

    const double f = std::exp(log_f);
    return std::isfinite(f) ? f : 0.0;
}

double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double six_state_fraction(double qber) {
    if (qber < 0.0 || qber >= 1.0) {
        throw std::invalid_argument("qber must be in [0, 1)");
    }
    if (qber >= 2.0 / 3.0) return 0.0;  // phase argument leaves [0, 1]
    const double phase_arg = (1.0 - 1.5 * qber) / (1.0 - qber);
    const double value =
        (1.0 - qber) * (1.0 - binary_entropy(phase_arg)) - binary_entropy(qber);
    return value > 0.0 ? value : 0.0;
}

double cnot_count(const RepeaterParams& p, const ChainTopology& t) {
    p.validate();
    t.validate();
    return std::ldexp(1.0, t.nesting) + gates_per_swap(p) * (static_cast<double>(t.links()) - 1.0);
}

RateReport key_rate(const RepeaterParams& p, const ChainTopology& t) {
    RateReport r;
    r.p0 = link_probability(p, t);
    r.q_swap_photon = swap_photon_probability(p);
    r.n_avg = expected_pairs(r.p0, t, r.q_swap_photon);
    r.t_tot_s = cycle_time(p, t);
    r.f_avg = fidelity_cascade(p, t);
    r.qber = 1.0 - r.f_avg;
    r.key_fraction = r.qber < 1.0 ? six_state_fraction(r.qber) : 0.0;
    r.rate_hz = r.n_avg * r.key_fraction / r.t_tot_s;
    r.rate_eff_hz = r.rate_hz / (std::ldexp(1.0, t.nesting) * t.multiplex) *
                    (t.length_km / p.l_att_km);
    r.cnot_ops = cnot_count(p, t);
    return r;
}

OptimizeResult optimize_depth(const RepeaterParams& p, double length_km, int multiplex,
                              int n_min, int n_max, int swap_attempt_cap) {
    if (n_min < 1 || n_max < n_min) {
        throw std::invalid_argument("bad nesting range");
    }
    OptimizeResult best;
    bool have_best = false;
    bool any_positive = false;
    for (int n = n_min; n <= n_max; ++n) {
        ChainTopology t{length_km, n, multiplex, swap_attempt_cap};
        const RateReport r = key_rate(p, t);
        if (r.rate_hz > 0.0) any_positive = true;
        if (!have_best || r.rate_hz > best.report.rate_hz) {
            best.n_star = n;
            best.report = r;
            have_best = true;
        }
    }
    best.all_zero = !any_positive;
    if (best.all_zero) {
        ChainTopology t{length_km, n_min, multiplex, swap_attempt_cap};
        best.n_star = n_min;
        best.report = key_rate(p, t);
    }
    return best;
}

}  // namespace qrep
