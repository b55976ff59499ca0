#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "qrep/matrix.hpp"
#include "qrep/random.hpp"
#include "qrep/register.hpp"

namespace qrep::test {

inline double gaussian(RandomStream& rng) {
    // Box-Muller; one value per call is plenty for test states.
    const double u1 = std::max(rng.uniform(), 1e-300);
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline Register random_state(const std::vector<Subsystem>& layout, RandomStream& rng) {
    std::size_t dim = 1;
    for (Subsystem s : layout) dim *= subsystem_dim(s);
    std::vector<cxd> amps(dim);
    double norm_sq = 0.0;
    for (cxd& a : amps) {
        a = cxd(gaussian(rng), gaussian(rng));
        norm_sq += std::norm(a);
    }
    const double scale = 1.0 / std::sqrt(norm_sq);
    for (cxd& a : amps) a *= scale;
    return Register::from_amplitudes(layout, std::move(amps));
}

/// Haar-ish random unitary via Gram-Schmidt on a Gaussian matrix.
inline Matrix random_unitary(std::size_t dim, RandomStream& rng) {
    std::vector<std::vector<cxd>> cols(dim, std::vector<cxd>(dim));
    for (auto& col : cols) {
        for (cxd& v : col) v = cxd(gaussian(rng), gaussian(rng));
    }
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t prev = 0; prev < c; ++prev) {
            cxd overlap = 0.0;
            for (std::size_t r = 0; r < dim; ++r) overlap += std::conj(cols[prev][r]) * cols[c][r];
            for (std::size_t r = 0; r < dim; ++r) cols[c][r] -= overlap * cols[prev][r];
        }
        double norm_sq = 0.0;
        for (const cxd& v : cols[c]) norm_sq += std::norm(v);
        const double scale = 1.0 / std::sqrt(norm_sq);
        for (cxd& v : cols[c]) v *= scale;
    }
    Matrix u(dim, dim);
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) u(r, c) = cols[c][r];
    }
    return u;
}

inline double max_amp_diff(const Register& a, const Register& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.total_dim(); ++i) {
        worst = std::max(worst, std::abs(a.amplitudes()[i] - b.amplitudes()[i]));
    }
    return worst;
}

}  // namespace qrep::test
